#pragma once

#include <cstddef>
#include <vector>

#include "decoh/model.hpp"

namespace decoh::detail {

/// Calls fn(flat, index_sum) for every node of `grid` in row-major order.
template <class Fn>
void walk_index_sums(const UniformGrid& grid, Fn&& fn) {
  const std::size_t d = grid.dims();
  std::vector<std::size_t> idx(d, 0);
  std::size_t sum = 0;
  const std::size_t total = grid.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(flat, sum);
    for (std::size_t axis = d; axis-- > 0;) {
      if (++idx[axis] < grid.counts[axis]) {
        ++sum;
        break;
      }
      sum -= idx[axis] - 1;
      idx[axis] = 0;
    }
  }
}

/// Calls fn(flat, idx) with the full multi-index.
template <class Fn>
void walk_indices(const UniformGrid& grid, Fn&& fn) {
  const std::size_t d = grid.dims();
  std::vector<std::size_t> idx(d, 0);
  const std::size_t total = grid.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(flat, static_cast<const std::vector<std::size_t>&>(idx));
    for (std::size_t axis = d; axis-- > 0;) {
      if (++idx[axis] < grid.counts[axis]) break;
      idx[axis] = 0;
    }
  }
}

}  // namespace decoh::detail
