#include "decoh/comdist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "decoh/error.hpp"
#include "grid_walk.hpp"

namespace decoh {

namespace {

constexpr double kTailMass = 1e-4;
constexpr double kEndpointRatio = 1e-8;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

// Distribution of y = x / n for one particle.
double scaled_cdf(const ParticleDensity& p, double y, int n) {
  const double x = y * n;
  return std::visit(overloaded{
                        [x](const Gaussian& g) { return 0.5 * std::erfc(-(x - g.mean) / (g.std * std::numbers::sqrt2)); },
                        [x](const Box& b) { return std::clamp((x - b.center + b.halfwidth) / (2 * b.halfwidth), 0.0, 1.0); },
                        [x](const Cauchy& c) { return 0.5 + std::atan((x - c.location) / c.scale) / std::numbers::pi; },
                        [x](const Delta& d) { return x < d.location ? 0.0 : 1.0; },
                    },
                    p);
}

void require_no_delta(const EnvState& env) {
  if (env.has_delta()) throw Error(ErrorCode::DeltaUnsupported, "point-mass density has no sampled form");
}

void check_tail(double outside, const char* what) {
  if (outside > kTailMass) {
    std::ostringstream msg;
    msg << what << ": mass " << outside << " outside the eta grid exceeds " << kTailMass;
    throw Error(ErrorCode::GridTooNarrow, msg.str());
  }
}

template <class T>
bool all_of_type(const ProductFamily& f) {
  return std::all_of(f.particles.begin(), f.particles.end(), [](const auto& p) { return std::holds_alternative<T>(p); });
}

// Closed-form eta density when one exists: n == 1, all-Gaussian, all-Cauchy.
std::optional<ParticleDensity> closed_form_eta(const ProductFamily& f, int n) {
  if (n == 1) return f.particle(0);
  if (all_of_type<Gaussian>(f)) {
    double mean = 0, var = 0;
    for (int i = 0; i < n; ++i) {
      const auto& g = std::get<Gaussian>(f.particle(i));
      mean += g.mean;
      var += g.std * g.std;
    }
    return Gaussian{mean / n, std::sqrt(var) / n};
  }
  if (all_of_type<Cauchy>(f)) {
    double loc = 0, scale = 0;
    for (int i = 0; i < n; ++i) {
      const auto& c = std::get<Cauchy>(f.particle(i));
      loc += c.location;
      scale += c.scale;
    }
    return Cauchy{loc / n, scale / n};
  }
  return std::nullopt;
}

double pdf(const ParticleDensity& p, double x) {
  return std::visit(overloaded{
                        [x](const Gaussian& g) {
                          const double u = (x - g.mean) / g.std;
                          return std::exp(-0.5 * u * u) / (g.std * std::sqrt(2 * std::numbers::pi));
                        },
                        [x](const Box& b) { return std::abs(x - b.center) < b.halfwidth ? 0.5 / b.halfwidth : 0.0; },
                        [x](const Cauchy& c) {
                          const double u = (x - c.location) / c.scale;
                          return 1.0 / (std::numbers::pi * c.scale * (1 + u * u));
                        },
                        [](const Delta&) -> double { throw Error(ErrorCode::DeltaUnsupported, "point mass"); },
                    },
                    p);
}

// Support of y = x/n holding all but ~1e-15 of the mass (finite families only).
std::pair<double, double> scaled_support(const ParticleDensity& p, int n) {
  return std::visit(overloaded{
                        [n](const Gaussian& g) { return std::pair{(g.mean - 9 * g.std) / n, (g.mean + 9 * g.std) / n}; },
                        [n](const Box& b) {
                          return std::pair{(b.center - b.halfwidth) / n, (b.center + b.halfwidth) / n};
                        },
                        [](const auto&) -> std::pair<double, double> {
                          throw Error(ErrorCode::Unsupported, "mixed heavy-tailed product density has no sampled form");
                        },
                    },
                    p);
}

double scale_of(const ParticleDensity& p) {
  return std::visit(overloaded{
                        [](const Gaussian& g) { return g.std; },
                        [](const Box& b) { return b.halfwidth; },
                        [](const Cauchy& c) { return c.scale; },
                        [](const Delta&) { return 0.0; },
                    },
                    p);
}

// Mixed-family product: convolve exact cell masses of y_i = x_i / n on a fine
// lattice, then interpolate the resulting histogram density at grid nodes.
std::vector<double> convolved_density(const ProductFamily& f, int n, const EtaGrid& grid) {
  double min_scale = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) min_scale = std::min(min_scale, scale_of(f.particle(i)) / n);
  const double h = std::min(grid.spacing / 4, min_scale / 400);

  std::vector<double> mass{1.0};
  double origin = 0.0;  // left edge of cell 0
  for (int i = 0; i < n; ++i) {
    const auto& p = f.particle(i);
    auto [lo, hi] = scaled_support(p, n);
    const double left = std::floor(lo / h) * h;
    const auto cells = static_cast<std::size_t>(std::ceil((hi - left) / h)) + 1;
    std::vector<double> part(cells);
    double prev = scaled_cdf(p, left, n);
    for (std::size_t c = 0; c < cells; ++c) {
      const double next = scaled_cdf(p, left + (c + 1) * h, n);
      part[c] = next - prev;
      prev = next;
    }
    std::vector<double> out(mass.size() + part.size() - 1, 0.0);
    for (std::size_t a = 0; a < mass.size(); ++a) {
      if (mass[a] == 0.0) continue;
      for (std::size_t b = 0; b < part.size(); ++b) out[a + b] += mass[a] * part[b];
    }
    mass = std::move(out);
    // Sum of two cells with left edges e1, e2 spans [e1 + e2, e1 + e2 + 2h];
    // assigning it to the cell at e1 + e2 + h/2 keeps the centroid.
    origin = (i == 0) ? left : origin + left + 0.5 * h;
  }

  std::vector<double> out(grid.count, 0.0);
  double inside = 0.0;
  for (double m : mass) inside += m;
  // Histogram density at cell centres origin + (c + 1/2) h, linear interpolation.
  for (std::size_t j = 0; j < grid.count; ++j) {
    const double u = (grid.node(j) - origin) / h - 0.5;
    if (u < 0 || u > static_cast<double>(mass.size() - 1)) continue;
    const auto c = static_cast<std::size_t>(u);
    const double frac = u - c;
    const double m = c + 1 < mass.size() ? (1 - frac) * mass[c] + frac * mass[c + 1] : mass[c];
    out[j] = m / h;
  }
  double outside = 0.0;
  for (std::size_t c = 0; c < mass.size(); ++c) {
    const double centre = origin + (c + 0.5) * h;
    if (centre < grid.origin || centre > grid.last()) outside += mass[c];
  }
  outside += std::max(0.0, 1.0 - inside);
  check_tail(outside, "com_density");
  return out;
}

std::vector<double> marginal_masses(const GridWave& wave, const EtaGrid& eta, double* outside) {
  std::vector<cplx> values(wave.amplitudes.size());
  std::transform(wave.amplitudes.begin(), wave.amplitudes.end(), values.begin(),
                 [](cplx a) { return cplx{std::norm(a), 0.0}; });
  auto binned = bin_to_eta(wave.grid, values, eta, outside);
  std::vector<double> density(binned.size());
  std::transform(binned.begin(), binned.end(), density.begin(), [](cplx c) { return c.real(); });
  return density;
}

void require_dims(const GridWave& wave, int n) {
  if (static_cast<int>(wave.grid.dims()) != n) {
    throw Error(ErrorCode::InvalidArgument, "grid wave dimension differs from particle count n");
  }
}

}  // namespace

EtaGrid EtaGrid::covering(double lo, double hi, std::size_t count) {
  if (count < 2 || !(hi > lo)) throw Error(ErrorCode::InvalidArgument, "eta grid needs count >= 2 and hi > lo");
  return EtaGrid{lo, (hi - lo) / static_cast<double>(count - 1), count};
}

cplx particle_characteristic(const ParticleDensity& density, double u) {
  return std::visit(overloaded{
                        [u](const Gaussian& g) { return std::polar(std::exp(-0.5 * g.std * g.std * u * u), u * g.mean); },
                        [u](const Box& b) { return sinc(u * b.halfwidth) * std::polar(1.0, u * b.center); },
                        [u](const Cauchy& c) { return std::polar(std::exp(-c.scale * std::abs(u)), u * c.location); },
                        [u](const Delta& d) { return std::polar(1.0, u * d.location); },
                    },
                    density);
}

std::vector<double> com_density(const EnvState& env, const EtaGrid& grid, int n) {
  if (grid.count < 2 || !(grid.spacing > 0)) throw Error(ErrorCode::InvalidArgument, "eta grid must be uniform with >= 2 nodes");
  require_no_delta(env);
  if (!env.is_product()) {
    require_dims(env.wave(), n);
    double outside = 0.0;
    auto density = marginal_masses(env.wave(), grid, &outside);
    check_tail(outside, "com_density");
    return density;
  }
  const auto& family = env.product();
  if (auto closed = closed_form_eta(family, n)) {
    const double outside = scaled_cdf(*closed, grid.origin, 1) + (1.0 - scaled_cdf(*closed, grid.last(), 1));
    check_tail(outside, "com_density");
    std::vector<double> out(grid.count);
    for (std::size_t j = 0; j < grid.count; ++j) out[j] = pdf(*closed, grid.node(j));
    return out;
  }
  return convolved_density(family, n, grid);
}

cplx characteristic(const EnvState& env, double z, int n) {
  const double zs[] = {z};
  return characteristic(env, zs, n).front();
}

std::vector<cplx> characteristic(const EnvState& env, std::span<const double> zs, int n) {
  std::vector<cplx> out(zs.size());
  if (env.is_product()) {
    const auto& family = env.product();
    for (std::size_t j = 0; j < zs.size(); ++j) {
      if (zs[j] == 0.0) {
        out[j] = 1.0;
        continue;
      }
      cplx f = 1.0;
      for (int i = 0; i < n; ++i) f *= particle_characteristic(family.particle(i), zs[j] / n);
      out[j] = f;
    }
    return out;
  }
  const auto& wave = env.wave();
  require_dims(wave, n);
  const EtaGrid eta = native_eta_grid(wave.grid);
  const auto density = marginal_masses(wave, eta, nullptr);
  std::vector<cplx> values(density.begin(), density.end());
  for (std::size_t j = 0; j < zs.size(); ++j) out[j] = zs[j] == 0.0 ? cplx{1.0} : fourier_trapezoid(values, eta, zs[j]);
  return out;
}

ComMoments moments(const EnvState& env, int n) {
  if (env.is_product()) {
    const auto& family = env.product();
    ComMoments m;
    for (int i = 0; i < n; ++i) {
      std::visit(overloaded{
                     [&](const Gaussian& g) {
                       m.mean += g.mean;
                       m.variance += g.std * g.std;
                     },
                     [&](const Box& b) {
                       m.mean += b.center;
                       m.variance += b.halfwidth * b.halfwidth / 3.0;
                     },
                     [&](const Cauchy& c) {
                       m.mean += c.location;
                       m.finite = false;
                     },
                     [&](const Delta& d) { m.mean += d.location; },
                 },
                 family.particle(i));
    }
    m.mean /= n;
    m.variance /= static_cast<double>(n) * n;
    if (!m.finite) {
      m.mean = std::numeric_limits<double>::quiet_NaN();
      m.variance = std::numeric_limits<double>::infinity();
    }
    return m;
  }
  const auto& wave = env.wave();
  require_dims(wave, n);
  const EtaGrid eta = native_eta_grid(wave.grid);
  const auto density = marginal_masses(wave, eta, nullptr);
  double mass = 0, first = 0;
  for (std::size_t j = 0; j < density.size(); ++j) {
    mass += density[j];
    first += density[j] * eta.node(j);
  }
  const double mean = first / mass;
  double second = 0;
  for (std::size_t j = 0; j < density.size(); ++j) {
    const double d = eta.node(j) - mean;
    second += density[j] * d * d;
  }
  return ComMoments{mean, second / mass, true};
}

EtaGrid native_eta_grid(const UniformGrid& grid) {
  std::size_t steps = 0;
  for (auto c : grid.counts) steps += c - 1;
  return EtaGrid{grid.origin, grid.spacing / static_cast<double>(grid.dims()), steps + 1};
}

std::vector<cplx> bin_to_eta(const UniformGrid& grid, std::span<const cplx> node_values, const EtaGrid& eta,
                             double* outside) {
  if (node_values.size() != grid.size()) throw Error(ErrorCode::InvalidArgument, "node value count differs from grid size");
  std::vector<cplx> out(eta.count, 0.0);
  const double n = static_cast<double>(grid.dims());
  const double dv = grid.cell_volume();
  const double step = grid.spacing / n;
  double lost = 0.0;
  const double last = static_cast<double>(eta.count - 1);
  detail::walk_index_sums(grid, [&](std::size_t flat, std::size_t sum) {
    const cplx mass = node_values[flat] * dv;
    // eta of this node is grid.origin + sum * spacing / n.
    const double u = (grid.origin - eta.origin + static_cast<double>(sum) * step) / eta.spacing;
    const double r = std::round(u);
    if (std::abs(u - r) < 1e-9) {
      if (r < 0 || r > last) {
        lost += std::abs(mass);
      } else {
        out[static_cast<std::size_t>(r)] += mass;
      }
      return;
    }
    const double fl = std::floor(u);
    const double frac = u - fl;
    if (fl < 0 || fl + 1 > last) {
      if (fl >= 0 && fl <= last) {
        out[static_cast<std::size_t>(fl)] += (1 - frac) * mass;
        lost += frac * std::abs(mass);
      } else if (fl + 1 >= 0 && fl + 1 <= last) {
        out[static_cast<std::size_t>(fl + 1)] += frac * mass;
        lost += (1 - frac) * std::abs(mass);
      } else {
        lost += std::abs(mass);
      }
      return;
    }
    const auto j = static_cast<std::size_t>(fl);
    out[j] += (1 - frac) * mass;
    out[j + 1] += frac * mass;
  });
  for (auto& v : out) v /= eta.spacing;
  if (outside) *outside = lost;
  return out;
}

cplx fourier_trapezoid(std::span<const cplx> values, const EtaGrid& grid, double z) {
  if (values.size() != grid.count || grid.count < 2) throw Error(ErrorCode::InvalidArgument, "sample count differs from eta grid");
  double peak = 0.0;
  for (const auto& v : values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  const double ends = std::max(std::abs(values.front()), std::abs(values.back()));
  if (ends > kEndpointRatio * peak) {
    std::ostringstream msg;
    msg << "integrand at grid ends is " << ends / peak << " of its maximum (limit " << kEndpointRatio << ")";
    throw Error(ErrorCode::QuadratureTail, msg.str());
  }
  cplx sum = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double weight = (j == 0 || j + 1 == values.size()) ? 0.5 : 1.0;
    sum += weight * values[j] * std::polar(1.0, z * grid.node(j));
  }
  return sum * grid.spacing;
}

OverlapDensity overlap_density(const EntangledState& state, double xa, double xb, const EtaGrid& grid) {
  const auto& a = state.slices.at(state.slice_index(xa));
  const auto& b = state.slices.at(state.slice_index(xb));
  if (!(a.grid == b.grid)) throw Error(ErrorCode::InvalidArgument, "slices do not share one grid");
  const std::size_t size = a.amplitudes.size();
  std::vector<cplx> cross(size), da(size), db(size);
  for (std::size_t j = 0; j < size; ++j) {
    cross[j] = a.amplitudes[j] * std::conj(b.amplitudes[j]);
    da[j] = std::norm(a.amplitudes[j]);
    db[j] = std::norm(b.amplitudes[j]);
  }
  OverlapDensity out{grid, bin_to_eta(a.grid, cross, grid), {}, {}};
  auto real_part = [](const std::vector<cplx>& v) {
    std::vector<double> r(v.size());
    std::transform(v.begin(), v.end(), r.begin(), [](cplx c) { return c.real(); });
    return r;
  };
  out.diag_a = real_part(bin_to_eta(a.grid, da, grid));
  out.diag_b = real_part(bin_to_eta(a.grid, db, grid));
  return out;
}

OverlapDensity overlap_density(const EntangledState& state, double xa, double xb) {
  return overlap_density(state, xa, xb, native_eta_grid(state.slices.at(0).grid));
}

}  // namespace decoh
