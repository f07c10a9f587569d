#pragma once

// Centre-of-mass statistics of the environment: the density w(eta) of
// eta = sum x_i / n, its moments, its characteristic function
//
//     f(z) = integral d eta  exp(+i z eta) w(eta),
//
// and, for entangled states, the overlap density w_{X'X''}(eta).
//
// The exp(+i z eta) sign is used everywhere in this library, including the
// oracle comparisons in the tests.
//
// Naming note: `ComMoments::variance` is the mean square deviation of eta.
// The short-time law 1 - variance * z^2 / 2 needs the variance (a length^2),
// not the standard deviation.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "decoh/model.hpp"

namespace decoh {

/// Uniform grid in eta: node j at origin + j * spacing.
struct EtaGrid {
  double origin = 0.0;
  double spacing = 1.0;
  std::size_t count = 0;

  double node(std::size_t j) const { return origin + static_cast<double>(j) * spacing; }
  double last() const { return node(count - 1); }
  static EtaGrid covering(double lo, double hi, std::size_t count);
};

struct ComMoments {
  double mean = 0.0;
  double variance = 0.0;
  bool finite = true;  ///< false when the variance does not exist (Cauchy)
};

struct OverlapDensity {
  EtaGrid grid;
  std::vector<cplx> cross;     ///< w_{X'X''}
  std::vector<double> diag_a;  ///< w_{X'X'}
  std::vector<double> diag_b;  ///< w_{X''X''}
};

/// Closed-form characteristic function of one particle density at argument u.
cplx particle_characteristic(const ParticleDensity& density, double u);

/// Samples of w(eta) on `grid`. Throws DeltaUnsupported for point masses,
/// GridTooNarrow when more than 1e-4 of the mass lies outside the grid.
std::vector<double> com_density(const EnvState& env, const EtaGrid& grid, int n);

/// f(z). Product families use prod_i phi_i(z / n); grid waves are marginalized
/// onto their native eta lattice and integrated by the trapezoid rule.
cplx characteristic(const EnvState& env, double z, int n);
std::vector<cplx> characteristic(const EnvState& env, std::span<const double> zs, int n);

ComMoments moments(const EnvState& env, int n);

/// Lattice on which eta = sum x_i / n of a grid's nodes falls exactly
/// (spacing = grid spacing / n).
EtaGrid native_eta_grid(const UniformGrid& grid);

/// Bins per-node values into `eta` with linear (cloud-in-cell) weights and
/// returns densities, i.e. binned value * cell volume / eta spacing. `outside`
/// receives the summed |value| * cell volume that fell off the eta grid.
std::vector<cplx> bin_to_eta(const UniformGrid& grid, std::span<const cplx> node_values, const EtaGrid& eta,
                             double* outside = nullptr);

/// Trapezoid rule for integral d eta exp(+i z eta) v(eta). Throws QuadratureTail
/// when |v| at either end exceeds 1e-8 of its maximum.
cplx fourier_trapezoid(std::span<const cplx> values, const EtaGrid& grid, double z);

OverlapDensity overlap_density(const EntangledState& state, double xa, double xb, const EtaGrid& grid);
/// Same, on the state's native eta lattice (exact binning).
OverlapDensity overlap_density(const EntangledState& state, double xa, double xb);

}  // namespace decoh
