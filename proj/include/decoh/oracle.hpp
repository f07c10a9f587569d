#pragma once

// Brute-force reference engine. Evolves the environment wavefunction
// conditioned on a fixed body value under
//
//     H(c) = alpha sum p_i + sum v(x_i) + g c sum x_i   (+ HC terms)
//
// on a periodic tensor grid with Strang split-step propagation, and forms
// reduced-matrix elements as explicit discrete inner products.
//
// The kinetic factor exp(-i dt alpha sum p_i / hbar) is applied exactly in
// momentum space (a rigid translation by alpha dt). Translated amplitude that
// would wrap around the periodic box is a hard error (CourantViolation).

#include <functional>
#include <vector>

#include "decoh/model.hpp"

namespace decoh::oracle {

/// Separable one-particle potential v(x); an empty function means v = 0.
using Potential = std::function<double(double)>;

/// Throws InvalidArgument unless: 1 <= dims <= 3, every count a power of two
/// and >= 64, total nodes <= 2^24, spacing > 0.
void validate_grid(const UniformGrid& grid);

struct StepControl {
  /// Upper bound on the step; 0 selects the default, which keeps the diagonal
  /// phase per step below pi/8 at the grid's extreme node.
  double max_step = 0.0;
  /// With v = 0 and a linear coupling one Strang step of length t is exact.
  bool exact_when_free = true;
  /// When > 0, exactly ceil(|t| / fixed_step) steps are taken and the other
  /// fields are ignored. Meant for convergence studies.
  double fixed_step = 0.0;
};

struct ConditionedWave {
  UniformGrid grid;
  std::vector<cplx> amplitudes;
  double condition = 0.0;  ///< body position X or momentum P
  double time = 0.0;
};

/// Number of Strang steps evolve_conditioned takes for this configuration.
std::size_t step_count(const UniformGrid& grid, double condition, double t, const PhysConsts& consts,
                       const Coupling& coupling, const Potential& v, const StepControl& control = {});

/// phi(t) = exp(-i t H(condition) / hbar) phi(0). Throws CourantViolation
/// when more than 1e-6 of the mass would be translated into the outer
/// N/32 nodes of any axis, NormDrift when the norm changes by more than 1e-8.
ConditionedWave evolve_conditioned(const ConditionedWave& phi0, double t, const PhysConsts& consts,
                                   const Coupling& coupling, const Potential& v, const StepControl& control = {});

/// Samples a product density as phi = prod_i sqrt(w_i(x_i)) and renormalizes
/// on the grid. Throws DeltaUnsupported, GridTooNarrow (> 1e-6 mass off grid).
GridWave sample_product(const EnvState& env, const UniformGrid& grid, int n);

/// sum conj(b) a times the cell volume.
cplx inner_product(const GridWave& b, const GridWave& a);
cplx inner_product(const ConditionedWave& b, const ConditionedWave& a);

/// ||a - b|| on the grid.
double distance(const ConditionedWave& a, const ConditionedWave& b);

/// psi(a) psi*(b) <phi_b(t) | phi_a(t)> for a factorized initial state.
cplx rdm_element_oracle(const BodyAmplitude& psi, const GridWave& phi0, double a, double b, double t,
                        const PhysConsts& consts, const Coupling& coupling, const Potential& v,
                        const StepControl& control = {});

/// <Phi_b(t) | Phi_a(t)> with each slice evolved under its own body position.
cplx rdm_element_oracle_entangled(const EntangledState& state, double xa, double xb, double t,
                                  const PhysConsts& consts, const Coupling& coupling, const Potential& v,
                                  const StepControl& control = {});

struct VIndependence {
  double modulus_v = 0.0;
  double modulus_0 = 0.0;
  double delta = 0.0;
};

VIndependence v_independence_check(const BodyAmplitude& psi, const GridWave& phi0, double a, double b, double t,
                                   const PhysConsts& consts, const Coupling& coupling, const Potential& v,
                                   const StepControl& control = {});

}  // namespace decoh::oracle
