#pragma once

// Closed-form reduced density matrix of the body.
//
// Conditioned on a body value c (position X for SC/HC, momentum P for MC/MHC)
// the environment evolves under H_e + g c sum x_i, with g = k or gamma. The
// commutator of the two terms is the c-number -i hbar n alpha g c, so the
// evolution factorizes exactly and
//
//     rho_{c'c''}(t) = a(c') a*(c'') exp(i phi) f(-z),
//     z   = n g (c' - c'') t / hbar,
//     phi = -n alpha g (c' - c'') t^2 / (2 hbar)  [+ coupling-specific term],
//
// with f the characteristic function of the centre-of-mass density (comdist).
// The extra terms are +k n (X'^2 - X''^2) t / (2 hbar) for HC and
// +n (P'^2 - P''^2) t / (2 mu hbar) for MHC. Signs follow exp(-i H t / hbar).

#include <span>
#include <string>
#include <vector>

#include "decoh/comdist.hpp"
#include "decoh/model.hpp"

namespace decoh {

struct RdmElement {
  cplx value;
  double modulus = 0.0;
  double phase_exponent = 0.0;  ///< phi in radians, as applied
  double transform_arg = 0.0;   ///< z (position couplings) or y (momentum couplings)
};

/// z = n k (a - b) t / hbar for SC/HC, y = n gamma (a - b) t / hbar for MC/MHC.
double transform_arg(const Coupling& coupling, double a, double b, double t, const PhysConsts& consts);

/// phi for a factorized or entangled element (see header comment).
double phase_exponent(const Coupling& coupling, double a, double b, double t, const PhysConsts& consts);

RdmElement rdm_sc(const BodyAmplitude& psi, const EnvState& env, double xa, double xb, double t,
                  const PhysConsts& consts, const Coupling& coupling);
RdmElement rdm_mc(const BodyAmplitude& psi_tilde, const EnvState& env, double pa, double pb, double t,
                  const PhysConsts& consts, const Coupling& coupling);
RdmElement rdm_hc(const BodyAmplitude& psi, const EnvState& env, double xa, double xb, double t,
                  const PhysConsts& consts, const Coupling& coupling);
RdmElement rdm_mhc(const BodyAmplitude& psi_tilde, const EnvState& env, double pa, double pb, double t,
                   const PhysConsts& consts, const Coupling& coupling);

/// Dispatches on coupling.kind.
RdmElement rdm_element(const BodyAmplitude& amp, const EnvState& env, double a, double b, double t,
                       const PhysConsts& consts, const Coupling& coupling);

/// Entangled initial state, SC or HC coupling: exp(i phi) g(-z) with g the
/// trapezoid Fourier transform of the overlap density on the native eta lattice.
RdmElement rdm_entangled(const EntangledState& state, double xa, double xb, double t, const PhysConsts& consts,
                         const Coupling& coupling);

/// Short-time expansion 1 - variance z^2 / 2. Only meaningful for variance z^2 << 1;
/// the value is returned unclamped and may be negative outside that domain.
double short_time_modulus(const EnvState& env, double z, int n);

struct TimescaleReport {
  double tau = 0.0;
  int n = 1;
  double coupling_constant = 0.0;
  double separation = 0.0;
  double delta_eta = 0.0;  ///< sqrt(variance of eta)
  double hbar = 1.0;
};

/// hbar / (n |g separation| delta_eta).
double timescale(double hbar, double n, double coupling_constant, double separation, double delta_eta);

/// tau = hbar / (n g |separation| delta_eta).
TimescaleReport decoherence_time(const Coupling& coupling, double separation, const EnvState& env,
                                 const PhysConsts& consts);

/// Time of the first zero of the box-density sinc, pi hbar / (n g |a - b| L).
/// Tends to zero as L grows: the plane-wave limit decoheres immediately.
double box_first_zero_time(const Coupling& coupling, double separation, double halfwidth, const PhysConsts& consts);

/// |sin(zL)/(zL)| for a single-particle box of half-width L at time t.
double box_limit_modulus(const Coupling& coupling, double separation, double halfwidth, double t,
                         const PhysConsts& consts);

struct ElementQuery {
  BodyAmplitude body;
  EnvState env;
  double a = 0.0;
  double b = 0.0;
  PhysConsts consts;
  Coupling coupling;
};

struct DecoherenceCurve {
  std::vector<double> times;
  std::vector<RdmElement> elements;
  ElementQuery query;
};

/// Evaluates one element per time. Times must be nonempty and strictly increasing.
DecoherenceCurve curve(const ElementQuery& query, std::span<const double> times);

enum class DecayModel { Power, Exponential, Gaussian };
std::string to_string(DecayModel model);

struct DecayWindow {
  double zmin = 0.0;
  double zmax = 0.0;
};

struct DecayFit {
  DecayModel model = DecayModel::Power;
  double order = 0.0;      ///< fitted m in |rho| ~ z^-m (power model, always reported)
  double log_slope = 0.0;  ///< slope of log|rho| against the chosen model's abscissa
  double rate = 0.0;       ///< -log_slope: m, exponential rate, or gaussian coefficient
  double rss_power = 0.0;
  double rss_exponential = 0.0;
  double rss_gaussian = 0.0;
  std::size_t points = 0;
  bool envelope = false;   ///< fitted on local maxima of an oscillating modulus
};

/// Least-squares fits of log|rho| against log|z|, |z| and z^2 over the window;
/// picks the model with the smallest residual. Oscillating curves are reduced
/// to their local maxima first. Throws InsufficientSamples below 8 points.
DecayFit decay_fit(const DecoherenceCurve& curve, const DecayWindow& window);

}  // namespace decoh
