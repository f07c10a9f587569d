#include "decoh/rdm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "decoh/error.hpp"

namespace decoh {

namespace {

void require_kind(const Coupling& coupling, CouplingKind kind, const char* op) {
  if (coupling.kind != kind) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(op) + " requires " + to_string(kind) + " coupling, got " + to_string(coupling.kind));
  }
}

RdmElement assemble(cplx amp_a, cplx amp_b, cplx f_minus_z, double phi, double z) {
  RdmElement e;
  e.modulus = std::abs(amp_a) * std::abs(amp_b) * std::abs(f_minus_z);
  e.value = amp_a * std::conj(amp_b) * f_minus_z * std::polar(1.0, phi);
  e.phase_exponent = phi;
  e.transform_arg = z;
  return e;
}

RdmElement factorized(const BodyAmplitude& amp, const EnvState& env, double a, double b, double t,
                      const PhysConsts& consts, const Coupling& coupling) {
  const double z = transform_arg(coupling, a, b, t, consts);
  const cplx f = characteristic(env, -z, consts.n);
  return assemble(amp(a), amp(b), f, phase_exponent(coupling, a, b, t, consts), z);
}

struct LineFit {
  double slope = 0.0;
  double rss = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double count = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  const double intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - intercept - fit.slope * x[i];
    fit.rss += r * r;
  }
  return fit;
}

}  // namespace

double transform_arg(const Coupling& coupling, double a, double b, double t, const PhysConsts& consts) {
  return consts.n * coupling.strength() * (a - b) * t / consts.hbar;
}

double phase_exponent(const Coupling& coupling, double a, double b, double t, const PhysConsts& consts) {
  const double n = consts.n;
  double phi = -n * consts.alpha * coupling.strength() * (a - b) * t * t / (2.0 * consts.hbar);
  switch (coupling.kind) {
    case CouplingKind::HC:
      phi += *coupling.k * n * (a * a - b * b) * t / (2.0 * consts.hbar);
      break;
    case CouplingKind::MHC:
      phi += n * (a * a - b * b) * t / (2.0 * *coupling.mu * consts.hbar);
      break;
    default:
      break;
  }
  return phi;
}

RdmElement rdm_sc(const BodyAmplitude& psi, const EnvState& env, double xa, double xb, double t,
                  const PhysConsts& consts, const Coupling& coupling) {
  require_kind(coupling, CouplingKind::SC, "rdm_sc");
  return factorized(psi, env, xa, xb, t, consts, coupling);
}

RdmElement rdm_mc(const BodyAmplitude& psi_tilde, const EnvState& env, double pa, double pb, double t,
                  const PhysConsts& consts, const Coupling& coupling) {
  require_kind(coupling, CouplingKind::MC, "rdm_mc");
  return factorized(psi_tilde, env, pa, pb, t, consts, coupling);
}

RdmElement rdm_hc(const BodyAmplitude& psi, const EnvState& env, double xa, double xb, double t,
                  const PhysConsts& consts, const Coupling& coupling) {
  require_kind(coupling, CouplingKind::HC, "rdm_hc");
  return factorized(psi, env, xa, xb, t, consts, coupling);
}

RdmElement rdm_mhc(const BodyAmplitude& psi_tilde, const EnvState& env, double pa, double pb, double t,
                   const PhysConsts& consts, const Coupling& coupling) {
  require_kind(coupling, CouplingKind::MHC, "rdm_mhc");
  return factorized(psi_tilde, env, pa, pb, t, consts, coupling);
}

RdmElement rdm_element(const BodyAmplitude& amp, const EnvState& env, double a, double b, double t,
                       const PhysConsts& consts, const Coupling& coupling) {
  return factorized(amp, env, a, b, t, consts, coupling);
}

RdmElement rdm_entangled(const EntangledState& state, double xa, double xb, double t, const PhysConsts& consts,
                         const Coupling& coupling) {
  if (!coupling.position_basis()) {
    throw Error(ErrorCode::InvalidArgument, "entangled elements are defined for position couplings (SC, HC)");
  }
  const auto density = overlap_density(state, xa, xb);
  const double z = transform_arg(coupling, xa, xb, t, consts);
  const cplx g = fourier_trapezoid(density.cross, density.grid, -z);
  return assemble(1.0, 1.0, g, phase_exponent(coupling, xa, xb, t, consts), z);
}

double short_time_modulus(const EnvState& env, double z, int n) {
  const auto m = moments(env, n);
  if (!m.finite) throw Error(ErrorCode::NonFiniteVariance, "centre-of-mass variance does not exist");
  return 1.0 - m.variance * z * z / 2.0;
}

double timescale(double hbar, double n, double coupling_constant, double separation, double delta_eta) {
  return hbar / (n * std::abs(coupling_constant * separation) * delta_eta);
}

TimescaleReport decoherence_time(const Coupling& coupling, double separation, const EnvState& env,
                                 const PhysConsts& consts) {
  if (separation == 0.0) throw Error(ErrorCode::ZeroSeparation, "separation must be nonzero");
  const auto m = moments(env, consts.n);
  if (!m.finite) throw Error(ErrorCode::NonFiniteVariance, "centre-of-mass variance does not exist");
  if (m.variance <= 0.0) throw Error(ErrorCode::ZeroVariance, "centre-of-mass width is zero; modulus never decays");
  TimescaleReport r;
  r.n = consts.n;
  r.coupling_constant = coupling.strength();
  r.separation = separation;
  r.delta_eta = std::sqrt(m.variance);
  r.hbar = consts.hbar;
  r.tau = timescale(consts.hbar, consts.n, r.coupling_constant, separation, r.delta_eta);
  return r;
}

double box_first_zero_time(const Coupling& coupling, double separation, double halfwidth, const PhysConsts& consts) {
  return std::numbers::pi * consts.hbar / (consts.n * std::abs(coupling.strength() * separation) * halfwidth);
}

double box_limit_modulus(const Coupling& coupling, double separation, double halfwidth, double t,
                         const PhysConsts& consts) {
  const double x = transform_arg(coupling, separation, 0.0, t, consts) * halfwidth;
  return x == 0.0 ? 1.0 : std::abs(std::sin(x) / x);
}

DecoherenceCurve curve(const ElementQuery& query, std::span<const double> times) {
  if (times.empty()) throw Error(ErrorCode::InvalidArgument, "time grid is empty");
  for (std::size_t j = 1; j < times.size(); ++j) {
    if (!(times[j] > times[j - 1])) throw Error(ErrorCode::InvalidArgument, "time grid must be strictly increasing");
  }
  DecoherenceCurve out{{times.begin(), times.end()}, {}, query};
  std::vector<double> minus_z(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    minus_z[j] = -transform_arg(query.coupling, query.a, query.b, times[j], query.consts);
  }
  const auto f = characteristic(query.env, minus_z, query.consts.n);
  const cplx amp_a = query.body(query.a);
  const cplx amp_b = query.body(query.b);
  out.elements.reserve(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    out.elements.push_back(assemble(amp_a, amp_b, f[j],
                                    phase_exponent(query.coupling, query.a, query.b, times[j], query.consts),
                                    -minus_z[j]));
  }
  return out;
}

std::string to_string(DecayModel model) {
  switch (model) {
    case DecayModel::Power: return "power";
    case DecayModel::Exponential: return "exponential";
    case DecayModel::Gaussian: return "gaussian";
  }
  return "?";
}

DecayFit decay_fit(const DecoherenceCurve& curve, const DecayWindow& window) {
  std::vector<std::pair<double, double>> samples;
  for (const auto& e : curve.elements) {
    const double z = std::abs(e.transform_arg);
    if (z > 0.0 && z >= window.zmin && z <= window.zmax) samples.emplace_back(z, e.modulus);
  }
  std::sort(samples.begin(), samples.end());

  DecayFit fit;
  bool monotone = true;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].second > samples[i - 1].second * (1 + 1e-12)) {
      monotone = false;
      break;
    }
  }
  std::vector<std::pair<double, double>> points;
  if (monotone) {
    points = samples;
  } else {
    fit.envelope = true;
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
      if (samples[i].second > samples[i - 1].second && samples[i].second >= samples[i + 1].second) {
        points.push_back(samples[i]);
      }
    }
  }
  std::vector<double> log_z, z, z2, log_m;
  for (const auto& [zv, m] : points) {
    if (!(m > 0.0) || !std::isfinite(std::log(m))) continue;
    log_z.push_back(std::log(zv));
    z.push_back(zv);
    z2.push_back(zv * zv);
    log_m.push_back(std::log(m));
  }
  fit.points = log_m.size();
  if (fit.points < 8) {
    std::ostringstream msg;
    msg << "decay fit needs at least 8 " << (fit.envelope ? "envelope maxima" : "samples") << " in the window, found "
        << fit.points;
    throw Error(ErrorCode::InsufficientSamples, msg.str());
  }
  const auto power = least_squares(log_z, log_m);
  const auto expo = least_squares(z, log_m);
  const auto gauss = least_squares(z2, log_m);
  fit.order = -power.slope;
  fit.rss_power = power.rss;
  fit.rss_exponential = expo.rss;
  fit.rss_gaussian = gauss.rss;
  fit.model = DecayModel::Power;
  fit.log_slope = power.slope;
  if (expo.rss < power.rss && expo.rss <= gauss.rss) {
    fit.model = DecayModel::Exponential;
    fit.log_slope = expo.slope;
  } else if (gauss.rss < power.rss && gauss.rss < expo.rss) {
    fit.model = DecayModel::Gaussian;
    fit.log_slope = gauss.slope;
  }
  fit.rate = -fit.log_slope;
  return fit;
}

}  // namespace decoh
