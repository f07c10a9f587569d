#include "decoh/oracle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "decoh/comdist.hpp"
#include "decoh/error.hpp"
#include "grid_walk.hpp"

namespace decoh::oracle {

namespace {

constexpr double kCourantMass = 1e-6;
constexpr double kNormDrift = 1e-8;
constexpr double kSampleTail = 1e-6;

// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPair {
 public:
  FftPair(const std::vector<std::size_t>& counts, std::vector<cplx>& data) {
    std::vector<int> dims(counts.begin(), counts.end());
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), ptr, ptr, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), ptr, ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftPair() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  FftPair(const FftPair&) = delete;
  FftPair& operator=(const FftPair&) = delete;

  void forward() const { fftw_execute(forward_); }
  void backward() const { fftw_execute(backward_); }

 private:
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Multiplies data by prod_axis factors[axis][index_axis].
void apply_separable(std::vector<cplx>& data, const std::vector<std::size_t>& counts,
                     const std::vector<std::vector<cplx>>& factors) {
  switch (counts.size()) {
    case 1:
      for (std::size_t i = 0; i < counts[0]; ++i) data[i] *= factors[0][i];
      return;
    case 2: {
      std::size_t flat = 0;
      for (std::size_t i = 0; i < counts[0]; ++i) {
        const cplx fi = factors[0][i];
        for (std::size_t j = 0; j < counts[1]; ++j) data[flat++] *= fi * factors[1][j];
      }
      return;
    }
    case 3: {
      std::size_t flat = 0;
      for (std::size_t i = 0; i < counts[0]; ++i) {
        for (std::size_t j = 0; j < counts[1]; ++j) {
          const cplx fij = factors[0][i] * factors[1][j];
          for (std::size_t l = 0; l < counts[2]; ++l) data[flat++] *= fij * factors[2][l];
        }
      }
      return;
    }
    default:
      throw Error(ErrorCode::Unsupported, "oracle grids have 1 to 3 dimensions");
  }
}

double norm_squared(const std::vector<cplx>& amps, const UniformGrid& grid) {
  double sum = 0.0;
  for (const auto& a : amps) sum += std::norm(a);
  return sum * grid.cell_volume();
}

// Diagonal one-particle term u(x) = v(x) + g c x + q x^2.
struct DiagonalTerm {
  double linear = 0.0;
  double quadratic = 0.0;
  const Potential* v = nullptr;

  double operator()(double x) const {
    double u = linear * x + quadratic * x * x;
    if (v && *v) u += (*v)(x);
    return u;
  }
  bool nonlinear() const { return quadratic != 0.0 || (v && *v); }
};

DiagonalTerm diagonal_term(const Coupling& coupling, double condition, const Potential& v) {
  if (coupling.kind == CouplingKind::MHC) {
    throw Error(ErrorCode::Unsupported, "the oracle does not evolve the MHC coupling");
  }
  DiagonalTerm term;
  term.linear = coupling.strength() * condition;
  if (coupling.kind == CouplingKind::HC) term.quadratic = -0.5 * *coupling.k;
  term.v = &v;
  return term;
}

void check_courant(const ConditionedWave& phi0, double shift) {
  const auto& grid = phi0.grid;
  const double cells = shift / grid.spacing;
  double violating = 0.0;
  detail::walk_indices(grid, [&](std::size_t flat, const std::vector<std::size_t>& idx) {
    const double mass = std::norm(phi0.amplitudes[flat]);
    if (mass == 0.0) return;
    for (std::size_t axis = 0; axis < idx.size(); ++axis) {
      const auto count = grid.counts[axis];
      const double band = static_cast<double>(std::max<std::size_t>(2, count / 32));
      const double target = static_cast<double>(idx[axis]) + cells;
      if (target < band || target > static_cast<double>(count - 1) - band) {
        violating += mass;
        return;
      }
    }
  });
  violating *= grid.cell_volume();
  if (violating > kCourantMass) {
    std::ostringstream msg;
    msg << "translation by alpha*t = " << shift << " carries mass " << violating
        << " into the boundary band; enlarge the grid";
    throw Error(ErrorCode::CourantViolation, msg.str());
  }
}

double scaled_cdf(const ParticleDensity& p, double x) {
  if (const auto* g = std::get_if<Gaussian>(&p)) return 0.5 * std::erfc(-(x - g->mean) / (g->std * std::numbers::sqrt2));
  if (const auto* b = std::get_if<Box>(&p)) return std::clamp((x - b->center + b->halfwidth) / (2 * b->halfwidth), 0.0, 1.0);
  if (const auto* c = std::get_if<Cauchy>(&p)) return 0.5 + std::atan((x - c->location) / c->scale) / std::numbers::pi;
  throw Error(ErrorCode::DeltaUnsupported, "point mass cannot be sampled");
}

double amplitude_1d(const ParticleDensity& p, double x) {
  if (const auto* g = std::get_if<Gaussian>(&p)) {
    const double u = (x - g->mean) / g->std;
    return std::sqrt(std::exp(-0.5 * u * u) / (g->std * std::sqrt(2 * std::numbers::pi)));
  }
  if (const auto* b = std::get_if<Box>(&p)) return std::abs(x - b->center) < b->halfwidth ? std::sqrt(0.5 / b->halfwidth) : 0.0;
  if (const auto* c = std::get_if<Cauchy>(&p)) {
    const double u = (x - c->location) / c->scale;
    return std::sqrt(1.0 / (std::numbers::pi * c->scale * (1 + u * u)));
  }
  throw Error(ErrorCode::DeltaUnsupported, "point mass cannot be sampled");
}

}  // namespace

void validate_grid(const UniformGrid& grid) {
  std::vector<std::string> failures;
  if (grid.dims() < 1 || grid.dims() > 3) failures.emplace_back("1 <= dimensions <= 3");
  for (auto c : grid.counts) {
    if (!is_power_of_two(c) || c < 64) {
      failures.emplace_back("point count per dimension is a power of two >= 64");
      break;
    }
  }
  if (grid.size() > (std::size_t{1} << 24)) failures.emplace_back("total points <= 2^24");
  if (!(grid.spacing > 0) || !std::isfinite(grid.spacing)) failures.emplace_back("spacing > 0");
  if (!std::isfinite(grid.origin)) failures.emplace_back("origin finite");
  if (!failures.empty()) {
    std::string msg;
    for (const auto& f : failures) msg += (msg.empty() ? "" : "; ") + f;
    throw Error(ErrorCode::InvalidArgument, msg);
  }
}

std::size_t step_count(const UniformGrid& grid, double condition, double t, const PhysConsts& consts,
                       const Coupling& coupling, const Potential& v, const StepControl& control) {
  if (t == 0.0) return 0;
  const auto term = diagonal_term(coupling, condition, v);
  if (control.fixed_step > 0.0) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::abs(t) / control.fixed_step - 1e-12)));
  }
  std::size_t steps = 1;
  if (term.nonlinear() || !control.exact_when_free) {
    double umax = 0.0;
    for (std::size_t axis = 0; axis < grid.dims(); ++axis) {
      double axis_max = 0.0;
      for (std::size_t j = 0; j < grid.counts[axis]; ++j) axis_max = std::max(axis_max, std::abs(term(grid.node(j))));
      umax += axis_max;
    }
    if (umax > 0.0) {
      const double h = (std::numbers::pi / 8) * consts.hbar / umax;
      steps = static_cast<std::size_t>(std::ceil(std::abs(t) / h));
    }
  }
  if (control.max_step > 0.0) {
    steps = std::max(steps, static_cast<std::size_t>(std::ceil(std::abs(t) / control.max_step - 1e-12)));
  }
  return std::max<std::size_t>(steps, 1);
}

ConditionedWave evolve_conditioned(const ConditionedWave& phi0, double t, const PhysConsts& consts,
                                   const Coupling& coupling, const Potential& v, const StepControl& control) {
  validate_grid(phi0.grid);
  if (phi0.amplitudes.size() != phi0.grid.size()) {
    throw Error(ErrorCode::InvalidArgument, "amplitude count differs from grid size");
  }
  if (static_cast<int>(phi0.grid.dims()) != consts.n) {
    throw Error(ErrorCode::InvalidArgument, "grid dimension differs from particle count n");
  }
  ConditionedWave out = phi0;
  out.time = phi0.time + t;
  const auto term = diagonal_term(coupling, phi0.condition, v);
  if (t == 0.0) return out;
  check_courant(phi0, consts.alpha * t);

  const auto& grid = phi0.grid;
  const std::size_t d = grid.dims();
  const std::size_t steps = step_count(grid, phi0.condition, t, consts, coupling, v, control);
  const double h = t / static_cast<double>(steps);

  std::vector<std::vector<cplx>> half(d), full(d), kinetic(d);
  for (std::size_t axis = 0; axis < d; ++axis) {
    const std::size_t count = grid.counts[axis];
    half[axis].resize(count);
    full[axis].resize(count);
    kinetic[axis].resize(count);
    for (std::size_t j = 0; j < count; ++j) {
      const double u = term(grid.node(j));
      half[axis][j] = std::polar(1.0, -0.5 * h * u / consts.hbar);
      full[axis][j] = std::polar(1.0, -h * u / consts.hbar);
      const double mode = j < count / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(count);
      const double wavenumber = 2 * std::numbers::pi * mode / (static_cast<double>(count) * grid.spacing);
      kinetic[axis][j] = std::polar(1.0, -h * consts.alpha * wavenumber);
    }
    // The unnormalized backward transform scales by count.
    const double scale = 1.0 / static_cast<double>(count);
    for (auto& k : kinetic[axis]) k *= scale;
  }

  const double norm0 = norm_squared(phi0.amplitudes, grid);
  auto& amps = out.amplitudes;
  {
    FftPair fft(grid.counts, amps);
    apply_separable(amps, grid.counts, half);
    for (std::size_t s = 0; s < steps; ++s) {
      fft.forward();
      apply_separable(amps, grid.counts, kinetic);
      fft.backward();
      apply_separable(amps, grid.counts, s + 1 == steps ? half : full);
    }
  }
  if (coupling.kind == CouplingKind::HC) {
    // c-number -k n X^2 / 2 of the harmonic coupling.
    const double c = phi0.condition;
    const cplx phase = std::polar(1.0, t * *coupling.k * consts.n * c * c / (2 * consts.hbar));
    for (auto& a : amps) a *= phase;
  }
  const double norm1 = norm_squared(amps, grid);
  if (std::abs(norm1 - norm0) > kNormDrift * std::max(norm0, 1e-300)) {
    std::ostringstream msg;
    msg << "norm changed from " << norm0 << " to " << norm1;
    throw Error(ErrorCode::NormDrift, msg.str());
  }
  return out;
}

GridWave sample_product(const EnvState& env, const UniformGrid& grid, int n) {
  if (!env.is_product()) return env.wave();
  validate_grid(grid);
  if (static_cast<int>(grid.dims()) != n) throw Error(ErrorCode::InvalidArgument, "grid dimension differs from n");
  if (env.has_delta()) throw Error(ErrorCode::DeltaUnsupported, "point mass cannot be sampled onto a grid");
  const auto& family = env.product();
  std::vector<std::vector<double>> axes(grid.dims());
  for (std::size_t axis = 0; axis < grid.dims(); ++axis) {
    const auto& p = family.particle(axis);
    const double lo = grid.node(0) - 0.5 * grid.spacing;
    const double hi = grid.node(grid.counts[axis] - 1) + 0.5 * grid.spacing;
    const double off = scaled_cdf(p, lo) + 1.0 - scaled_cdf(p, hi);
    if (off > kSampleTail) {
      std::ostringstream msg;
      msg << "particle " << axis << " (" << describe(p) << ") has mass " << off << " outside the grid";
      throw Error(ErrorCode::GridTooNarrow, msg.str());
    }
    axes[axis].resize(grid.counts[axis]);
    for (std::size_t j = 0; j < grid.counts[axis]; ++j) axes[axis][j] = amplitude_1d(p, grid.node(j));
  }
  GridWave wave{grid, std::vector<cplx>(grid.size())};
  detail::walk_indices(grid, [&](std::size_t flat, const std::vector<std::size_t>& idx) {
    double a = 1.0;
    for (std::size_t axis = 0; axis < idx.size(); ++axis) a *= axes[axis][idx[axis]];
    wave.amplitudes[flat] = a;
  });
  const double scale = 1.0 / std::sqrt(wave.norm_squared());
  for (auto& a : wave.amplitudes) a *= scale;
  return wave;
}

cplx inner_product(const GridWave& b, const GridWave& a) {
  if (!(a.grid == b.grid)) throw Error(ErrorCode::InvalidArgument, "inner product of waves on different grids");
  cplx sum = 0.0;
  for (std::size_t j = 0; j < a.amplitudes.size(); ++j) sum += std::conj(b.amplitudes[j]) * a.amplitudes[j];
  return sum * a.grid.cell_volume();
}

cplx inner_product(const ConditionedWave& b, const ConditionedWave& a) {
  return inner_product(GridWave{b.grid, b.amplitudes}, GridWave{a.grid, a.amplitudes});
}

double distance(const ConditionedWave& a, const ConditionedWave& b) {
  if (!(a.grid == b.grid)) throw Error(ErrorCode::InvalidArgument, "distance between waves on different grids");
  double sum = 0.0;
  for (std::size_t j = 0; j < a.amplitudes.size(); ++j) sum += std::norm(a.amplitudes[j] - b.amplitudes[j]);
  return std::sqrt(sum * a.grid.cell_volume());
}

cplx rdm_element_oracle(const BodyAmplitude& psi, const GridWave& phi0, double a, double b, double t,
                        const PhysConsts& consts, const Coupling& coupling, const Potential& v,
                        const StepControl& control) {
  const cplx weight = psi(a) * std::conj(psi(b));
  const auto wa = evolve_conditioned(ConditionedWave{phi0.grid, phi0.amplitudes, a, 0.0}, t, consts, coupling, v, control);
  if (a == b) return weight * inner_product(wa, wa);
  const auto wb = evolve_conditioned(ConditionedWave{phi0.grid, phi0.amplitudes, b, 0.0}, t, consts, coupling, v, control);
  return weight * inner_product(wb, wa);
}

cplx rdm_element_oracle_entangled(const EntangledState& state, double xa, double xb, double t,
                                  const PhysConsts& consts, const Coupling& coupling, const Potential& v,
                                  const StepControl& control) {
  if (!coupling.position_basis()) {
    throw Error(ErrorCode::InvalidArgument, "entangled elements are defined for position couplings (SC, HC)");
  }
  const auto& sa = state.slices.at(state.slice_index(xa));
  const auto& sb = state.slices.at(state.slice_index(xb));
  const auto wa = evolve_conditioned(ConditionedWave{sa.grid, sa.amplitudes, xa, 0.0}, t, consts, coupling, v, control);
  const auto wb = evolve_conditioned(ConditionedWave{sb.grid, sb.amplitudes, xb, 0.0}, t, consts, coupling, v, control);
  return inner_product(wb, wa);
}

VIndependence v_independence_check(const BodyAmplitude& psi, const GridWave& phi0, double a, double b, double t,
                                   const PhysConsts& consts, const Coupling& coupling, const Potential& v,
                                   const StepControl& control) {
  VIndependence r;
  r.modulus_v = std::abs(rdm_element_oracle(psi, phi0, a, b, t, consts, coupling, v, control));
  r.modulus_0 = std::abs(rdm_element_oracle(psi, phi0, a, b, t, consts, coupling, Potential{}, control));
  r.delta = std::abs(r.modulus_v - r.modulus_0);
  return r;
}

}  // namespace decoh::oracle
