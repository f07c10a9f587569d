#include "decoh/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "decoh/error.hpp"

namespace decoh {

namespace {

constexpr double kNormTol = 1e-10;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require(ValidationReport& report, bool condition, const std::string& invariant) {
  if (!condition) report.failures.push_back(invariant);
}

void append(ValidationReport& into, const ValidationReport& from) {
  into.failures.insert(into.failures.end(), from.failures.begin(), from.failures.end());
}

void check_grid(ValidationReport& report, const UniformGrid& grid, int n) {
  require(report, static_cast<int>(grid.dims()) == n, "grid dimensions == n");
  require(report, std::isfinite(grid.spacing) && grid.spacing > 0, "grid spacing > 0");
  require(report, std::isfinite(grid.origin), "grid origin finite");
  require(report, std::all_of(grid.counts.begin(), grid.counts.end(), [](std::size_t c) { return c >= 2; }),
          "grid count >= 2 per dimension");
}

void check_wave(ValidationReport& report, const GridWave& wave, int n, bool require_unit_norm) {
  check_grid(report, wave.grid, n);
  if (!report.ok()) return;
  require(report, wave.amplitudes.size() == wave.grid.size(), "amplitude count matches grid");
  if (!report.ok()) return;
  require(report,
          std::all_of(wave.amplitudes.begin(), wave.amplitudes.end(),
                      [](cplx a) { return std::isfinite(a.real()) && std::isfinite(a.imag()); }),
          "amplitudes finite");
  if (require_unit_norm) {
    require(report, std::abs(wave.norm_squared() - 1.0) <= kNormTol, "GridWave norm == 1");
  }
}

}  // namespace

std::string to_string(CouplingKind kind) {
  switch (kind) {
    case CouplingKind::SC: return "SC";
    case CouplingKind::MC: return "MC";
    case CouplingKind::HC: return "HC";
    case CouplingKind::MHC: return "MHC";
  }
  return "?";
}

std::optional<CouplingKind> parse_coupling_kind(const std::string& text) {
  std::string upper = text;
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "SC") return CouplingKind::SC;
  if (upper == "MC") return CouplingKind::MC;
  if (upper == "HC") return CouplingKind::HC;
  if (upper == "MHC") return CouplingKind::MHC;
  return std::nullopt;
}

Coupling Coupling::sc(double k) { return Coupling{CouplingKind::SC, k, {}, {}, {}}; }
Coupling Coupling::mc(double gamma) { return Coupling{CouplingKind::MC, {}, gamma, {}, {}}; }
Coupling Coupling::hc(double k) { return Coupling{CouplingKind::HC, k, {}, {}, {}}; }
Coupling Coupling::mhc(double mu, double nu) { return Coupling{CouplingKind::MHC, {}, nu / mu, mu, nu}; }

double Coupling::strength() const {
  const auto& value = position_basis() ? k : gamma;
  if (!value) throw Error(ErrorCode::InvalidArgument, "coupling constant missing for " + to_string(kind));
  return *value;
}

std::string describe(const ParticleDensity& density) {
  std::ostringstream out;
  std::visit(overloaded{
                 [&](const Gaussian& g) { out << "gaussian(mean=" << g.mean << ", std=" << g.std << ")"; },
                 [&](const Box& b) { out << "box(center=" << b.center << ", L=" << b.halfwidth << ")"; },
                 [&](const Cauchy& c) { out << "cauchy(location=" << c.location << ", scale=" << c.scale << ")"; },
                 [&](const Delta& d) { out << "delta(location=" << d.location << ")"; },
             },
             density);
  return out.str();
}

std::size_t UniformGrid::size() const {
  if (counts.empty()) return 0;
  std::size_t total = 1;
  for (auto c : counts) total *= c;
  return total;
}

double UniformGrid::cell_volume() const { return std::pow(spacing, static_cast<double>(dims())); }

double GridWave::norm_squared() const {
  double sum = 0.0;
  for (const auto& a : amplitudes) sum += std::norm(a);
  return sum * grid.cell_volume();
}

bool EnvState::has_delta() const {
  if (!is_product()) return false;
  const auto& ps = product().particles;
  return std::any_of(ps.begin(), ps.end(), [](const auto& p) { return std::holds_alternative<Delta>(p); });
}

bool EnvState::has_cauchy() const {
  if (!is_product()) return false;
  const auto& ps = product().particles;
  return std::any_of(ps.begin(), ps.end(), [](const auto& p) { return std::holds_alternative<Cauchy>(p); });
}

cplx BodyAmplitude::operator()(double x) const {
  return std::visit(
      overloaded{
          [x](const GaussianPacket& g) {
            const double d = x - g.center;
            const double amp = std::pow(2.0 * std::numbers::pi * g.width * g.width, -0.25) *
                               std::exp(-d * d / (4.0 * g.width * g.width));
            return std::polar(amp, g.momentum * x / g.hbar);
          },
          [x](const PointSuperposition& s) {
            for (const auto& [pos, weight] : s.points) {
              if (std::abs(pos - x) <= 1e-12 * std::max(1.0, std::abs(pos))) return weight;
            }
            return cplx{};
          },
          [x](const SampledTable& t) {
            if (t.values.empty()) return cplx{};
            const double u = (x - t.origin) / t.spacing;
            if (u < 0.0 || u > static_cast<double>(t.values.size() - 1)) return cplx{};
            const auto j = std::min(static_cast<std::size_t>(u), t.values.size() - 1);
            if (j + 1 >= t.values.size()) return t.values[j];
            const double frac = u - static_cast<double>(j);
            return (1.0 - frac) * t.values[j] + frac * t.values[j + 1];
          },
      },
      repr_);
}

std::size_t EntangledState::slice_index(double x) const {
  for (std::size_t a = 0; a < positions.size(); ++a) {
    if (std::abs(positions[a] - x) <= 1e-12 * std::max(1.0, std::abs(x))) return a;
  }
  std::ostringstream msg;
  msg << "body position " << x << " is not one of the state's slice positions";
  throw Error(ErrorCode::PositionNotInSupport, msg.str());
}

double EntangledState::total_norm_squared() const {
  double total = 0.0;
  for (const auto& s : slices) total += s.norm_squared();
  return total;
}

std::string ValidationReport::summary() const {
  if (ok()) return "pass";
  std::string out;
  for (const auto& f : failures) {
    if (!out.empty()) out += "; ";
    out += f;
  }
  return out;
}

ValidationReport validate(const PhysConsts& consts) {
  ValidationReport report;
  require(report, std::isfinite(consts.hbar) && consts.hbar > 0, "hbar > 0");
  require(report, consts.n >= 1, "n ≥ 1");
  require(report, std::isfinite(consts.alpha), "alpha finite");
  return report;
}

ValidationReport validate(const Coupling& c) {
  ValidationReport report;
  auto finite = [](const std::optional<double>& v) { return v && std::isfinite(*v); };
  switch (c.kind) {
    case CouplingKind::SC:
    case CouplingKind::HC:
      require(report, finite(c.k), "k set and finite");
      require(report, !c.gamma && !c.mu && !c.nu, "only k set for " + to_string(c.kind));
      break;
    case CouplingKind::MC:
      require(report, finite(c.gamma), "gamma set and finite");
      require(report, !c.k && !c.mu && !c.nu, "only gamma set for MC");
      break;
    case CouplingKind::MHC:
      require(report, finite(c.mu) && finite(c.nu) && finite(c.gamma), "mu, nu, gamma set and finite");
      require(report, !c.k, "k unset for MHC");
      if (report.ok()) {
        require(report, *c.mu != 0.0, "mu != 0");
        if (report.ok()) {
          const double expect = *c.nu / *c.mu;
          require(report, std::abs(*c.gamma - expect) <= 4 * 2.2e-16 * std::max(1.0, std::abs(expect)),
                  "gamma == nu / mu");
        }
      }
      break;
  }
  return report;
}

ValidationReport validate(const EnvState& env, int n) {
  ValidationReport report;
  if (env.is_product()) {
    const auto& ps = env.product().particles;
    require(report, !ps.empty(), "at least one particle density");
    require(report, ps.size() <= 1 || static_cast<int>(ps.size()) == n, "particle density count is 1 or n");
    for (const auto& p : ps) {
      std::visit(overloaded{
                     [&](const Gaussian& g) {
                       require(report, std::isfinite(g.mean), "mean finite");
                       require(report, std::isfinite(g.std) && g.std > 0, "std > 0");
                     },
                     [&](const Box& b) {
                       require(report, std::isfinite(b.center), "center finite");
                       require(report, std::isfinite(b.halfwidth) && b.halfwidth > 0, "L > 0");
                     },
                     [&](const Cauchy& c) {
                       require(report, std::isfinite(c.location), "location finite");
                       require(report, std::isfinite(c.scale) && c.scale > 0, "scale > 0");
                     },
                     [&](const Delta& d) { require(report, std::isfinite(d.location), "location finite"); },
                 },
                 p);
    }
  } else {
    check_wave(report, env.wave(), n, true);
  }
  return report;
}

ValidationReport validate(const BodyAmplitude& body) {
  ValidationReport report;
  std::visit(overloaded{
                 [&](const GaussianPacket& g) {
                   require(report, std::isfinite(g.width) && g.width > 0, "packet width > 0");
                   require(report, std::isfinite(g.hbar) && g.hbar > 0, "hbar > 0");
                   require(report, std::isfinite(g.center) && std::isfinite(g.momentum), "packet parameters finite");
                 },
                 [&](const PointSuperposition& s) {
                   double total = 0.0;
                   for (const auto& [x, c] : s.points) total += std::norm(c);
                   require(report, !s.points.empty(), "superposition has points");
                   require(report, std::abs(total - 1.0) <= kNormTol, "sum |c_j|^2 == 1");
                 },
                 [&](const SampledTable& t) {
                   require(report, !t.values.empty(), "table nonempty");
                   require(report, std::isfinite(t.spacing) && t.spacing > 0, "table spacing > 0");
                 },
             },
             body.repr());
  return report;
}

ValidationReport validate(const EntangledState& state, int n) {
  ValidationReport report;
  require(report, !state.positions.empty(), "at least one body position");
  require(report, state.positions.size() == state.slices.size(), "one slice per body position");
  if (!report.ok()) return report;
  for (const auto& s : state.slices) {
    check_wave(report, s, n, false);
    require(report, s.grid == state.slices.front().grid, "slices share one grid");
  }
  for (std::size_t a = 0; a < state.positions.size(); ++a) {
    for (std::size_t b = a + 1; b < state.positions.size(); ++b) {
      require(report, state.positions[a] != state.positions[b], "body positions distinct");
    }
  }
  if (report.ok()) {
    require(report, std::abs(state.total_norm_squared() - 1.0) <= kNormTol, "total slice norm == 1");
  }
  return report;
}

ValidationReport validate(const PhysConsts& consts, const Coupling& coupling, const EnvState& env) {
  ValidationReport report = validate(consts);
  append(report, validate(coupling));
  append(report, validate(env, consts.n));
  return report;
}

EnvState make_product_env(std::vector<ParticleDensity> particles, int n) {
  EnvState env{ProductFamily{std::move(particles)}};
  if (auto r = validate(env, n); !r.ok()) throw Error(ErrorCode::InvalidArgument, r.summary());
  return env;
}

EnvState make_grid_env(GridWave wave, int n) {
  EnvState env{std::move(wave)};
  if (auto r = validate(env, n); !r.ok()) throw Error(ErrorCode::InvalidArgument, r.summary());
  return env;
}

EntangledState make_entangled(std::vector<double> positions, std::vector<GridWave> slices, int n) {
  EntangledState state{std::move(positions), std::move(slices)};
  if (auto r = validate(state, n); !r.ok()) throw Error(ErrorCode::InvalidArgument, r.summary());
  return state;
}

}  // namespace decoh
