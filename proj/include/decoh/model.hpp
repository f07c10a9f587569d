#pragma once

// Physical constants, couplings and state descriptions shared by the
// analytic engine, the grid oracle and the command-line front end.
//
// Units: every quantity is a plain double in a user-chosen unit system.
// The defaults (hbar = alpha = k = 1) are only defaults; all constants are
// independently configurable.

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace decoh {

using cplx = std::complex<double>;

/// hbar: action, alpha: environment kinetic velocity (H_e = alpha * sum p_i + V),
/// n: number of environment particles.
struct PhysConsts {
  double hbar = 1.0;
  double alpha = 1.0;
  int n = 1;
};

enum class CouplingKind {
  SC,   ///< k X sum x_i
  MC,   ///< gamma P sum x_i
  HC,   ///< -1/2 k sum (X - x_i)^2
  MHC,  ///< -1/(2 mu) sum (P - nu x_i)^2, gamma = nu / mu
};

std::string to_string(CouplingKind kind);
std::optional<CouplingKind> parse_coupling_kind(const std::string& text);

/// Tagged interaction. Only the constants relevant to `kind` are set.
struct Coupling {
  CouplingKind kind = CouplingKind::SC;
  std::optional<double> k;
  std::optional<double> gamma;
  std::optional<double> mu;
  std::optional<double> nu;

  static Coupling sc(double k);
  static Coupling mc(double gamma);
  static Coupling hc(double k);
  static Coupling mhc(double mu, double nu);

  /// k for SC/HC, gamma for MC/MHC.
  double strength() const;
  /// True when the pointer basis is position (SC/HC), false for momentum.
  bool position_basis() const { return kind == CouplingKind::SC || kind == CouplingKind::HC; }
};

// Per-particle position densities.
struct Gaussian {
  double mean = 0.0;
  double std = 1.0;
};
struct Box {
  double center = 0.0;
  double halfwidth = 1.0;
};
struct Cauchy {
  double location = 0.0;
  double scale = 1.0;
};
/// Point mass; symbolic only, never sampled onto a grid.
struct Delta {
  double location = 0.0;
};

using ParticleDensity = std::variant<Gaussian, Box, Cauchy, Delta>;

std::string describe(const ParticleDensity& density);

/// Uniform tensor grid with the same spacing and origin in every dimension.
/// Node j of a dimension sits at origin + j * spacing. Storage is row-major.
struct UniformGrid {
  std::vector<std::size_t> counts;
  double spacing = 1.0;
  double origin = 0.0;

  std::size_t dims() const { return counts.size(); }
  std::size_t size() const;
  double node(std::size_t j) const { return origin + static_cast<double>(j) * spacing; }
  double cell_volume() const;

  bool operator==(const UniformGrid&) const = default;
};

/// Product state: one density per particle, or a single density shared by all.
struct ProductFamily {
  std::vector<ParticleDensity> particles;

  const ParticleDensity& particle(std::size_t i) const {
    return particles.size() == 1 ? particles.front() : particles.at(i);
  }
};

/// Sampled environment wavefunction phi(x_1, ..., x_d) over a UniformGrid.
struct GridWave {
  UniformGrid grid;
  std::vector<cplx> amplitudes;

  /// Discrete sum |phi|^2 times the cell volume.
  double norm_squared() const;
};

struct EnvState {
  std::variant<ProductFamily, GridWave> form;

  bool is_product() const { return std::holds_alternative<ProductFamily>(form); }
  const ProductFamily& product() const { return std::get<ProductFamily>(form); }
  const GridWave& wave() const { return std::get<GridWave>(form); }
  bool has_delta() const;
  bool has_cauchy() const;
};

/// Normalized complex Gaussian packet (2 pi w^2)^(-1/4) exp(-(X-c)^2/(4 w^2) + i p X / hbar).
struct GaussianPacket {
  double center = 0.0;
  double width = 1.0;
  double momentum = 0.0;
  double hbar = 1.0;
};

/// Sum_j c_j |X_j>; evaluation returns c_j at X_j and zero elsewhere.
struct PointSuperposition {
  std::vector<std::pair<double, cplx>> points;
};

/// Linearly interpolated samples; zero outside the table.
struct SampledTable {
  double origin = 0.0;
  double spacing = 1.0;
  std::vector<cplx> values;
};

/// Body amplitude psi(X) (or psi~(P) for momentum couplings).
class BodyAmplitude {
 public:
  using Repr = std::variant<GaussianPacket, PointSuperposition, SampledTable>;

  BodyAmplitude() : repr_(GaussianPacket{}) {}
  explicit BodyAmplitude(Repr repr) : repr_(std::move(repr)) {}

  cplx operator()(double x) const;
  const Repr& repr() const { return repr_; }

 private:
  Repr repr_;
};

/// Entangled initial state Phi(X, x_1..x_n) restricted to finitely many body
/// positions. All slices share one grid; slice weights live in slice norms.
struct EntangledState {
  std::vector<double> positions;
  std::vector<GridWave> slices;

  /// Index of the slice at `x`, or throws PositionNotInSupport.
  std::size_t slice_index(double x) const;
  double total_norm_squared() const;
};

struct ValidationReport {
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
  std::string summary() const;
};

ValidationReport validate(const PhysConsts& consts);
ValidationReport validate(const Coupling& coupling);
ValidationReport validate(const EnvState& env, int n);
ValidationReport validate(const BodyAmplitude& body);
ValidationReport validate(const EntangledState& state, int n);
ValidationReport validate(const PhysConsts& consts, const Coupling& coupling, const EnvState& env);

// Checked constructors: throw Error(InvalidArgument) naming the violated invariant.
EnvState make_product_env(std::vector<ParticleDensity> particles, int n);
EnvState make_grid_env(GridWave wave, int n);
EntangledState make_entangled(std::vector<double> positions, std::vector<GridWave> slices, int n);

}  // namespace decoh
