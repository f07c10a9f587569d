#pragma once

// Run configuration for the command-line front end. The on-disk format is
// JSON; docs/config.md documents every key.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "decoh/model.hpp"
#include "decoh/oracle.hpp"
#include "decoh/rdm.hpp"

namespace decoh::cli {

enum class Engine { Analytic, Oracle, Both };
std::string to_string(Engine engine);
std::optional<Engine> parse_engine(const std::string& text);

/// Either start/stop/count (inclusive, evenly spaced) or an explicit list.
struct TimeGrid {
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 1;
  std::vector<double> values;

  std::vector<double> expand() const;
};

/// Separable one-particle potential used by the oracle.
struct PotentialSpec {
  std::string kind = "none";  ///< none | harmonic | box
  double stiffness = 0.0;     ///< harmonic: v = stiffness x^2 / 2
  double depth = 0.0;         ///< box: v = depth inside |x - center| < halfwidth
  double center = 0.0;
  double halfwidth = 0.0;

  oracle::Potential build() const;
};

struct OracleSpec {
  UniformGrid grid{{1024}, 0.05, -25.6};
  double max_step = 0.0;
  PotentialSpec potential;
};

struct CompareSpec {
  double modulus_rtol = 1e-5;
  double phase_tol = 1e-6;
  std::size_t draws = 0;
  double position_lo = -1.0;  ///< random draws of a, b (ignored for superposition bodies)
  double position_hi = 1.0;
  double time_lo = -1.0;
  double time_hi = 1.0;
  std::uint64_t seed = 0;
  /// Queries whose analytic modulus is below this fraction of |psi(a) psi*(b)|
  /// are reported but not scored; relative error is ill-conditioned there.
  double min_relative_modulus = 1e-2;
};

struct OutputSpec {
  std::string dir = ".";
  std::string prefix = "run";
};

struct RunConfig {
  PhysConsts consts;
  Coupling coupling = Coupling::sc(1.0);
  EnvState env{ProductFamily{{Gaussian{}}}};
  BodyAmplitude body;
  double a = 1.0;  ///< X' or P'
  double b = -1.0; ///< X'' or P''
  TimeGrid time;
  Engine engine = Engine::Analytic;
  OracleSpec oracle;
  std::optional<DecayWindow> decayfit;
  CompareSpec compare;
  OutputSpec output;
};

/// Thrown for malformed or invalid configurations (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

/// Everything model::validate checks plus the run-level invariants
/// (time grid, engine feasibility, oracle grid).
ValidationReport validate(const RunConfig& config);

}  // namespace decoh::cli
