#pragma once

// Subcommands behind the `decoh` executable. Each returns a process exit code:
// 0 success, 1 tolerance failure, 2 invalid configuration, 3 engine error.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "decoh/config.hpp"

namespace decoh::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitTolerance = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitEngine = 3;

inline constexpr const char* kVersion = "1.0.0";

/// One CSV row. Columns, in order: t, z_or_y, re, im, modulus, phase_exponent, engine.
struct CurveRecord {
  double t = 0.0;
  double z_or_y = 0.0;
  double re = 0.0;
  double im = 0.0;
  double modulus = 0.0;
  double phase_exponent = 0.0;
  std::string engine;
};

std::string csv_header();
/// Fixed 17-significant-digit formatting; identical input gives identical bytes.
std::string format_row(const CurveRecord& row);
std::string format_number(double v);

std::vector<CurveRecord> analytic_records(const RunConfig& config);
std::vector<CurveRecord> oracle_records(const RunConfig& config);

/// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_atomically(const std::filesystem::path& path, const std::string& contents);

int cmd_curve(const RunConfig& config, std::ostream& log);
int cmd_tau(const RunConfig& config, std::ostream& log);
int cmd_decayfit(const RunConfig& config, std::ostream& log);
int cmd_compare(const RunConfig& config, std::ostream& log);

struct Invocation {
  std::string command;
  std::filesystem::path config;
  std::optional<std::string> out_dir;
  std::optional<std::string> engine;
  std::optional<std::uint64_t> seed;
};

/// Loads and validates the configuration, applies flag overrides and runs the
/// command, mapping failures onto the exit-code contract.
int run(const Invocation& invocation, std::ostream& log, std::ostream& err);

}  // namespace decoh::cli
