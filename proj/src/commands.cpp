#include "decoh/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "decoh/error.hpp"

namespace decoh::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string csv_text(const std::vector<CurveRecord>& rows) {
  std::string out = csv_header();
  for (const auto& r : rows) out += format_row(r);
  return out;
}

fs::path output_path(const RunConfig& c, const std::string& suffix) {
  return fs::path(c.output.dir) / (c.output.prefix + suffix);
}

json engine_versions() {
  return json{{"decoh", kVersion}, {"analytic", "closed-form characteristic function"},
              {"oracle", "Strang split-step, FFTW3"}};
}

json summary_of(const std::vector<CurveRecord>& rows) {
  double min_mod = std::numeric_limits<double>::infinity(), max_mod = 0.0;
  for (const auto& r : rows) {
    min_mod = std::min(min_mod, r.modulus);
    max_mod = std::max(max_mod, r.modulus);
  }
  return json{{"rows", rows.size()}, {"min_modulus", min_mod}, {"max_modulus", max_mod}};
}

double wrapped(double angle) { return std::remainder(angle, 2 * std::numbers::pi); }

struct Query {
  double a = 0.0;
  double b = 0.0;
  double t = 0.0;
  std::string origin;
};

}  // namespace

std::string csv_header() { return "t,z_or_y,re,im,modulus,phase_exponent,engine\n"; }

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_row(const CurveRecord& r) {
  std::string out;
  for (double v : {r.t, r.z_or_y, r.re, r.im, r.modulus, r.phase_exponent}) {
    out += format_number(v);
    out += ',';
  }
  out += r.engine;
  out += '\n';
  return out;
}

std::vector<CurveRecord> analytic_records(const RunConfig& c) {
  const auto times = c.time.expand();
  const auto result = curve(ElementQuery{c.body, c.env, c.a, c.b, c.consts, c.coupling}, times);
  std::vector<CurveRecord> rows;
  rows.reserve(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    const auto& e = result.elements[j];
    rows.push_back({times[j], e.transform_arg, e.value.real(), e.value.imag(), std::abs(e.value), e.phase_exponent,
                    "analytic"});
  }
  return rows;
}

std::vector<CurveRecord> oracle_records(const RunConfig& c) {
  const auto times = c.time.expand();
  const auto phi0 = oracle::sample_product(c.env, c.oracle.grid, c.consts.n);
  const auto v = c.oracle.potential.build();
  const oracle::StepControl control{c.oracle.max_step, true};
  std::vector<CurveRecord> rows;
  rows.reserve(times.size());
  for (double t : times) {
    const cplx value = oracle::rdm_element_oracle(c.body, phi0, c.a, c.b, t, c.consts, c.coupling, v, control);
    rows.push_back({t, transform_arg(c.coupling, c.a, c.b, t, c.consts), value.real(), value.imag(), std::abs(value),
                    phase_exponent(c.coupling, c.a, c.b, t, c.consts), "oracle"});
  }
  return rows;
}

void write_atomically(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

int cmd_curve(const RunConfig& c, std::ostream& log) {
  std::vector<CurveRecord> analytic, oracle_rows;
  if (c.engine != Engine::Oracle) analytic = analytic_records(c);
  if (c.engine != Engine::Analytic) oracle_rows = oracle_records(c);

  json meta;
  meta["command"] = "curve";
  meta["config"] = to_json(c);
  meta["engine_versions"] = engine_versions();
  meta["tolerances"] = {{"modulus_rtol", c.compare.modulus_rtol}, {"phase_tol", c.compare.phase_tol}};
  meta["columns"] = {"t", "z_or_y", "re", "im", "modulus", "phase_exponent", "engine"};
  json files = json::array();
  if (!analytic.empty()) {
    meta["summary"]["analytic"] = summary_of(analytic);
    files.push_back(c.output.prefix + "_analytic.csv");
  }
  if (!oracle_rows.empty()) {
    meta["summary"]["oracle"] = summary_of(oracle_rows);
    files.push_back(c.output.prefix + "_oracle.csv");
  }
  if (!analytic.empty() && !oracle_rows.empty()) {
    double max_abs = 0.0;
    for (std::size_t j = 0; j < analytic.size(); ++j) {
      max_abs = std::max(max_abs, std::abs(analytic[j].modulus - oracle_rows[j].modulus));
    }
    meta["summary"]["max_modulus_discrepancy"] = max_abs;
  }
  meta["files"] = files;

  if (!analytic.empty()) write_atomically(output_path(c, "_analytic.csv"), csv_text(analytic));
  if (!oracle_rows.empty()) write_atomically(output_path(c, "_oracle.csv"), csv_text(oracle_rows));
  write_atomically(output_path(c, ".json"), meta.dump(2) + "\n");
  log << "curve: wrote " << files.size() << " CSV file(s) to " << c.output.dir << "\n";
  return kExitOk;
}

int cmd_tau(const RunConfig& c, std::ostream& log) {
  const auto report = decoherence_time(c.coupling, c.a - c.b, c.env, c.consts);
  json table = json::array();
  auto row = [&](const char* vary, double n, double g, double sep, double width) {
    const double tau = timescale(c.consts.hbar, n, g, sep, width);
    table.push_back({{"vary", vary}, {"factor", 2}, {"tau", tau}, {"ratio", tau / report.tau}});
  };
  const double n = report.n, g = report.coupling_constant, sep = report.separation, w = report.delta_eta;
  row("n", 2 * n, g, sep, w);
  row(c.coupling.position_basis() ? "k" : "gamma", n, 2 * g, sep, w);
  row("separation", n, g, 2 * sep, w);
  row("delta_eta", n, g, sep, 2 * w);

  json out;
  out["command"] = "tau";
  out["tau"] = report.tau;
  out["inputs"] = {{"hbar", report.hbar},        {"n", report.n},
                   {"coupling", to_string(c.coupling.kind)}, {"coupling_constant", g},
                   {"separation", sep},          {"delta_eta", w}};
  out["scaling"] = table;
  out["config"] = to_json(c);
  out["engine_versions"] = engine_versions();
  write_atomically(output_path(c, "_tau.json"), out.dump(2) + "\n");
  log << "tau = " << format_number(report.tau) << "\n";
  return kExitOk;
}

int cmd_decayfit(const RunConfig& c, std::ostream& log) {
  if (!c.decayfit) throw ConfigError("decayfit window (decayfit.zmin, decayfit.zmax) is required");
  const auto times = c.time.expand();
  const auto result = curve(ElementQuery{c.body, c.env, c.a, c.b, c.consts, c.coupling}, times);
  const auto fit = decay_fit(result, *c.decayfit);
  json out;
  out["command"] = "decayfit";
  out["model"] = to_string(fit.model);
  out["order"] = fit.order;
  out["rate"] = fit.rate;
  out["log_slope"] = fit.log_slope;
  out["points"] = fit.points;
  out["envelope"] = fit.envelope;
  out["residuals"] = {{"power", fit.rss_power}, {"exponential", fit.rss_exponential}, {"gaussian", fit.rss_gaussian}};
  out["window"] = {{"zmin", c.decayfit->zmin}, {"zmax", c.decayfit->zmax}};
  out["config"] = to_json(c);
  out["engine_versions"] = engine_versions();
  write_atomically(output_path(c, "_decayfit.json"), out.dump(2) + "\n");
  log << "decayfit: model=" << to_string(fit.model) << " rate=" << format_number(fit.rate) << "\n";
  return kExitOk;
}

int cmd_compare(const RunConfig& c, std::ostream& log) {
  std::vector<Query> queries;
  for (double t : c.time.expand()) queries.push_back({c.a, c.b, t, "grid"});
  if (c.compare.draws > 0) {
    std::mt19937_64 rng(c.compare.seed);
    std::uniform_real_distribution<double> pos(c.compare.position_lo, c.compare.position_hi);
    std::uniform_real_distribution<double> time(c.compare.time_lo, c.compare.time_hi);
    const auto* points = std::get_if<PointSuperposition>(&c.body.repr());
    for (std::size_t d = 0; d < c.compare.draws; ++d) {
      Query q{0, 0, time(rng), "draw"};
      if (points && !points->points.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, points->points.size() - 1);
        q.a = points->points[pick(rng)].first;
        q.b = points->points[pick(rng)].first;
      } else {
        q.a = pos(rng);
        q.b = pos(rng);
      }
      queries.push_back(q);
    }
  }

  const auto phi0 = oracle::sample_product(c.env, c.oracle.grid, c.consts.n);
  const auto v = c.oracle.potential.build();
  const oracle::StepControl control{c.oracle.max_step, true};
  double max_rel = 0.0, max_phase = 0.0;
  std::size_t scored = 0, skipped = 0;
  json rows = json::array();
  for (const auto& q : queries) {
    const auto a = rdm_element(c.body, c.env, q.a, q.b, q.t, c.consts, c.coupling);
    const cplx o = oracle::rdm_element_oracle(c.body, phi0, q.a, q.b, q.t, c.consts, c.coupling, v, control);
    const double initial = std::abs(c.body(q.a)) * std::abs(c.body(q.b));
    const bool score = initial > 0.0 && a.modulus >= c.compare.min_relative_modulus * initial;
    double rel = 0.0, phase = 0.0;
    if (score) {
      rel = std::abs(std::abs(o) - a.modulus) / a.modulus;
      phase = std::abs(wrapped(std::arg(o * std::conj(a.value))));
      max_rel = std::max(max_rel, rel);
      max_phase = std::max(max_phase, phase);
      ++scored;
    } else {
      ++skipped;
    }
    rows.push_back({{"a", q.a}, {"b", q.b}, {"t", q.t}, {"origin", q.origin}, {"analytic_modulus", a.modulus},
                    {"oracle_modulus", std::abs(o)}, {"scored", score}, {"relative_modulus_error", rel},
                    {"phase_error", phase}});
  }
  const bool pass = max_rel < c.compare.modulus_rtol && max_phase < c.compare.phase_tol;
  json out;
  out["command"] = "compare";
  out["pass"] = pass;
  out["max_relative_modulus_error"] = max_rel;
  out["max_phase_error"] = max_phase;
  out["tolerances"] = {{"modulus_rtol", c.compare.modulus_rtol}, {"phase_tol", c.compare.phase_tol},
                       {"min_relative_modulus", c.compare.min_relative_modulus}};
  out["queries"] = queries.size();
  out["scored"] = scored;
  out["skipped"] = skipped;
  out["rows"] = rows;
  out["config"] = to_json(c);
  out["engine_versions"] = engine_versions();
  write_atomically(output_path(c, "_compare.json"), out.dump(2) + "\n");
  log << "compare: " << (pass ? "pass" : "FAIL") << " max_rel_modulus_error=" << format_number(max_rel)
      << " max_phase_error=" << format_number(max_phase) << "\n";
  return pass ? kExitOk : kExitTolerance;
}

int run(const Invocation& inv, std::ostream& log, std::ostream& err) {
  RunConfig config;
  try {
    config = load_config(inv.config);
    if (inv.out_dir) config.output.dir = *inv.out_dir;
    if (inv.engine) {
      const auto engine = parse_engine(*inv.engine);
      if (!engine) throw ConfigError("--engine must be one of analytic, oracle, both");
      config.engine = *engine;
    }
    if (inv.seed) config.compare.seed = *inv.seed;
    if (inv.command == "compare") config.engine = Engine::Both;
    const auto report = validate(config);
    if (!report.ok()) throw ConfigError("invalid configuration: " + report.summary());
    if (inv.command == "tau") {
      // Width and separation preconditions are configuration errors for tau.
      decoherence_time(config.coupling, config.a - config.b, config.env, config.consts);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (inv.command == "curve") return cmd_curve(config, log);
    if (inv.command == "tau") return cmd_tau(config, log);
    if (inv.command == "decayfit") return cmd_decayfit(config, log);
    if (inv.command == "compare") return cmd_compare(config, log);
    err << "error: unknown command " << inv.command << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "engine error: " << e.what() << "\n";
    return kExitEngine;
  } catch (const std::exception& e) {
    err << "engine error: " << e.what() << "\n";
    return kExitEngine;
  }
}

}  // namespace decoh::cli
