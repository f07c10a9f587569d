#include "decoh/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "decoh/error.hpp"

namespace decoh::cli {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double number(const json& node, const char* key, const std::string& where) {
  if (!node.contains(key)) throw ConfigError(where + "." + key + " is required");
  const auto& v = node.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

double number_or(const json& node, const char* key, double fallback, const std::string& where) {
  return node.contains(key) ? number(node, key, where) : fallback;
}

std::string text_or(const json& node, const char* key, const std::string& fallback) {
  if (!node.contains(key)) return fallback;
  if (!node.at(key).is_string()) throw ConfigError(std::string(key) + " must be a string");
  return node.at(key).get<std::string>();
}

ParticleDensity parse_density(const json& node, const std::string& where) {
  const auto family = text_or(node, "family", "");
  if (family == "gaussian") return Gaussian{number_or(node, "mean", 0.0, where), number(node, "std", where)};
  if (family == "box") return Box{number_or(node, "center", 0.0, where), number(node, "halfwidth", where)};
  if (family == "cauchy") return Cauchy{number_or(node, "location", 0.0, where), number(node, "scale", where)};
  if (family == "delta") return Delta{number_or(node, "location", 0.0, where)};
  throw ConfigError(where + ".family must be one of gaussian, box, cauchy, delta");
}

json density_json(const ParticleDensity& p) {
  return std::visit(overloaded{
                        [](const Gaussian& g) { return json{{"family", "gaussian"}, {"mean", g.mean}, {"std", g.std}}; },
                        [](const Box& b) { return json{{"family", "box"}, {"center", b.center}, {"halfwidth", b.halfwidth}}; },
                        [](const Cauchy& c) { return json{{"family", "cauchy"}, {"location", c.location}, {"scale", c.scale}}; },
                        [](const Delta& d) { return json{{"family", "delta"}, {"location", d.location}}; },
                    },
                    p);
}

BodyAmplitude parse_body(const json& node, double hbar) {
  const auto kind = text_or(node, "kind", "gaussian");
  if (kind == "gaussian") {
    return BodyAmplitude{GaussianPacket{number_or(node, "center", 0.0, "body"), number_or(node, "width", 1.0, "body"),
                                        number_or(node, "momentum", 0.0, "body"), hbar}};
  }
  if (kind == "superposition") {
    PointSuperposition s;
    if (!node.contains("points") || !node.at("points").is_array()) throw ConfigError("body.points must be an array");
    for (const auto& p : node.at("points")) {
      s.points.emplace_back(number(p, "x", "body.points[]"),
                            cplx{number_or(p, "re", 0.0, "body.points[]"), number_or(p, "im", 0.0, "body.points[]")});
    }
    return BodyAmplitude{s};
  }
  if (kind == "table") {
    SampledTable t{number(node, "origin", "body"), number(node, "spacing", "body"), {}};
    const auto re = node.value("re", std::vector<double>{});
    const auto im = node.value("im", std::vector<double>(re.size(), 0.0));
    if (re.size() != im.size()) throw ConfigError("body.re and body.im differ in length");
    for (std::size_t j = 0; j < re.size(); ++j) t.values.emplace_back(re[j], im[j]);
    return BodyAmplitude{t};
  }
  throw ConfigError("body.kind must be one of gaussian, superposition, table");
}

json body_json(const BodyAmplitude& body) {
  return std::visit(overloaded{
                        [](const GaussianPacket& g) {
                          return json{{"kind", "gaussian"}, {"center", g.center}, {"width", g.width}, {"momentum", g.momentum}};
                        },
                        [](const PointSuperposition& s) {
                          json points = json::array();
                          for (const auto& [x, c] : s.points) points.push_back({{"x", x}, {"re", c.real()}, {"im", c.imag()}});
                          return json{{"kind", "superposition"}, {"points", points}};
                        },
                        [](const SampledTable& t) {
                          std::vector<double> re, im;
                          for (const auto& v : t.values) {
                            re.push_back(v.real());
                            im.push_back(v.imag());
                          }
                          return json{{"kind", "table"}, {"origin", t.origin}, {"spacing", t.spacing}, {"re", re}, {"im", im}};
                        },
                    },
                    body.repr());
}

Coupling parse_coupling(const json& node) {
  const auto kind = parse_coupling_kind(text_or(node, "kind", "SC"));
  if (!kind) throw ConfigError("coupling.kind must be one of SC, MC, HC, MHC");
  switch (*kind) {
    case CouplingKind::SC: return Coupling::sc(number_or(node, "k", 1.0, "coupling"));
    case CouplingKind::HC: return Coupling::hc(number_or(node, "k", 1.0, "coupling"));
    case CouplingKind::MC: return Coupling::mc(number_or(node, "gamma", 1.0, "coupling"));
    case CouplingKind::MHC: return Coupling::mhc(number(node, "mu", "coupling"), number(node, "nu", "coupling"));
  }
  throw ConfigError("unreachable coupling kind");
}

json coupling_json(const Coupling& c) {
  json out{{"kind", to_string(c.kind)}};
  if (c.kind == CouplingKind::MHC) {
    out["mu"] = *c.mu;
    out["nu"] = *c.nu;
  } else if (c.position_basis()) {
    out["k"] = *c.k;
  } else {
    out["gamma"] = *c.gamma;
  }
  return out;
}

EnvState parse_env(const json& node) {
  ProductFamily family;
  if (node.contains("particles")) {
    if (!node.at("particles").is_array()) throw ConfigError("environment.particles must be an array");
    std::size_t i = 0;
    for (const auto& p : node.at("particles")) {
      family.particles.push_back(parse_density(p, "environment.particles[" + std::to_string(i++) + "]"));
    }
  } else {
    family.particles.push_back(parse_density(node, "environment"));
  }
  return EnvState{family};
}

json env_json(const EnvState& env) {
  const auto& ps = env.product().particles;
  if (ps.size() == 1) return density_json(ps.front());
  json list = json::array();
  for (const auto& p : ps) list.push_back(density_json(p));
  return json{{"particles", list}};
}

}  // namespace

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::Analytic: return "analytic";
    case Engine::Oracle: return "oracle";
    case Engine::Both: return "both";
  }
  return "?";
}

std::optional<Engine> parse_engine(const std::string& text) {
  if (text == "analytic") return Engine::Analytic;
  if (text == "oracle") return Engine::Oracle;
  if (text == "both") return Engine::Both;
  return std::nullopt;
}

std::vector<double> TimeGrid::expand() const {
  if (!values.empty()) return values;
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    out[j] = count == 1 ? start : start + (stop - start) * static_cast<double>(j) / static_cast<double>(count - 1);
  }
  return out;
}

oracle::Potential PotentialSpec::build() const {
  if (kind == "harmonic") {
    const double s = stiffness;
    return [s](double x) { return 0.5 * s * x * x; };
  }
  if (kind == "box") {
    const double d = depth, c = center, w = halfwidth;
    return [d, c, w](double x) { return std::abs(x - c) < w ? d : 0.0; };
  }
  return {};
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration root must be an object");
  RunConfig c;
  try {
    if (doc.contains("consts")) {
      const auto& k = doc.at("consts");
      c.consts.hbar = number_or(k, "hbar", 1.0, "consts");
      c.consts.alpha = number_or(k, "alpha", 1.0, "consts");
      const double n = number_or(k, "n", 1.0, "consts");
      if (n != std::floor(n) || std::abs(n) > 1e6) throw ConfigError("consts.n must be an integer");
      c.consts.n = static_cast<int>(n);
    }
    if (doc.contains("coupling")) c.coupling = parse_coupling(doc.at("coupling"));
    if (doc.contains("environment")) c.env = parse_env(doc.at("environment"));
    c.body = parse_body(doc.value("body", json::object()), c.consts.hbar);
    if (doc.contains("query")) {
      c.a = number(doc.at("query"), "a", "query");
      c.b = number(doc.at("query"), "b", "query");
    }
    if (doc.contains("time")) {
      const auto& t = doc.at("time");
      if (t.contains("values")) {
        c.time.values = t.at("values").get<std::vector<double>>();
        c.time.count = c.time.values.size();
      } else {
        c.time.start = number_or(t, "start", 0.0, "time");
        c.time.stop = number_or(t, "stop", c.time.start, "time");
        const double count = number_or(t, "count", 1.0, "time");
        if (count < 0 || count != std::floor(count)) throw ConfigError("time.count must be a nonnegative integer");
        c.time.count = static_cast<std::size_t>(count);
      }
    }
    if (const auto engine = parse_engine(doc.value("engine", std::string("analytic")))) {
      c.engine = *engine;
    } else {
      throw ConfigError("engine must be one of analytic, oracle, both");
    }
    if (doc.contains("oracle")) {
      const auto& o = doc.at("oracle");
      const double points = number_or(o, "points", 1024, "oracle");
      if (points < 1 || points != std::floor(points)) throw ConfigError("oracle.points must be a positive integer");
      c.oracle.grid.counts.assign(static_cast<std::size_t>(std::max(c.consts.n, 1)), static_cast<std::size_t>(points));
      c.oracle.grid.spacing = number_or(o, "spacing", 0.05, "oracle");
      c.oracle.grid.origin =
          number_or(o, "origin", -0.5 * static_cast<double>(points) * c.oracle.grid.spacing, "oracle");
      c.oracle.max_step = number_or(o, "max_step", 0.0, "oracle");
      if (o.contains("potential")) {
        const auto& p = o.at("potential");
        c.oracle.potential.kind = text_or(p, "kind", "none");
        c.oracle.potential.stiffness = number_or(p, "stiffness", 0.0, "oracle.potential");
        c.oracle.potential.depth = number_or(p, "depth", 0.0, "oracle.potential");
        c.oracle.potential.center = number_or(p, "center", 0.0, "oracle.potential");
        c.oracle.potential.halfwidth = number_or(p, "halfwidth", 0.0, "oracle.potential");
      }
    } else {
      c.oracle.grid.counts.assign(static_cast<std::size_t>(std::max(c.consts.n, 1)), 1024);
    }
    if (doc.contains("decayfit")) {
      const auto& d = doc.at("decayfit");
      c.decayfit = DecayWindow{number(d, "zmin", "decayfit"), number(d, "zmax", "decayfit")};
    }
    if (doc.contains("compare")) {
      const auto& m = doc.at("compare");
      auto& s = c.compare;
      s.modulus_rtol = number_or(m, "modulus_rtol", s.modulus_rtol, "compare");
      s.phase_tol = number_or(m, "phase_tol", s.phase_tol, "compare");
      s.draws = static_cast<std::size_t>(number_or(m, "draws", 0, "compare"));
      s.position_lo = number_or(m, "position_lo", s.position_lo, "compare");
      s.position_hi = number_or(m, "position_hi", s.position_hi, "compare");
      s.time_lo = number_or(m, "time_lo", s.time_lo, "compare");
      s.time_hi = number_or(m, "time_hi", s.time_hi, "compare");
      s.seed = static_cast<std::uint64_t>(number_or(m, "seed", 0, "compare"));
      s.min_relative_modulus = number_or(m, "min_relative_modulus", s.min_relative_modulus, "compare");
    }
    if (doc.contains("output")) {
      c.output.dir = text_or(doc.at("output"), "dir", c.output.dir);
      c.output.prefix = text_or(doc.at("output"), "prefix", c.output.prefix);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("configuration is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json out;
  out["consts"] = {{"hbar", c.consts.hbar}, {"alpha", c.consts.alpha}, {"n", c.consts.n}};
  out["coupling"] = coupling_json(c.coupling);
  out["environment"] = env_json(c.env);
  out["body"] = body_json(c.body);
  out["query"] = {{"a", c.a}, {"b", c.b}};
  if (!c.time.values.empty()) {
    out["time"] = {{"values", c.time.values}};
  } else {
    out["time"] = {{"start", c.time.start}, {"stop", c.time.stop}, {"count", c.time.count}};
  }
  out["engine"] = to_string(c.engine);
  const std::size_t points = c.oracle.grid.counts.empty() ? 0 : c.oracle.grid.counts.front();
  out["oracle"] = {{"points", points},
                   {"spacing", c.oracle.grid.spacing},
                   {"origin", c.oracle.grid.origin},
                   {"max_step", c.oracle.max_step},
                   {"potential",
                    {{"kind", c.oracle.potential.kind},
                     {"stiffness", c.oracle.potential.stiffness},
                     {"depth", c.oracle.potential.depth},
                     {"center", c.oracle.potential.center},
                     {"halfwidth", c.oracle.potential.halfwidth}}}};
  if (c.decayfit) out["decayfit"] = {{"zmin", c.decayfit->zmin}, {"zmax", c.decayfit->zmax}};
  const auto& s = c.compare;
  out["compare"] = {{"modulus_rtol", s.modulus_rtol}, {"phase_tol", s.phase_tol},
                    {"draws", s.draws},               {"position_lo", s.position_lo},
                    {"position_hi", s.position_hi},   {"time_lo", s.time_lo},
                    {"time_hi", s.time_hi},           {"seed", s.seed},
                    {"min_relative_modulus", s.min_relative_modulus}};
  out["output"] = {{"dir", c.output.dir}, {"prefix", c.output.prefix}};
  return out;
}

ValidationReport validate(const RunConfig& c) {
  ValidationReport report = decoh::validate(c.consts, c.coupling, c.env);
  auto add = [&](bool ok, const std::string& what) {
    if (!ok) report.failures.push_back(what);
  };
  const auto body = decoh::validate(c.body);
  report.failures.insert(report.failures.end(), body.failures.begin(), body.failures.end());
  add(std::isfinite(c.a) && std::isfinite(c.b), "query positions finite");
  const auto times = c.time.expand();
  add(!times.empty(), "time grid count ≥ 1");
  add(std::all_of(times.begin(), times.end(), [](double t) { return std::isfinite(t); }), "times finite");
  bool increasing = true;
  for (std::size_t j = 1; j < times.size(); ++j) increasing = increasing && times[j] > times[j - 1];
  add(increasing, "times strictly increasing");
  const auto& kind = c.oracle.potential.kind;
  add(kind == "none" || kind == "harmonic" || kind == "box", "oracle.potential.kind is none, harmonic or box");
  if (c.engine != Engine::Analytic) {
    add(c.consts.n <= 3, "engine=oracle requires n ≤ 3");
    add(!c.env.has_delta(), "engine=oracle requires a non-Delta environment");
    add(c.coupling.kind != CouplingKind::MHC, "engine=oracle does not support MHC coupling");
    if (c.consts.n >= 1 && c.consts.n <= 3) {
      try {
        oracle::validate_grid(c.oracle.grid);
      } catch (const Error& e) {
        report.failures.push_back(std::string("oracle grid: ") + e.what());
      }
    }
  }
  if (c.decayfit) add(c.decayfit->zmax > c.decayfit->zmin, "decayfit.zmax > decayfit.zmin");
  add(c.compare.modulus_rtol > 0 && c.compare.phase_tol > 0, "compare tolerances > 0");
  add(c.compare.time_hi >= c.compare.time_lo && c.compare.position_hi >= c.compare.position_lo,
      "compare draw ranges ordered");
  return report;
}

}  // namespace decoh::cli
