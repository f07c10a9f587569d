// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "decoh/comdist.hpp"
#include "decoh/error.hpp"
#include "decoh/oracle.hpp"
#include "decoh/rdm.hpp"

using namespace decoh;
using boost::math::quadrature::gauss_kronrod;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& fn) {
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
}

const BodyAmplitude kPacket{GaussianPacket{0.0, 1.0, 0.4, 1.0}};

double initial(double a, double b) { return std::abs(kPacket(a)) * std::abs(kPacket(b)); }

std::vector<double> linspace(double a, double b, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t j = 0; j < count; ++j) v[j] = a + (b - a) * static_cast<double>(j) / static_cast<double>(count - 1);
  return v;
}

EnvState random_product(std::mt19937_64& rng, int n, bool with_delta = true) {
  std::uniform_real_distribution<double> u(-2, 2);
  std::uniform_int_distribution<int> family(0, with_delta ? 3 : 2);
  std::vector<ParticleDensity> ps;
  for (int i = 0; i < n; ++i) {
    const double loc = u(rng), w = 0.1 + std::abs(u(rng));
    switch (family(rng)) {
      case 0: ps.push_back(Gaussian{loc, w}); break;
      case 1: ps.push_back(Box{loc, w}); break;
      case 2: ps.push_back(Cauchy{loc, w}); break;
      default: ps.push_back(Delta{loc}); break;
    }
  }
  return make_product_env(ps, n);
}

GridWave gaussian_wave(const UniformGrid& grid, double mean, double s, double weight, double kick) {
  GridWave w{grid, std::vector<cplx>(grid.size())};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.node(j);
    w.amplitudes[j] = std::polar(std::exp(-(x - mean) * (x - mean) / (4 * s * s)), kick * x);
  }
  const double scale = std::sqrt(weight / w.norm_squared());
  for (auto& a : w.amplitudes) a *= scale;
  return w;
}

Outcome sinc_law() {
  const double L = 0.8, k = 1.0, sep = 1.0;
  PhysConsts c;
  auto env = make_product_env({Box{0.0, L}}, 1);
  double worst = 0.0;
  for (double z : linspace(-50 / L, 50 / L, 4001)) {
    const double t = z / (k * sep);
    const double f = rdm_sc(kPacket, env, 0.5, -0.5, t, c, Coupling::sc(k)).modulus / initial(0.5, -0.5);
    const double x = z * L;
    worst = std::max(worst, std::abs(f - (x == 0 ? 1.0 : std::abs(std::sin(x) / x))));
  }
  const double t0 = box_first_zero_time(Coupling::sc(k), sep, L, c);
  const auto times = linspace(0.0, 3.0 * t0 / 2, 1501);
  auto cv = curve(ElementQuery{kPacket, env, 0.5, -0.5, c, Coupling::sc(k)}, times);
  std::size_t first = 0;
  for (std::size_t j = 1; j + 1 < times.size(); ++j) {
    if (cv.elements[j].modulus <= cv.elements[j - 1].modulus && cv.elements[j].modulus <= cv.elements[j + 1].modulus) {
      first = j;
      break;
    }
  }
  const double step = times[1] - times[0];
  const double miss = std::abs(times[first] - t0);
  return {worst <= 1e-12 && first > 0 && miss <= step,
          fmt("max |error| %.2e over z in [-50/L, 50/L]; first zero at t=%.6f vs %.6f (step %.1e)", worst,
              times[first], t0, step)};
}

Outcome delta_constancy() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50, 50);
  auto env = make_product_env({Delta{0.3}, Delta{-1.2}}, 2);
  PhysConsts c{1.0, 0.7, 2};
  const double m0 = rdm_sc(kPacket, env, 0.9, -0.4, 0.0, c, Coupling::sc(1.3)).modulus;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    worst = std::max(worst, std::abs(rdm_sc(kPacket, env, 0.9, -0.4, u(rng), c, Coupling::sc(1.3)).modulus - m0));
  }
  return {worst <= 1e-12, fmt("max |rho(t)| - |rho(0)| = %.2e over 100 random t", worst)};
}

Outcome gaussian_decay() {
  const double s = 1.0, mean = 0.25;
  auto env = make_product_env({Gaussian{mean, s}}, 1);
  double quad_err = 0.0;
  for (double z : linspace(0.1, 6.0, 30)) {
    auto w = [&](double x) { return std::exp(-0.5 * (x - mean) * (x - mean) / (s * s)) / (s * std::sqrt(2 * kPi)); };
    const double re = gauss_kronrod<double, 61>::integrate([&](double x) { return std::cos(z * x) * w(x); },
                                                           mean - 40, mean + 40, 20, 1e-14);
    const double im = gauss_kronrod<double, 61>::integrate([&](double x) { return std::sin(z * x) * w(x); },
                                                           mean - 40, mean + 40, 20, 1e-14);
    quad_err = std::max(quad_err, std::abs(std::abs(characteristic(env, z, 1)) - std::hypot(re, im)));
  }
  const UniformGrid grid{{1024}, 0.05, -25.6};
  auto phi = oracle::sample_product(env, grid, 1);
  PhysConsts c;
  double oracle_err = 0.0;
  for (double t : linspace(0.1, 2.0, 10)) {
    const auto an = rdm_sc(kPacket, env, 0.6, -0.4, t, c, Coupling::sc(1.0));
    const cplx o = oracle::rdm_element_oracle(kPacket, phi, 0.6, -0.4, t, c, Coupling::sc(1.0), {});
    oracle_err = std::max(oracle_err, std::abs(std::abs(o) - an.modulus) / an.modulus);
  }
  return {quad_err <= 1e-8 && oracle_err <= 1e-6,
          fmt("vs quadrature %.2e (tol 1e-8); vs 1024-point oracle %.2e relative (tol 1e-6)", quad_err, oracle_err)};
}

Outcome short_time_law() {
  struct Case {
    const char* name;
    EnvState env;
    int n;
  };
  const Case cases[] = {{"gaussian", make_product_env({Gaussian{0.5, 1.3}}, 1), 1},
                        {"box", make_product_env({Box{0.0, 0.7}}, 1), 1},
                        {"triangle", make_product_env({Box{0.0, 1.0}}, 2), 2}};
  bool ok = true;
  std::string detail;
  for (const auto& cs : cases) {
    const double var = moments(cs.env, cs.n).variance;
    const double z = std::sqrt(1e-3 / var);
    const double ratio = (1 - std::abs(characteristic(cs.env, z, cs.n))) / (var * z * z / 2);
    ok = ok && ratio >= 0.999 && ratio <= 1.001;
    detail += fmt("%s %.6f ", cs.name, ratio);
  }
  return {ok, detail + "(window [0.999, 1.001])"};
}

Outcome never_exceed() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 3);
  std::uniform_int_distribution<int> count(1, 6);
  int violations = 0;
  double worst = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const int n = count(rng);
    auto env = random_product(rng, n);
    PhysConsts c{0.5 + std::abs(u(rng)), u(rng), n};
    const auto cp = (i % 2) ? Coupling::sc(u(rng)) : Coupling::mc(u(rng));
    const double a = u(rng), b = u(rng), t = 10 * u(rng);
    const double m0 = rdm_element(kPacket, env, a, b, 0.0, c, cp).modulus;
    const double m = rdm_element(kPacket, env, a, b, t, c, cp).modulus;
    worst = std::max(worst, m - m0);
    if (m > m0 + 1e-12) ++violations;
  }
  return {violations == 0, fmt("%d violations in 1000 draws; max excess %.2e", violations, worst)};
}

Outcome two_time_symmetry() {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-3, 3);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + i % 4;
    auto env = random_product(rng, n);
    PhysConsts c{1.0, u(rng), n};
    const auto cp = Coupling::sc(u(rng));
    const double a = u(rng), b = u(rng), t = 5 * u(rng);
    worst = std::max(worst, std::abs(rdm_sc(kPacket, env, a, b, t, c, cp).modulus -
                                     rdm_sc(kPacket, env, a, b, -t, c, cp).modulus));
  }
  return {worst <= 1e-12, fmt("max |m(t) - m(-t)| = %.2e over 200 mixed-family draws", worst)};
}

Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  struct Case {
    const char* name;
    EnvState env;
    PhysConsts consts;
    UniformGrid grid;
  };
  // Box edges sit at node midpoints so the sampled box has exactly the right width.
  const double d1 = 1.0 / 1024, d2 = 1.0 / 256;
  const Case cases[] = {
      {"gaussian n=1", make_product_env({Gaussian{0.2, 1.0}}, 1), PhysConsts{1.0, 1.0, 1}, UniformGrid{{1024}, 0.05, -25.6}},
      {"gaussian n=2", make_product_env({Gaussian{0.0, 1.0}, Gaussian{0.3, 0.8}}, 2), PhysConsts{1.0, 1.0, 2},
       UniformGrid{{256, 256}, 0.0625, -8.0}},
      {"box n=1", make_product_env({Box{0.0, 1.0}}, 1), PhysConsts{1.0, 0.1, 1},
       UniformGrid{{4096}, d1, -2048 * d1 + d1 / 2}},
      {"box n=2", make_product_env({Box{0.0, 1.0}}, 2), PhysConsts{1.0, 0.1, 2},
       UniformGrid{{1024, 1024}, d2, -512 * d2 + d2 / 2}},
  };
  double max_rel = 0.0, max_phase = 0.0;
  std::string detail;
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& cs : cases) {
    auto phi = oracle::sample_product(cs.env, cs.grid, cs.consts.n);
    double rel = 0.0, phase = 0.0;
    int scored = 0;
    while (scored < 20) {
      const double a = u(rng), b = u(rng), t = u(rng);
      const auto an = rdm_sc(kPacket, cs.env, a, b, t, cs.consts, Coupling::sc(1.0));
      // relative error is ill-conditioned next to a zero of the modulus
      if (an.modulus < 1e-2 * initial(a, b)) continue;
      const cplx o = oracle::rdm_element_oracle(kPacket, phi, a, b, t, cs.consts, Coupling::sc(1.0), {});
      rel = std::max(rel, std::abs(std::abs(o) - an.modulus) / an.modulus);
      phase = std::max(phase, std::abs(std::arg(o * std::conj(an.value))));
      ++scored;
    }
    max_rel = std::max(max_rel, rel);
    max_phase = std::max(max_phase, phase);
    detail += fmt("%s %.1e/%.1e; ", cs.name, rel, phase);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {max_rel < 1e-5 && max_phase < 1e-6 && seconds < 60,
          detail + fmt("max rel %.2e (tol 1e-5), max phase %.2e rad (tol 1e-6), %.1f s", max_rel, max_phase, seconds)};
}

Outcome v_independence() {
  const auto psi = kPacket;
  oracle::Potential harmonic = [](double x) { return 0.5 * x * x; };

  const UniformGrid g1{{1024}, 0.05, -25.6};
  auto phi1 = oracle::sample_product(make_product_env({Gaussian{0.0, 1.0}}, 1), g1, 1);
  const auto r1 = oracle::v_independence_check(psi, phi1, 0.6, -0.4, 1.5, PhysConsts{}, Coupling::sc(1.0), harmonic,
                                               oracle::StepControl{1e-3});
  const double d1 = r1.delta / r1.modulus_0;

  const UniformGrid g2{{128, 128}, 0.125, -8.0};
  auto phi2 = oracle::sample_product(make_product_env({Gaussian{0.0, 1.0}}, 2), g2, 2);
  const auto r2 = oracle::v_independence_check(psi, phi2, 0.5, -0.5, 1.0, PhysConsts{1.0, 0.5, 2}, Coupling::sc(1.0),
                                               harmonic, oracle::StepControl{5e-3});
  const double d2 = r2.delta / r2.modulus_0;

  const UniformGrid g3{{512}, 0.05, -12.8};
  auto phi3 = oracle::sample_product(make_product_env({Gaussian{0.0, 1.0}}, 1), g3, 1);
  oracle::ConditionedWave w0{g3, phi3.amplitudes, 0.5, 0.0};
  auto run = [&](double h) {
    return oracle::evolve_conditioned(w0, 2.0, PhysConsts{}, Coupling::sc(1.0), harmonic, oracle::StepControl{0, false, h});
  };
  const auto a = run(0.1), b = run(0.05), c = run(0.025);
  const double ratio = oracle::distance(a, b) / oracle::distance(b, c);
  return {d1 < 1e-5 && d2 < 1e-4 && ratio >= 3.5 && ratio <= 4.5,
          fmt("n=1 delta %.2e (tol 1e-5), n=2 delta %.2e (tol 1e-4), Richardson ratio %.4f", d1, d2, ratio)};
}

Outcome schwarz_bound() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  double slack = 1.0;
  for (int s = 0; s < 20; ++s) {
    const UniformGrid grid{{64, 64}, 0.25, -8.0};
    GridWave a{grid, std::vector<cplx>(grid.size())}, b = a;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double x = grid.node(j / 64), y = grid.node(j % 64);
      a.amplitudes[j] = std::polar(std::exp(-(x * x + y * y) / 4 + u(rng) * 0.3), 3 * u(rng));
      b.amplitudes[j] = std::polar(std::exp(-((x - 1) * (x - 1) + y * y) / 6), 0.7 * x - 0.2 * y);
    }
    const double wa = 0.2 + 0.6 * std::abs(u(rng));
    const double na = std::sqrt(wa / a.norm_squared()), nb = std::sqrt((1 - wa) / b.norm_squared());
    for (auto& v : a.amplitudes) v *= na;
    for (auto& v : b.amplitudes) v *= nb;
    auto state = make_entangled({0.5, -0.5}, {a, b}, 2);
    auto od = overlap_density(state, 0.5, -0.5);
    for (std::size_t j = 0; j < od.grid.count; ++j) {
      slack = std::min(slack, std::sqrt(od.diag_a[j] * od.diag_b[j]) - std::abs(od.cross[j]));
    }
  }

  const UniformGrid grid{{1024}, 0.05, -25.6};
  auto sa = gaussian_wave(grid, -0.5, 0.8, 0.4, 0.0);
  auto sb = gaussian_wave(grid, 0.7, 1.1, 0.6, 0.4);
  auto state = make_entangled({1.0, -1.0}, {sa, sb}, 1);
  PhysConsts c{1.0, 1.2, 1};
  double err = 0.0;
  for (double t : linspace(0.1, 2.0, 12)) {
    const auto an = rdm_entangled(state, 1.0, -1.0, t, c, Coupling::sc(0.8));
    const cplx o = oracle::rdm_element_oracle_entangled(state, 1.0, -1.0, t, c, Coupling::sc(0.8), {});
    err = std::max(err, std::abs(std::abs(o) - an.modulus) / an.modulus);
  }
  return {slack >= -1e-10 && err < 1e-5,
          fmt("min slack %.2e over 20 states (tol -1e-10); entangled oracle rel error %.2e (tol 1e-5)", slack, err)};
}

Outcome coupling_equalities() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-2, 2);
  double hc = 0.0, mhc = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + i % 3;
    auto env = random_product(rng, n);
    PhysConsts c{0.5 + std::abs(u(rng)), u(rng), n};
    const double a = u(rng), b = u(rng), t = 3 * u(rng), k = u(rng);
    hc = std::max(hc, std::abs(rdm_hc(kPacket, env, a, b, t, c, Coupling::hc(k)).modulus -
                               rdm_sc(kPacket, env, a, b, t, c, Coupling::sc(k)).modulus));
    const double mu = 0.3 + std::abs(u(rng)), nu = u(rng);
    const auto m = Coupling::mhc(mu, nu);
    mhc = std::max(mhc, std::abs(rdm_mhc(kPacket, env, a, b, t, c, m).modulus -
                                 rdm_mc(kPacket, env, a, b, t, c, Coupling::mc(*m.gamma)).modulus));
  }
  return {hc <= 1e-15 && mhc <= 1e-15, fmt("max |hc - sc| %.1e, max |mhc - mc| %.1e over 100 draws", hc, mhc)};
}

Outcome timescale_scaling() {
  const double L = 0.9;
  auto env = make_product_env({Box{0.0, L}}, 1);
  auto wide = make_product_env({Box{0.0, 2 * L}}, 1);
  const auto tau = [](const TimescaleReport& r) { return r.tau; };
  const PhysConsts c;
  const double base = tau(decoherence_time(Coupling::sc(1.3), 0.7, env, c));
  const double ratios[] = {
      timescale(1.0, 2, 1.3, 0.7, std::sqrt(L * L / 3)) / timescale(1.0, 1, 1.3, 0.7, std::sqrt(L * L / 3)),
      tau(decoherence_time(Coupling::sc(2.6), 0.7, env, c)) / base,
      tau(decoherence_time(Coupling::sc(1.3), 1.4, env, c)) / base,
      tau(decoherence_time(Coupling::sc(1.3), 0.7, wide, c)) / base,
      tau(decoherence_time(Coupling::mc(2.6), 0.7, env, c)) / tau(decoherence_time(Coupling::mc(1.3), 0.7, env, c)),
  };
  bool ok = true;
  std::string detail;
  for (double r : ratios) {
    ok = ok && r == 0.5;
    detail += fmt("%.17g ", r);
  }
  return {ok, "ratios under doubling of n, k, |dX|, d_eta, gamma: " + detail};
}

Outcome decay_classification() {
  auto fit = [](EnvState env, int n, double zmin, double zmax, std::size_t count) {
    PhysConsts c{1.0, 1.0, n};
    ElementQuery q{kPacket, std::move(env), 1.0, 0.0, c, Coupling::sc(1.0)};
    return decay_fit(curve(q, linspace(0.0, zmax / n, count)), DecayWindow{zmin, zmax});
  };
  const double gamma = 0.6, s = 0.9;
  const auto cauchy = fit(make_product_env({Cauchy{0.0, gamma}}, 1), 1, 1, 30, 300);
  const auto gauss = fit(make_product_env({Gaussian{0.0, s}}, 1), 1, 0.5, 6, 300);
  const auto box = fit(make_product_env({Box{0.0, 1.0}}, 1), 1, 10, 400, 20000);
  const auto tri = fit(make_product_env({Box{0.0, 1.0}}, 2), 2, 20, 800, 20000);
  const bool ok = cauchy.model == DecayModel::Exponential && std::abs(cauchy.rate / gamma - 1) <= 0.05 &&
                  gauss.model == DecayModel::Gaussian && std::abs(gauss.rate / (s * s / 2) - 1) <= 0.05 &&
                  box.model == DecayModel::Power && std::abs(box.order - 1) <= 0.2 &&
                  tri.model == DecayModel::Power && std::abs(tri.order - 2) <= 0.2;
  return {ok, fmt("cauchy %s rate/gamma %.4f; gaussian %s rate/(var/2) %.4f; box %s order %.3f; triangle %s order %.3f",
                  to_string(cauchy.model).c_str(), cauchy.rate / gamma, to_string(gauss.model).c_str(),
                  gauss.rate / (s * s / 2), to_string(box.model).c_str(), box.order, to_string(tri.model).c_str(),
                  tri.order)};
}

}  // namespace

int main() {
  report(1, "sinc law", sinc_law);
  report(2, "delta constancy", delta_constancy);
  report(3, "gaussian decay", gaussian_decay);
  report(4, "short-time law", short_time_law);
  report(5, "never-exceed bound", never_exceed);
  report(6, "two-time symmetry", two_time_symmetry);
  report(7, "oracle equivalence", oracle_equivalence);
  report(8, "V-independence", v_independence);
  report(9, "Schwarz bound", schwarz_bound);
  report(10, "coupling phase equalities", coupling_equalities);
  report(11, "timescale scaling", timescale_scaling);
  report(12, "decay-order classification", decay_classification);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
