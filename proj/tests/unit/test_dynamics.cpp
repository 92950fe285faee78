#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qpkdv/dynamics.hpp"

using namespace qpkdv;

namespace {

std::shared_ptr<const FrequencyVector> alpha2() {
  return std::make_shared<const FrequencyVector>(std::vector<std::string>{"1", "sqrt(2)"});
}

CoefficientField smooth_real(const std::shared_ptr<const FrequencyVector>& a, int m, std::uint64_t seed,
                             double g00) {
  const auto f = random_field(a, TruncationBox(*a, m), seed, bracket_decay(2.0), true);
  return f.scaled(g00 / gnorm(f, WeightProfile(std::vector<double>(a->dimension(), 0.0), 0)));
}

double field_mass(const CoefficientField& f) { return gnorm(f, WeightProfile(std::vector<double>(f.dimension(), 0.0), 0)); }

}  // namespace

TEST_CASE("rhs of zero and quadratic scaling") {
  const auto a = alpha2();
  const TruncationBox box(*a, 4);
  CHECK(rhs(CoefficientField(a), box).empty());
  const CoefficientField e(a, {{{1, 0}, 1.0}, {{-1, 0}, 1.0}}, true);
  std::vector<double> logs;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto r = rhs(e.scaled(eps), box);
    // Nonlinear output lives on (+-2, 0); the linear part stays on (+-1, 0).
    const double nl = std::abs(r.coefficient({2, 0}));
    logs.push_back(std::log10(nl));
  }
  for (std::size_t i = 1; i < logs.size(); ++i) CHECK(logs[i - 1] - logs[i] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("rhs matches term-by-term differentiation") {
  const auto a = alpha2();
  const TruncationBox box(*a, 3);
  const CoefficientField u(a, {{{1, 0}, {0.3, 0.1}}, {{0, 1}, {-0.2, 0.5}}, {{1, -1}, 0.7}, {{-2, 1}, {0.1, -0.4}},
                               {{2, 2}, 0.05}, {{-1, -1}, {0.0, 0.3}}, {{3, 0}, 0.2}});
  const auto r = rhs(u, box);
  for (const auto& k : box.modes()) {
    const double xi = to_double(generated_frequency(*a, k));
    Complex conv{};
    for (const auto& m1 : u.modes())
      for (const auto& m2 : u.modes())
        if (m1.k + m2.k == k) conv += m1.c * m2.c;
    const Complex expected = Complex(0, xi * xi * xi) * u.coefficient(k) - Complex(0, xi) * conv;
    CHECK(std::abs(r.coefficient(k) - expected) < 1e-13);
  }
}

TEST_CASE("integrate zero and linear runs") {
  const auto a = alpha2();
  IntegratorConfig cfg;
  cfg.T = 0.5;
  cfg.dt = 1e-2;
  cfg.box = 4;
  const auto z = integrate(CoefficientField(a), cfg);
  for (std::size_t j = 0; j < z.size(); ++j) CHECK(z.state(j).empty());
  CHECK(conservation_report(z).g00_drift == 0.0);

  const auto f = smooth_real(a, 4, 9, 0.3);
  cfg.nonlinear = false;
  const auto lin = integrate(f, cfg);
  CHECK(conservation_report(lin).amplitude_drift <= 1e-14);
  const auto back_cfg = [&] {
    IntegratorConfig c = cfg;
    c.backward = true;
    return c;
  }();
  const auto there = lin.state(lin.size() - 1);
  const auto back = integrate(there, back_cfg);
  CHECK(back.times().back() == -0.5);
  CHECK(max_abs_difference(back.state(back.size() - 1), f) < 1e-12);
  CHECK(max_abs_difference(there, linear_propagator(f, 0.5)) < 1e-13);
}

TEST_CASE("integrate preserves real symmetry and mean structure") {
  const auto a = alpha2();
  const auto f = smooth_real(a, 5, 10, 0.1);
  IntegratorConfig cfg;
  cfg.T = 0.2;
  cfg.dt = 1e-3;
  cfg.box = 5;
  cfg.record_every = 50;
  const auto tr = integrate(f, cfg);
  CHECK(tr.size() == 5);
  const auto rep = conservation_report(tr);
  CHECK(rep.symmetry_drift == 0.0);
  CHECK(rep.zero_mode_mass == 0.0);
  CHECK(rep.g00_drift < 1e-8);
  CHECK(rep.leakage_max > 0.0);
  for (std::size_t j = 0; j < tr.size(); ++j) CHECK(std::abs(evaluate(tr.state(j), 0.37).imag()) < 1e-12);
}

TEST_CASE("exponential Euler is first order, RK4 fourth order") {
  const auto a = std::make_shared<const FrequencyVector>(std::vector<std::string>{"1"});
  const auto f = smooth_real(a, 6, 3, 0.1);
  auto terminal = [&](double dt, Scheme s) {
    IntegratorConfig c;
    c.T = 0.5;
    c.dt = dt;
    c.box = 6;
    c.scheme = s;
    c.record_every = 1 << 20;
    const auto tr = integrate(f, c);
    return tr.state(tr.size() - 1);
  };
  const auto ref = terminal(0.01 / 16, Scheme::ExponentialRK4);
  const double r4 = max_abs_difference(terminal(0.02, Scheme::ExponentialRK4), ref) /
                    max_abs_difference(terminal(0.01, Scheme::ExponentialRK4), ref);
  CHECK(r4 > 12.0);
  CHECK(r4 < 20.0);
  const double r1 = max_abs_difference(terminal(0.02, Scheme::ExponentialEuler), ref) /
                    max_abs_difference(terminal(0.01, Scheme::ExponentialEuler), ref);
  CHECK(r1 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("numerical abort carries the step index") {
  const auto a = alpha2();
  const CoefficientField f(a, {{{3, 3}, 1e150}, {{-3, -3}, 1e150}}, true);
  IntegratorConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 0.1;
  cfg.box = 6;
  try {
    integrate(f, cfg);
    FAIL("expected abort");
  } catch (const NumericalAbort& e) {
    CHECK(e.step() >= 1);
  }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(uniform_grid(0.1, 0.2), ConfigError);
  CHECK_THROWS_AS(uniform_grid(-1, 0.1), ConfigError);
  const auto g = uniform_grid(1.0, 0.3);
  CHECK(g.size() == 5);
  CHECK(g.back() == 1.0);
  CHECK(g[1] == doctest::Approx(0.25));
}

TEST_CASE("duhamel of the zero trajectory is the free flow") {
  const auto a = alpha2();
  const TruncationBox box(*a, 3);
  auto modes = std::make_shared<const ModeSet>(ModeSet::from_box(*a, box));
  const auto f = smooth_real(a, 3, 4, 0.2);
  const auto times = uniform_grid(0.3, 0.01);
  const auto zero = free_trajectory(CoefficientField(a, {}, true), modes, times);
  const auto m = duhamel_map(f, zero);
  for (std::size_t j = 0; j < times.size(); ++j)
    CHECK(max_abs_difference(m.state(j), linear_propagator(f, times[j])) < 1e-15);
}

TEST_CASE("duhamel on a free trajectory matches the closed form") {
  const auto a = alpha2();
  const CoefficientField f(a, {{{-3, 0}, {0.8, 0.1}}, {{3, -2}, {0.2, -0.5}}});
  std::vector<MultiIndex> in_modes{{-3, 0}, {3, -2}};
  std::vector<MultiIndex> out_modes{{-6, 0}, {0, -2}, {6, -4}, {-3, 0}, {3, -2}};
  auto in = std::make_shared<const ModeSet>(*a, in_modes);
  auto out = std::make_shared<const ModeSet>(*a, out_modes);
  const double T = 0.5;
  const auto times = uniform_grid(T, T / 2048);
  const auto u = duhamel_map(f, free_trajectory(f, in, times), out);
  const double sq2 = std::sqrt(2.0);
  auto xi = [&](const MultiIndex& k) { return static_cast<double>(k[0]) + sq2 * static_cast<double>(k[1]); };
  double amax = 0.0, err = 0.0;
  for (const std::size_t j : {std::size_t{0}, std::size_t{1}, std::size_t{777}, times.size() - 1}) {
    const double t = times[j];
    for (const auto& k : out_modes) {
      Complex nl{};
      for (std::size_t x = 0; x < in_modes.size(); ++x)
        for (std::size_t y = x; y < in_modes.size(); ++y) {
          if (in_modes[x] + in_modes[y] != k) continue;
          const double mult = x == y ? 1.0 : 2.0;
          const double phi = 3 * xi(k) * xi(in_modes[x]) * xi(in_modes[y]);
          const Complex integral = std::abs(phi * t) < 1e-12 ? Complex(t) : (1.0 - std::polar(1.0, -phi * t)) / Complex(0, phi);
          nl += Complex(0, -xi(k)) * mult * f.coefficient(in_modes[x]) * f.coefficient(in_modes[y]) * integral;
        }
      const double x3 = xi(k) * xi(k) * xi(k);
      const Complex expected = std::polar(1.0, x3 * t) * (f.coefficient(k) + nl);
      const Complex got = u.state(j).coefficient(k);
      amax = std::max(amax, std::abs(expected));
      err = std::max(err, std::abs(got - expected));
    }
  }
  CHECK(err < 1e-8 * amax);
}

TEST_CASE("duhamel is affine in the datum") {
  const auto a = alpha2();
  auto modes = std::make_shared<const ModeSet>(ModeSet::from_box(*a, TruncationBox(*a, 3)));
  const auto f1 = smooth_real(a, 3, 1, 0.1);
  const auto f2 = smooth_real(a, 2, 2, 0.1);
  const auto times = uniform_grid(0.2, 0.01);
  const auto u = free_trajectory(f1, modes, times);
  const auto m12 = duhamel_map(f1 + f2, u);
  const auto m1 = duhamel_map(f1, u);
  const auto m2 = duhamel_map(f2, u);
  const auto m0 = duhamel_map(CoefficientField(a, {}, true), u);
  for (std::size_t j = 0; j < times.size(); j += 5)
    CHECK(max_abs_difference(m12.state(j), m1.state(j) + m2.state(j) - m0.state(j)) < 1e-15);
  CHECK(m12.real_symmetric());
  CHECK(m12.state(times.size() - 1).symmetry_defect() == 0.0);
  CHECK_THROWS_AS(duhamel_map(f1, free_trajectory(f1, modes, {0.0, 0.1})), DomainError);
}

TEST_CASE("duhamel with three nodes uses the quadratic rule") {
  const auto a = alpha2();
  const CoefficientField f(a, {{{1, 0}, 0.5}});
  auto in = std::make_shared<const ModeSet>(*a, std::vector<MultiIndex>{{1, 0}});
  auto out = std::make_shared<const ModeSet>(*a, std::vector<MultiIndex>{{1, 0}, {2, 0}});
  const auto u = duhamel_map(f, free_trajectory(f, in, {0.0, 0.05, 0.1}), out);
  const double phi = 3 * 2 * 1 * 1;
  const Complex integral = (1.0 - std::polar(1.0, -phi * 0.1)) / Complex(0, phi);
  const Complex expected = std::polar(1.0, 8 * 0.1) * Complex(0, -2) * 0.25 * integral;
  CHECK(std::abs(u.state(2).coefficient({2, 0}) - expected) < 1e-15);
}

TEST_CASE("picard on zero data and small data") {
  const auto a = alpha2();
  PicardConfig cfg;
  cfg.T = 0.1;
  cfg.dt = 1e-3;
  cfg.box = 5;
  cfg.profile = WeightProfile({0.3, 0.3}, -0.5);
  const auto zero = picard_iterate(CoefficientField(a, {}, true), cfg);
  CHECK(zero.report.converged);
  CHECK(zero.report.iterations == 0);

  auto f = smooth_real(a, 5, 21, 1.0);
  f = f.scaled(1e-2 / gnorm(f, cfg.profile));
  const auto res = picard_iterate(f, cfg);
  CHECK(res.report.converged);
  CHECK_FALSE(res.report.diverged);
  for (const double r : res.report.ratios) CHECK(r <= 0.5);
  IntegratorConfig ic;
  ic.T = cfg.T;
  ic.dt = cfg.dt;
  ic.box = cfg.box;
  const auto tr = integrate(f, ic);
  CHECK(max_abs_difference(tr.state(tr.size() - 1), res.trajectory.state(res.trajectory.size() - 1)) < 1e-6);

  const auto again = duhamel_map(f, res.trajectory);
  double moved = 0.0;
  for (std::size_t j = 0; j < again.size(); ++j)
    moved = std::max(moved, gnorm(again.state(j) - res.trajectory.state(j), cfg.profile));
  CHECK(moved < 2 * cfg.tol);
  CHECK_THROWS_AS(picard_iterate(f, [&] { auto c = cfg; c.m_max = 1; return c; }()), ConfigError);
}

TEST_CASE("picard reports divergence for large data") {
  const auto a = alpha2();
  PicardConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 2e-3;
  cfg.box = 4;
  cfg.m_max = 30;
  cfg.profile = WeightProfile({0.3, 0.3}, -0.5);
  auto f = smooth_real(a, 4, 2, 1.0).scaled(20.0);
  const auto res = picard_iterate(f, cfg);
  CHECK_FALSE(res.report.converged);
  CHECK(res.report.diverged);
}

TEST_CASE("existence time") {
  CHECK(existence_time(0.5, 0.1) == 1.0);
  CHECK(existence_time(1.0, 0.1, 3.0) == 3.0);
  CHECK(existence_time(2.0, 0.1, 1.5) == doctest::Approx(1.5 * std::pow(2.0, -10)).epsilon(1e-14));
  double prev = 10.0;
  for (double r = 0.1; r < 10; r *= 1.3) {
    const double t = existence_time(r, 0.11);
    CHECK(t <= prev);
    prev = t;
  }
  CHECK_THROWS_AS(existence_time(1.0, 0.125), DomainError);
  CHECK_THROWS_AS(existence_time(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(existence_time(-1.0, 0.1), DomainError);
}

TEST_CASE("time window") {
  const TimeWindow w(0.5);
  CHECK(w(0.0) == 1.0);
  CHECK(w(0.5) == 1.0);
  CHECK(w(1.0) == 0.0);
  CHECK(w(-1.2) == 0.0);
  CHECK(w(0.75) == doctest::Approx(0.5));
  for (double t = -1.5; t <= 1.5; t += 0.01) {
    CHECK(w(t) >= 0.0);
    CHECK(w(t) <= 1.0);
    CHECK(w(t) == w(-t));
  }
  CHECK(TimeWindow::chi(1.3) > TimeWindow::chi(1.6));
  CHECK_THROWS_AS(TimeWindow(0.0), DomainError);
}

TEST_CASE("trajectory csv") {
  const auto a = alpha2();
  IntegratorConfig cfg;
  cfg.T = 0.02;
  cfg.dt = 0.01;
  cfg.box = 1;
  const CoefficientField f(a, {{{1, 0}, 0.5}, {{-1, 0}, 0.5}}, true);
  const auto tr = integrate(f, cfg);
  std::ostringstream os, ds;
  write_trajectory_csv(os, tr);
  write_diagnostics_csv(ds, tr);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,k_1,k_2,re,im");
  std::getline(in, line);
  CHECK(line.rfind("0,-1,0,0.5,0", 0) == 0);
  CHECK(ds.str().rfind("t,g00_norm,leakage\n0,", 0) == 0);
}
