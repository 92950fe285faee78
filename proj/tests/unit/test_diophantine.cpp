#include <doctest.h>

#include <cmath>
#include <sstream>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "qpkdv/diophantine.hpp"
#include "qpkdv/dynamics.hpp"

using namespace qpkdv;

namespace {

using Dec = boost::multiprecision::number<boost::multiprecision::cpp_dec_float<300>, boost::multiprecision::et_off>;

WeightProfile flat2(double a = 0.0) { return WeightProfile({0.0, 0.0}, a); }

}  // namespace

TEST_CASE("golden ratio convergents are Fibonacci ratios") {
  const auto cf = parse_continued_fraction("golden", 40);
  REQUIRE(cf.depth() == 40);
  CHECK_FALSE(cf.truncated);
  CHECK_FALSE(cf.rational);
  for (const auto& a : cf.quotients) CHECK(a == 1);
  BigInt f1 = 1, f2 = 1;  // F_1, F_2
  for (const auto& c : convergents(cf)) {
    const BigInt f3 = f1 + f2;
    CHECK(c.q == f1);
    CHECK(c.p == f2);
    f1 = f2;
    f2 = f3;
  }
}

TEST_CASE("sqrt(2) convergents solve the Pell equation") {
  const auto cf = parse_continued_fraction("sqrt(2)", 40);
  REQUIRE(cf.depth() == 40);
  CHECK(cf.quotients[0] == 1);
  for (std::size_t i = 1; i < cf.depth(); ++i) CHECK(cf.quotients[i] == 2);
  for (const auto& c : convergents(cf)) {
    const BigInt pell = c.p * c.p - 2 * c.q * c.q;
    CHECK(pell == (c.n % 2 == 0 ? -1 : 1));
  }
}

TEST_CASE("convergents satisfy the recurrence, coprimality and the gap bounds") {
  for (const char* text : {"golden", "sqrt(2)", "sqrt(3)", "3.14159265358979323846264338327950288"}) {
    const auto cf = parse_continued_fraction(text, 30);
    const auto c = convergents(cf);
    for (std::size_t n = 2; n < c.size(); ++n) {
      CHECK(c[n].p == cf.quotients[n] * c[n - 1].p + c[n - 2].p);
      CHECK(c[n].q == cf.quotients[n] * c[n - 1].q + c[n - 2].q);
      const BigInt det = c[n].p * c[n - 1].q - c[n - 1].p * c[n].q;
      CHECK(abs(det) == 1);
    }
    for (std::size_t n = 0; n + 1 < c.size(); ++n) {
      const WideReal gap = approximation_gap(cf, c[n]);
      const WideReal q = WideReal(c[n].q), q1 = WideReal(c[n + 1].q);
      CHECK(gap < 1 / (q * q1));
      CHECK(gap > 1 / (q * (q + q1)));
    }
  }
}

TEST_CASE("exact rationals terminate") {
  auto third = parse_continued_fraction("1/3", 40);
  CHECK(third.rational);
  REQUIRE(third.depth() == 2);
  CHECK(third.quotients[0] == 0);
  CHECK(third.quotients[1] == 3);

  auto pi_approx = parse_continued_fraction("355/113", 40);
  CHECK(pi_approx.rational);
  CHECK(pi_approx.quotients == std::vector<BigInt>{3, 7, 16});

  auto neg = parse_continued_fraction("-1/3", 40);
  CHECK(neg.quotients == std::vector<BigInt>{-1, 1, 2});
  CHECK(convergents(neg).back().p == -1);
  CHECK(convergents(neg).back().q == 3);

  auto dyadic = parse_continued_fraction("2.25", 40);
  CHECK(dyadic.rational);
  CHECK(dyadic.quotients == std::vector<BigInt>{2, 4});

  // A decimal near 1/3 is a different rational with a long expansion.
  auto near = parse_continued_fraction("0.333333", 40);
  CHECK(near.depth() > 2);
}

TEST_CASE("quotient lists and errors") {
  const auto cf = parse_continued_fraction("[1; 2, 2, 2]", 10);
  const auto c = convergents(cf);
  CHECK(c.back().p == 17);
  CHECK(c.back().q == 12);
  CHECK(abs(cf.mu - WideReal(17) / 12) < WideReal(1e-70));
  CHECK_THROWS_AS(parse_continued_fraction("[1; 0, 2]", 10), DomainError);
  CHECK_THROWS_AS(parse_continued_fraction("[1; 2", 10), ConfigError);
  CHECK_THROWS_AS(continued_fraction(BigInt(1), BigInt(0), 5), DomainError);
  CHECK_THROWS_AS(continued_fraction(WideReal(2), 0), DomainError);
}

TEST_CASE("deep expansions stop when precision runs out") {
  const auto cf = parse_continued_fraction("golden", 5000);
  CHECK(cf.truncated);
  CHECK(cf.depth() < 5000);
  const auto last = convergents(cf).back();
  CHECK(WideReal(last.q) * WideReal(last.q) <= mp::pow(WideReal(10), kWideDigits - 20));
  // Every retained quotient is still exact.
  for (const auto& a : cf.quotients) CHECK(a == 1);
}

TEST_CASE("distinct convergents drop the repeated unit denominator") {
  const auto d = distinct_convergents(parse_continued_fraction("golden", 10));
  CHECK(d.front().q == 1);
  CHECK(d.front().p == 2);
  for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i].q > d[i - 1].q);
  const auto s = distinct_convergents(parse_continued_fraction("sqrt(2)", 10));
  CHECK(s.front().q == 1);
  CHECK(s[1].q == 2);
}

TEST_CASE("type estimate for badly approximable numbers") {
  const auto g = rho_estimate(parse_continued_fraction("golden", 40));
  REQUIRE(g.rho.size() == g.index.size());
  for (std::size_t s = 0; s < g.rho.size(); ++s) {
    // q_j = F_{j+2} in distinct indexing, and log F_{j+3}/log F_{j+2} - 1 -> 0.
    CHECK(g.rho[s] > 0.0);
    if (g.index[s] >= 20) CHECK(g.rho[s] <= 0.05);
  }
  for (std::size_t s = 1; s < g.rho.size(); ++s) CHECK(g.rho[s] < g.rho[s - 1]);
  CHECK(g.K_hat > 0.0);
  const auto r2 = rho_estimate(parse_continued_fraction("sqrt(2)", 40));
  CHECK(r2.rho.back() < 0.05);
  CHECK(r2.rho_hat < 0.1);
  CHECK_THROWS_AS(rho_estimate(parse_continued_fraction("1/3", 10)), DomainError);
}

TEST_CASE("engineered Liouville expansion has rho >= 1") {
  const auto cf = engineered_liouville(10);
  const auto c = convergents(cf);
  CHECK(cf.quotients[0] == 1);
  for (std::size_t n = 0; n + 1 < c.size(); ++n) CHECK(cf.quotients[n + 1] == c[n].q);
  const auto est = rho_estimate(cf);
  for (std::size_t s = 0; s < est.rho.size(); ++s)
    if (est.index[s] >= 1) CHECK(est.rho[s] >= 1.0);
  CHECK(est.rho_hat >= 1.0);
  // mu is accurate well beyond the last requested convergent.
  CHECK(approximation_gap(cf, c.back()) > 0);
  CHECK(parse_continued_fraction("liouville", 7).quotients == std::vector<BigInt>(cf.quotients.begin(), cf.quotients.begin() + 7));
}

TEST_CASE("small divisors match a direct decimal evaluation") {
  const auto setup = inflation_setup(parse_continued_fraction("golden", 60));
  const Dec phi = (1 + boost::multiprecision::sqrt(Dec(5))) / 2;
  for (int n = 0; n < 50; n += 7) {
    const auto d = inflation_data(setup, n, flat2());
    const Dec direct = abs(phi * Dec(d.q.str()) - Dec(d.p.str()));
    const Dec ours(to_decimal(d.delta, kWideDigits));
    CHECK(abs(ours - direct) / direct < Dec(1e-30));
    // Binet: |phi F_{j+2} - F_{j+3}| = phi^{-(j+2)}.
    CHECK(abs(direct * pow(phi, n + 2) - 1) < Dec(1e-30));
  }
}

TEST_CASE("inflation datum support and normalization") {
  const auto setup = inflation_setup(engineered_liouville(10));
  for (int n = 0; n < 6; ++n) {
    const auto d = inflation_data(setup, n, flat2());
    REQUIRE(d.field.size() == 2);
    CHECK(d.field.coefficient(MultiIndex{-d.q.convert_to<std::int64_t>(), 0}) == Complex(1.0));
    CHECK(d.field.coefficient(MultiIndex{d.q.convert_to<std::int64_t>(), -d.p.convert_to<std::int64_t>()}) == Complex(1.0));
    CHECK(std::abs(d.gnorm * d.gnorm - 2.0) <= 4.5e-16);
  }
  const WeightProfile prof({0.3, 0.2}, -0.5);
  const auto d = inflation_data(setup, 3, prof);
  const double q = d.q.convert_to<double>(), p = d.p.convert_to<double>(), delta = d.delta.convert_to<double>();
  CHECK(std::abs(d.field.coefficient(MultiIndex{-27, 0})) == doctest::Approx(std::pow(q, 0.5 - 0.3)).epsilon(1e-13));
  CHECK(std::abs(d.field.coefficient(MultiIndex{27, -static_cast<std::int64_t>(p)})) ==
        doctest::Approx(std::pow(delta, 0.5) * std::pow(q, -0.3) * std::pow(p, -0.2)).epsilon(1e-13));
  const auto u = inflation_data(setup, 3, prof, true);
  CHECK(u.gnorm * u.gnorm == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(inflation_data(setup, 40, prof), DomainError);
  CHECK_THROWS_AS(inflation_data(setup, 0, WeightProfile({0.0}, 0.0)), DimensionError);
}

TEST_CASE("second iterate: support, t = 0 and quadratic scaling") {
  const auto setup = inflation_setup(engineered_liouville(10));
  const auto prof = flat2();
  auto d = inflation_data(setup, 2, prof);
  const std::int64_t q = d.q.convert_to<std::int64_t>(), p = d.p.convert_to<std::int64_t>();
  const auto u = second_iterate_exact(setup, d, 0.5, prof);
  REQUIRE(u.field.size() == 3);
  CHECK(u.field.coefficient(MultiIndex{0, -p}) != Complex(0.0));
  CHECK(u.field.coefficient(MultiIndex{-2 * q, 0}) != Complex(0.0));
  CHECK(u.field.coefficient(MultiIndex{2 * q, -2 * p}) != Complex(0.0));
  CHECK(u.norm == doctest::Approx(std::hypot(u.I1, u.I2, u.I3)));

  const auto zero = second_iterate_exact(setup, d, 0.0, prof);
  CHECK(zero.field.empty());
  CHECK(zero.norm == 0.0);

  // Small t: u2 ~ t (-i xi_k) m c c'.
  const auto tiny = second_iterate_exact(setup, d, 1e-9, prof);
  CHECK(tiny.I1 == doctest::Approx(1e-9 * 2.0 * d.p.convert_to<double>()).epsilon(1e-8));

  const double gamma = 3.0;
  std::vector<Mode> scaled;
  for (const auto& m : d.field.modes()) scaled.push_back({m.k, gamma * m.c});
  d.field = CoefficientField(setup.alpha, scaled);
  const auto u3 = second_iterate_exact(setup, d, 0.5, prof);
  for (const auto& m : u.field.modes()) CHECK(std::abs(u3.field.coefficient(m.k) - gamma * gamma * m.c) <= 1e-13 * std::abs(m.c) * 9);
}

TEST_CASE("closed form matches Duhamel quadrature of the free flow") {
  const auto setup = inflation_setup(engineered_liouville(10));
  const auto prof = flat2();
  for (double t : {0.5, -0.3}) {
    for (int n = 0; n < 6; ++n) {
      const auto d = inflation_data(setup, n, prof);
      const auto u2 = second_iterate_exact(setup, d, t, prof);
      std::vector<MultiIndex> ks;
      for (const auto& m : d.field.modes()) ks.push_back(m.k);
      for (const auto& m : u2.field.modes()) ks.push_back(m.k);
      const auto modes = std::make_shared<const ModeSet>(*setup.alpha, ks);
      const auto grid = uniform_grid(std::abs(t), std::abs(t) / 2048, t < 0);
      const auto mu = duhamel_map(CoefficientField(setup.alpha), free_trajectory(d.field, modes, grid), modes);
      const auto last = mu.state(mu.size() - 1);
      double scale = 0.0;
      for (const auto& m : u2.field.modes()) scale = std::max(scale, std::abs(m.c));
      for (const auto& m : u2.field.modes()) CHECK(std::abs(last.coefficient(m.k) - m.c) <= 1e-8 * scale);
      for (const auto& m : d.field.modes()) CHECK(last.coefficient(m.k) == Complex(0.0));
    }
  }
}

TEST_CASE("inflation threshold") {
  CHECK(inflation_threshold({0.0, 0.0}, 1.0) == -0.5);
  CHECK(inflation_threshold({0.7, 0.0}, 1.0) == -0.5);
  CHECK(inflation_threshold({0.25, 0.5}, 0.0) == doctest::Approx(0.5));
  CHECK(inflation_threshold({0.25, 0.5}, 3.0) == doctest::Approx(-0.125));
}

TEST_CASE("Liouville inflation report") {
  const auto setup = inflation_setup(engineered_liouville(10));
  const auto rep = inflation_report(setup, flat2(), 0.5, 0, 5);
  REQUIRE(rep.rows.size() == 6);
  CHECK(rep.monotone_growth);
  CHECK(rep.growth >= 10.0);
  CHECK(rep.rho_hat >= 1.0);
  CHECK(rep.threshold == doctest::Approx(-0.5).epsilon(1e-4));
  CHECK(rep.lower_hypothesis);
  for (const auto& r : rep.rows) {
    CHECK(r.I2 <= 1.0);
    CHECK(r.ratio_sup >= r.ratio);
    CHECK(r.f_norm * r.f_norm == doctest::Approx(2.0).epsilon(1e-15));
  }
  std::ostringstream os;
  write_inflation_csv(os, rep);
  const std::string s = os.str();
  CHECK(s.rfind("n,p_n,q_n,delta_n,f_norm,I1,I2,I3,ratio,ratio_sup\n", 0) == 0);
  CHECK(s.find("# threshold a > ") != std::string::npos);
  CHECK_THROWS_AS(inflation_report(setup, flat2(), 1.5, 0, 3), DomainError);
}

TEST_CASE("golden datum inflates only above the threshold") {
  // Bounded quotients: delta_n ~ 1/q_n and the threshold is close to 0.
  const auto setup = inflation_setup(parse_continued_fraction("golden", 60));
  const auto below = inflation_report(setup, flat2(-0.5), 0.5, 2, 40);
  CHECK(below.threshold > -0.5);
  for (std::size_t i = 1; i < below.rows.size(); ++i) CHECK(below.rows[i].ratio_sup <= below.rows[i - 1].ratio_sup);
  const auto above = inflation_report(setup, flat2(0.5), 0.5, 2, 40);
  for (std::size_t i = 1; i < above.rows.size(); ++i) CHECK(above.rows[i].ratio_sup > above.rows[i - 1].ratio_sup);
  CHECK(above.rows.back().ratio_sup / above.rows.front().ratio_sup > 1e3);
}

TEST_CASE("borderline demo") {
  const FrequencyVector alpha(std::vector<std::string>{"1", "sqrt(2)"});
  const WeightProfile prof({0.25, 0.25}, 0.0);
  double prev = 0.0;
  for (int n : {16, 32, 64, 128}) {
    const auto r = borderline_divergence_demo(alpha, prof, n);
    CHECK(r.pairing > prev);
    prev = r.pairing;
    // Brute-force lattice count.
    std::size_t count = 0;
    double pairing = 0.0;
    const double r2 = std::sqrt(2.0);
    for (int a = -n; a <= n; ++a)
      for (int b = -n; b <= n; ++b) {
        const double kk = 1.0 + a * a + b * b;
        const double x = std::abs(a + r2 * b);
        if ((a == 0 && b == 0) || kk > double(n) * n || x < 2 * r2 - 1e-12 || x > 4 * r2 + 1e-12) continue;
        ++count;
        pairing += 1.0 / (std::sqrt(kk) * std::log(std::sqrt(kk)));
      }
    CHECK(r.modes == count);
    CHECK(r.pairing == doctest::Approx(pairing).epsilon(1e-12));
  }
  const auto empty = borderline_divergence_demo(alpha, prof, 2);
  CHECK(empty.modes == 0);
  CHECK(empty.norm == 0.0);
  CHECK(empty.pairing == 0.0);
  CHECK_THROWS_WITH_AS(borderline_divergence_demo(alpha, WeightProfile({0.3, 0.3}, 0.0), 16),
                       doctest::Contains("(N-1)/2"), DomainError);
  CHECK_THROWS_WITH_AS(borderline_divergence_demo(alpha, WeightProfile({-0.1, 0.3}, 0.0), 16),
                       doctest::Contains("sigma_j >= 0"), DomainError);
  CHECK_THROWS_AS(borderline_divergence_demo(alpha, WeightProfile({0.1}, 0.0), 16), DimensionError);
}
