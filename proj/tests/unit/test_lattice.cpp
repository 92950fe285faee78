#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "qpkdv/lattice.hpp"

using namespace qpkdv;
using Dec = boost::multiprecision::cpp_dec_float_100;

namespace {

FrequencyVector golden_pair() { return FrequencyVector(std::vector<std::string>{"1", "sqrt(2)"}); }

}  // namespace

TEST_CASE("generated_frequency") {
  const auto alpha = golden_pair();
  const Dec oracle = 1 + boost::multiprecision::sqrt(Dec(2));
  const Real got = generated_frequency(alpha, {1, 1});
  CHECK(std::abs(to_double(got) - oracle.convert_to<double>()) < 1e-15);
  CHECK(abs(Dec(to_decimal(got)) - oracle) < Dec("1e-55"));
  CHECK(generated_frequency(alpha, {0, 0}) == 0);
  CHECK(to_double(generated_frequency(alpha, {-1, 0})) == -1.0);
  CHECK_THROWS_AS(generated_frequency(alpha, {1, 2, 3}), DimensionError);
}

TEST_CASE("weight values") {
  const auto alpha = golden_pair();
  CHECK(weight(WeightProfile({0, 0}, 0), alpha, {3, -7}) == 1.0);

  const double w = weight(WeightProfile({0.3, 0.3}, -0.5), alpha, {1, 1});
  const double oracle = std::pow(1.0L + std::sqrt(2.0L), -0.5L) * std::pow(2.0L, 0.3L);
  CHECK(w == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(w == doctest::Approx(0.7924).epsilon(1e-4));

  const double w2 = weight(WeightProfile({0, 0}, -0.5), alpha, {1, -1});
  CHECK(w2 == doctest::Approx(std::pow(std::sqrt(2.0L) - 1.0L, -0.5L)).epsilon(1e-14));
  CHECK(w2 == doctest::Approx(1.5538).epsilon(1e-4));

  CHECK_THROWS_AS(weight(WeightProfile({0, 0}, 0), alpha, {0, 0}), DomainError);
  const FrequencyVector dep(std::vector<std::string>{"1", "2"});
  CHECK_THROWS_AS(weight(WeightProfile({0, 0}, -0.5), dep, {2, -1}), DomainError);
}

TEST_CASE("weight times inverse weight is one") {
  const auto alpha = golden_pair();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  std::uniform_int_distribution<int> ki(-9, 9);
  for (int trial = 0; trial < 500; ++trial) {
    const WeightProfile p({ud(rng), ud(rng)}, ud(rng));
    MultiIndex k{ki(rng), ki(rng)};
    if (k.is_zero()) continue;
    CHECK(weight(p, alpha, k) * weight(p.inverse(), alpha, k) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("lambda_s vertices") {
  const auto v = lambda_s_vertices(0.6, 2);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == std::vector<double>{0.0, 0.6});
  CHECK(v[1] == std::vector<double>{0.6, 0.0});
  const auto v3 = lambda_s_vertices(1.5, 3);
  CHECK(v3[0] == std::vector<double>{0.0, 0.75, 0.75});
  CHECK(v3[1] == std::vector<double>{0.75, 0.0, 0.75});
  CHECK(v3[2] == std::vector<double>{0.75, 0.75, 0.0});
  for (const auto& d : lambda_s_vertices(0.0, 4))
    CHECK(std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; }));
  CHECK_THROWS_AS(lambda_s_vertices(1.0, 1), DomainError);
}

TEST_CASE("assumption A") {
  CHECK(check_assumption_A(std::vector<double>{0.3, 0.3}).holds);
  const auto fail = check_assumption_A(std::vector<double>{0.25, 0.25});
  CHECK_FALSE(fail.holds);
  CHECK(fail.violated.find("s > (N-1)/2 violated") != std::string::npos);
  CHECK(check_assumption_A(std::vector<double>{0.0, 0.6}).holds);
  CHECK_FALSE(check_assumption_A(std::vector<double>{-0.1, 0.9}).holds);
  CHECK_THROWS_AS(WeightProfile::validated({0.25, 0.25}, 0), DomainError);
  CHECK(WeightProfile::validated({0.3, 0.3}, -0.5).assumption_A_validated());
}

TEST_CASE("assumption A is permutation invariant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(-0.2, 1.2);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> s{ud(rng), ud(rng), ud(rng), ud(rng)};
    const bool base = check_assumption_A(s).holds;
    std::shuffle(s.begin(), s.end(), rng);
    CHECK(check_assumption_A(s).holds == base);
  }
}

TEST_CASE("convex combinations of Lambda_s vertices satisfy A") {
  std::mt19937_64 rng(5);
  std::gamma_distribution<double> g(1.0);
  for (int n = 2; n <= 5; ++n) {
    const double s = 0.5 * (n - 1) + 0.05;
    const auto verts = lambda_s_vertices(s, n);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> w(n);
      double tot = 0;
      for (auto& x : w) tot += x = g(rng);
      std::vector<double> sigma(n, 0.0);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) sigma[i] += w[j] / tot * verts[j][i];
      CHECK(check_assumption_A(sigma).holds);
    }
  }
}

TEST_CASE("truncation box enumeration") {
  const auto alpha = golden_pair();
  const TruncationBox box(alpha, 2);
  CHECK(box.size() == 24);
  CHECK(std::is_sorted(box.modes().begin(), box.modes().end()));
  CHECK(box.modes().front() == MultiIndex{-2, -2});
  for (std::size_t i = 0; i < box.size(); ++i) {
    CHECK_FALSE(box.modes()[i].is_zero());
    CHECK(box.index_of(box.modes()[i]) == i);
  }
  CHECK_FALSE(box.contains({3, 0}));
  CHECK_FALSE(box.contains({0, 0}));
  CHECK(TruncationBox::enumerate(2, 2) == box.modes());
}

TEST_CASE("min frequency gap") {
  const auto alpha = golden_pair();
  const auto g2 = min_frequency_gap(alpha, TruncationBox(alpha, 2));
  CHECK(to_double(g2.gap) == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-14));
  CHECK((g2.index == MultiIndex{-1, 1} || g2.index == MultiIndex{1, -1}));

  // Brute force over the M=5 box; |3 sqrt2 - 4| is not the minimum there, (3,-2) is.
  long double best = 1e9L;
  MultiIndex arg;
  for (int i = -5; i <= 5; ++i)
    for (int j = -5; j <= 5; ++j) {
      if (i == 0 && j == 0) continue;
      const long double g = std::fabs(i + j * std::sqrt(2.0L));
      if (g < best) best = g, arg = MultiIndex{i, j};
    }
  const auto g5 = min_frequency_gap(alpha, TruncationBox(alpha, 5));
  CHECK(to_double(g5.gap) == doctest::Approx(static_cast<double>(best)).epsilon(1e-15));
  CHECK(to_double(g5.gap) == doctest::Approx(3 - 2 * std::sqrt(2.0)).epsilon(1e-13));
  CHECK(g5.index == arg);

  const FrequencyVector dep(std::vector<std::string>{"1", "2"});
  const auto g = min_frequency_gap(dep, 2);
  CHECK(g.gap == 0);
  CHECK((g.index == MultiIndex{2, -1} || g.index == MultiIndex{-2, 1}));
  try {
    TruncationBox bad(dep, 2);
    FAIL("expected rational dependence error");
  } catch (const RationalDependenceError& e) {
    CHECK(e.witness() == MultiIndex{2, -1});
  }
}

TEST_CASE("min frequency gap is nonincreasing in M") {
  const FrequencyVector alpha(std::vector<std::string>{"1", "sqrt(3)", "sqrt(5)"});
  Real prev = min_frequency_gap(alpha, 1).gap;
  for (int m = 2; m <= 6; ++m) {
    const Real g = min_frequency_gap(alpha, m).gap;
    CHECK(g <= prev);
    prev = g;
  }
}

TEST_CASE("frequency vector validation") {
  CHECK_THROWS_AS(FrequencyVector(std::vector<std::string>{}), DimensionError);
  CHECK_THROWS_AS(FrequencyVector(std::vector<std::string>{"1", "0"}), DomainError);
  CHECK_THROWS_AS(FrequencyVector(std::vector<std::string>{"1", "abc"}), ConfigError);
  const FrequencyVector a(std::vector<std::string>{"golden", "1/3"});
  CHECK(a.component_double(0) == doctest::Approx((1 + std::sqrt(5.0)) / 2));
  CHECK(a.component_double(1) == doctest::Approx(1.0 / 3));
}

TEST_CASE("mode set") {
  const auto alpha = golden_pair();
  const ModeSet s(alpha, {{1, 0}, {-1, 0}, {1, 0}, {0, 2}});
  CHECK(s.size() == 3);
  CHECK(s.find({0, 2}).has_value());
  CHECK(s.negation(*s.find({1, 0})) == s.find({-1, 0}));
  CHECK_THROWS_AS(ModeSet(alpha, {{0, 0}}), DomainError);
}
