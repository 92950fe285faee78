#pragma once

#include <iosfwd>
#include <memory>
#include <string_view>
#include <vector>

#include "qpkdv/qpfield.hpp"

namespace qpkdv {

/// Partial quotients [a0; a1, a2, ...] of mu.
struct ContinuedFraction {
  std::vector<BigInt> quotients;
  WideReal mu;
  /// The expansion terminated exactly (mu rational).
  bool rational = false;
  /// Stopped before the requested depth because the source precision ran out.
  bool truncated = false;

  std::size_t depth() const noexcept { return quotients.size(); }
};

/// Gauss-map expansion of a high-precision value. Stops early (truncated) once
/// q_n^2 exceeds 10^(kWideDigits - 20).
ContinuedFraction continued_fraction(const WideReal& mu, int depth);
/// Exact Euclid on p/q (q != 0).
ContinuedFraction continued_fraction(const BigInt& p, const BigInt& q, int depth);
/// Expansion given by its quotients; mu is the value of the last convergent.
ContinuedFraction continued_fraction_from_quotients(std::vector<BigInt> quotients);
/// a0 = 1, a_{n+1} = q_n: doubly exponential denominators, so rho_n >= 1.
ContinuedFraction engineered_liouville(int depth);
/// Text forms: anything parse_wide accepts, an exact ratio of integers "P/Q"
/// (rational path), "liouville", or "[a0; a1, a2, ...]".
ContinuedFraction parse_continued_fraction(std::string_view text, int depth);

struct Convergent {
  int n = 0;
  BigInt p;
  BigInt q;
};

/// p_n/q_n by the three-term recurrence; asserts gcd(p_n, q_n) = 1.
std::vector<Convergent> convergents(const ContinuedFraction& cf);

/// Strictly increasing q subsequence: drops q_0 when q_0 = q_1 = 1.
std::vector<Convergent> distinct_convergents(const ContinuedFraction& cf);

struct TypeEstimate {
  /// Index into distinct_convergents for each sample.
  std::vector<int> index;
  /// rho_j = log q_{j+1} / log q_j - 1.
  std::vector<double> rho;
  /// K_j = q_j^{2 + rho_hat} |mu - p_j/q_j|.
  std::vector<double> K;
  /// Largest rho_j over the tail half: an estimate of rho_mu, not a bound.
  double rho_hat = 0.0;
  /// Smallest K_j over the tail half.
  double K_hat = 0.0;
};

/// Requires at least 4 distinct convergents.
TypeEstimate rho_estimate(const ContinuedFraction& cf);

/// |mu - p/q| at wide precision.
WideReal approximation_gap(const ContinuedFraction& cf, const Convergent& c);

// ---------------------------------------------------------------------------

/// alpha = (alpha_1, alpha_2) at wide precision together with mu = alpha_1/alpha_2.
struct InflationSetup {
  WideReal alpha1;
  WideReal alpha2;
  std::shared_ptr<const FrequencyVector> alpha;
  ContinuedFraction cf;
};

/// alpha = (mu, 1) for the given expansion.
InflationSetup inflation_setup(ContinuedFraction cf);
/// alpha from two decimal/expression strings; mu = alpha_1/alpha_2 expanded to depth.
InflationSetup inflation_setup(std::string_view alpha1, std::string_view alpha2, int depth);

struct InflationDatum {
  int n = 0;
  BigInt p;
  BigInt q;
  /// |alpha_1 q - alpha_2 p|.
  WideReal delta;
  CoefficientField field;
  double gnorm = 0.0;
};

/// Two-mode datum on (-q_n, 0) and (q_n, -p_n), n indexing distinct_convergents.
/// Coefficients |q|^{-a-s1} and delta^{-a} |q|^{-s1} |p|^{-s2}; with unit_weight each
/// coefficient is instead 1/weight, so gnorm^2 = 2 exactly.
InflationDatum inflation_data(const InflationSetup& setup, int n, const WeightProfile& profile,
                              bool unit_weight = false);

struct SecondIterate {
  /// u_2(t): the quadratic Duhamel term of the free flow of f_n, on the three output modes.
  CoefficientField field;
  /// G-norms of the (0,-p), (-2q,0), (2q,-2p) components.
  double I1 = 0.0;
  double I2 = 0.0;
  double I3 = 0.0;
  double norm = 0.0;
};

/// Closed form: u2_k(t) = e^{i xi_k^3 t} (-i xi_k) m c c' (1 - e^{-i y t})/(i y), y = 3 xi_k xi_k' xi_{k-k'}.
SecondIterate second_iterate_exact(const InflationSetup& setup, const InflationDatum& datum, double t,
                                   const WeightProfile& profile);

struct InflationRow {
  int n = 0;
  BigInt p;
  BigInt q;
  WideReal delta;
  double f_norm = 0.0;
  double I1 = 0.0;
  double I2 = 0.0;
  double I3 = 0.0;
  /// ||u_2(t)|| / ||f_n||^2.
  double ratio = 0.0;
  /// Same ratio maximized over 64 times in [-|t|, |t|].
  double ratio_sup = 0.0;
};

struct InflationReport {
  std::vector<InflationRow> rows;
  double rho_hat = 0.0;
  /// (2 min sigma - min{1, rho}) / (1 + rho).
  double threshold = 0.0;
  /// min sigma + a >= -2.
  bool lower_hypothesis = false;
  bool monotone_growth = false;
  double growth = 0.0;
};

double inflation_threshold(const std::vector<double>& sigma, double rho);

InflationReport inflation_report(const InflationSetup& setup, const WeightProfile& profile, double t, int n_first,
                                 int n_last, bool unit_weight = false);

/// CSV `n, p_n, q_n, delta_n, f_norm, I1, I2, I3, ratio, ratio_sup` then `# threshold ...`.
void write_inflation_csv(std::ostream& os, const InflationReport& r);

// ---------------------------------------------------------------------------

struct BorderlineResult {
  double norm = 0.0;
  double pairing = 0.0;
  std::size_t modes = 0;
};

/// Lattice points of A_n = {<k> <= n, 2|alpha_N| <= |alpha.k| <= 4|alpha_N|} with
/// coefficients <k>^{1-N} / log<k>. Returns gnorm and the pairing sum.
/// Requires sigma_j >= 0 and sum sigma <= (N-1)/2.
BorderlineResult borderline_divergence_demo(const FrequencyVector& alpha, const WeightProfile& profile, int n);

}  // namespace qpkdv
