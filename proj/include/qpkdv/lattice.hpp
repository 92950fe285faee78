#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qpkdv/errors.hpp"
#include "qpkdv/precision.hpp"

namespace qpkdv {

/// Integer lattice point k in Z^N. Ordered lexicographically on (k_1, ..., k_N).
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<std::int64_t> k) : k_(std::move(k)) {}
  MultiIndex(std::initializer_list<std::int64_t> k) : k_(k) {}

  static MultiIndex zero(std::size_t n) { return MultiIndex(std::vector<std::int64_t>(n, 0)); }
  /// Standard unit vector e_j (0-based j).
  static MultiIndex unit(std::size_t n, std::size_t j);

  std::size_t size() const noexcept { return k_.size(); }
  std::int64_t operator[](std::size_t j) const { return k_[j]; }
  std::int64_t& operator[](std::size_t j) { return k_[j]; }
  const std::vector<std::int64_t>& components() const noexcept { return k_; }
  auto begin() const noexcept { return k_.begin(); }
  auto end() const noexcept { return k_.end(); }

  bool is_zero() const noexcept;
  /// Representative of {k, -k} whose first nonzero component is positive.
  MultiIndex sign_canonical() const;

  MultiIndex operator-() const;
  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);
  friend MultiIndex operator-(const MultiIndex& a, const MultiIndex& b);
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) { return a.k_ <=> b.k_; }

 private:
  std::vector<std::int64_t> k_;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& k) const noexcept;
};

std::string to_string(const MultiIndex& k);

/// Base frequencies alpha in R^N, held at working precision. The decimal
/// strings the vector was built from are retained for snapshots and echoes.
class FrequencyVector {
 public:
  explicit FrequencyVector(std::vector<std::string> decimals);
  explicit FrequencyVector(std::vector<Real> values);

  std::size_t dimension() const noexcept { return alpha_.size(); }
  const Real& component(std::size_t j) const { return alpha_[j]; }
  double component_double(std::size_t j) const { return alpha_d_[j]; }
  const std::vector<Real>& values() const noexcept { return alpha_; }
  const std::vector<std::string>& decimals() const noexcept { return decimals_; }
  int precision_digits() const noexcept { return kRealDigits; }

  bool operator==(const FrequencyVector& other) const { return alpha_ == other.alpha_; }

 private:
  void check();

  std::vector<Real> alpha_;
  std::vector<double> alpha_d_;
  std::vector<std::string> decimals_;
};

/// alpha . k at working precision.
Real generated_frequency(const FrequencyVector& alpha, const MultiIndex& k);

/// Below this magnitude alpha.k counts as zero (rational dependence).
inline constexpr double kDependenceThreshold = 1e-30;

/// Exponents (sigma, a) of the weight |alpha.k|^a prod_j <k_j>^{sigma_j}.
class WeightProfile {
 public:
  WeightProfile(std::vector<double> sigma, double a);
  /// Same as the constructor, but throws DomainError unless assumption (A) holds.
  static WeightProfile validated(std::vector<double> sigma, double a);

  const std::vector<double>& sigma() const noexcept { return sigma_; }
  double a() const noexcept { return a_; }
  double s() const noexcept { return s_; }
  std::size_t dimension() const noexcept { return sigma_.size(); }
  bool assumption_A_validated() const noexcept { return validated_; }

  WeightProfile with_a(double a) const;
  /// (-sigma, -a); weight(p) * weight(p.inverse()) == 1.
  WeightProfile inverse() const;

 private:
  std::vector<double> sigma_;
  double a_;
  double s_;
  bool validated_ = false;
};

/// |alpha.k|^a prod_j (1 + k_j^2)^{sigma_j / 2}. Throws DomainError for k = 0
/// or |alpha.k| below the dependence threshold.
double weight(const WeightProfile& profile, const FrequencyVector& alpha, const MultiIndex& k);
/// Same weight when |alpha.k| is already known.
double weight_from_frequency(const WeightProfile& profile, double abs_frequency, const MultiIndex& k);

/// Vertices d_j = s/(N-1) ((1,...,1) - e_j) of the simplex Lambda_s. Requires N >= 2.
std::vector<std::vector<double>> lambda_s_vertices(double s, int n);

struct AssumptionReport {
  bool holds = false;
  /// Human-readable description of the first violated inequality (empty when it holds).
  std::string violated;
};

/// Assumption (A) in its sorted form: sigma_(1) >= 0, partial sums
/// sigma_(1)+...+sigma_(j) > (j-1)/2 for 2 <= j <= N, and s > (N-1)/2.
AssumptionReport check_assumption_A(std::span<const double> sigma);

/// All k != 0 with |k_j| <= M, in lexicographic order. Construction verifies
/// |alpha.k| > 1e-30 on every point and throws RationalDependenceError otherwise.
class TruncationBox {
 public:
  TruncationBox(const FrequencyVector& alpha, int bound);

  int bound() const noexcept { return bound_; }
  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return modes_.size(); }
  const std::vector<MultiIndex>& modes() const noexcept { return modes_; }

  bool contains(const MultiIndex& k) const noexcept;
  /// Position of k in the enumeration order, if k lies in the box.
  std::optional<std::size_t> index_of(const MultiIndex& k) const noexcept;

  /// Enumerates the box without any frequency check.
  static std::vector<MultiIndex> enumerate(std::size_t dim, int bound);

 private:
  std::size_t dim_;
  int bound_;
  std::vector<MultiIndex> modes_;
};

class RationalDependenceError : public DomainError {
 public:
  RationalDependenceError(const std::string& what, MultiIndex witness)
      : DomainError(what), witness_(std::move(witness)) {}
  const MultiIndex& witness() const noexcept { return witness_; }

 private:
  MultiIndex witness_;
};

struct FrequencyGap {
  Real gap;
  MultiIndex index;
};

/// Minimum of |alpha.k| over the box; ties resolve to the first index in
/// enumeration order.
FrequencyGap min_frequency_gap(const FrequencyVector& alpha, const TruncationBox& box);
/// Same scan over |k_j| <= bound without constructing (or validating) a box.
FrequencyGap min_frequency_gap(const FrequencyVector& alpha, int bound);

/// Sorted set of nonzero lattice points with cached frequencies; the index
/// space on which trajectories and space-time fields store amplitudes.
class ModeSet {
 public:
  ModeSet(const FrequencyVector& alpha, std::vector<MultiIndex> modes);
  static ModeSet from_box(const FrequencyVector& alpha, const TruncationBox& box);

  std::size_t size() const noexcept { return modes_.size(); }
  std::size_t dimension() const noexcept { return dim_; }
  const MultiIndex& mode(std::size_t i) const { return modes_[i]; }
  const std::vector<MultiIndex>& modes() const noexcept { return modes_; }
  const Real& frequency_hp(std::size_t i) const { return xi_hp_[i]; }
  double frequency(std::size_t i) const { return xi_[i]; }
  std::optional<std::size_t> find(const MultiIndex& k) const;
  /// Index of -k, if present.
  std::optional<std::size_t> negation(std::size_t i) const { return find(-modes_[i]); }
  /// Box bound when the set is a full truncation box.
  std::optional<int> box_bound() const noexcept { return box_bound_; }

 private:
  std::size_t dim_ = 0;
  std::vector<MultiIndex> modes_;
  std::vector<Real> xi_hp_;
  std::vector<double> xi_;
  std::unordered_map<MultiIndex, std::size_t, MultiIndexHash> lookup_;
  std::optional<int> box_bound_;
};

}  // namespace qpkdv
