#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "qpkdv/lattice.hpp"

namespace qpkdv {

struct Mode {
  MultiIndex k;
  Complex c;
};

/// Coefficients with magnitude below this are dropped on canonicalization.
inline constexpr double kPruneThreshold = 1e-30;
/// Relative tolerance for the conjugate-symmetry check of real fields.
inline constexpr double kSymmetryTolerance = 1e-12;

/// Sparse quasi-periodic function f(x) = sum_k c_k exp(i alpha.k x), k != 0.
/// Modes are kept sorted in enumeration order with no zero coefficients.
class CoefficientField {
 public:
  explicit CoefficientField(std::shared_ptr<const FrequencyVector> alpha, std::vector<Mode> modes = {},
                            bool real_symmetric = false);

  const FrequencyVector& alpha() const noexcept { return *alpha_; }
  const std::shared_ptr<const FrequencyVector>& alpha_ptr() const noexcept { return alpha_; }
  std::size_t dimension() const noexcept { return alpha_->dimension(); }
  std::size_t size() const noexcept { return modes_.size(); }
  bool empty() const noexcept { return modes_.empty(); }
  std::span<const Mode> modes() const noexcept { return modes_; }
  bool real_symmetric() const noexcept { return real_symmetric_; }

  /// Coefficient at k (0 when k is outside the support).
  Complex coefficient(const MultiIndex& k) const;
  /// Largest |c_k(-k) - conj(c_k)| relative to the largest |c_k|.
  double symmetry_defect() const;

  CoefficientField scaled(Complex factor) const;
  friend CoefficientField operator+(const CoefficientField& a, const CoefficientField& b);
  friend CoefficientField operator-(const CoefficientField& a, const CoefficientField& b);

 private:
  std::shared_ptr<const FrequencyVector> alpha_;
  std::vector<Mode> modes_;
  bool real_symmetric_;
};

/// sup_k |a_k - b_k|.
double max_abs_difference(const CoefficientField& a, const CoefficientField& b);

/// l^2 norm of weight(k) |c_k| over the support.
double gnorm(const CoefficientField& f, const WeightProfile& profile);

/// f(x) = sum_k c_k exp(i alpha.k x).
Complex evaluate(const CoefficientField& f, double x);
/// Batched evaluation; frequencies are cached once as a double-double split.
std::vector<Complex> evaluate(const CoefficientField& f, std::span<const double> xs);

struct ProductResult {
  CoefficientField field;
  /// l^2 mass of product modes that fell outside the box.
  double leakage = 0.0;
};

/// w_k = sum_{k' != 0, k' != k} u_{k-k'} v_{k'}, restricted to the box (k = 0 is always dropped).
ProductResult convolve_product_with_leakage(const CoefficientField& u, const CoefficientField& v,
                                            const TruncationBox* box);
CoefficientField convolve_product(const CoefficientField& u, const CoefficientField& v, const TruncationBox& box);
/// Untruncated product (only k = 0 is dropped).
CoefficientField convolve_product(const CoefficientField& u, const CoefficientField& v);

/// Multiplies each coefficient by i alpha.k.
CoefficientField x_derivative(const CoefficientField& f);

/// Free Airy flow: c_k -> exp(i (alpha.k)^3 t) c_k.
CoefficientField linear_propagator(const CoefficientField& f, double t);

/// l^2 mass of f outside the box.
double leakage(const CoefficientField& f, const TruncationBox& box);

/// Per-mode magnitude law for random fields.
using DecayLaw = std::function<double(const MultiIndex&)>;
/// amplitude * <k>^{-gamma} with <k> = (1 + |k|^2)^{1/2}.
DecayLaw bracket_decay(double gamma, double amplitude = 1.0);

/// Deterministic random field on the box: |c_k| = decay(k) and uniform phases.
/// With real_symmetric, c_{-k} = conj(c_k) and phases are drawn on the canonical half.
CoefficientField random_field(std::shared_ptr<const FrequencyVector> alpha, const TruncationBox& box,
                              std::uint64_t seed, const DecayLaw& decay, bool real_symmetric = false);

/// Text snapshot of a field: header with N, M, alpha decimals and the
/// real_symmetric flag, then one `k_1 ... k_N re im` record per mode.
struct Snapshot {
  CoefficientField field;
  int box_bound = 0;
};
void write_snapshot(std::ostream& os, const CoefficientField& f, int box_bound);
Snapshot read_snapshot(std::istream& is);

}  // namespace qpkdv
