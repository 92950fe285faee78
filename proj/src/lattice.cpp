#include "qpkdv/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qpkdv {

MultiIndex MultiIndex::unit(std::size_t n, std::size_t j) {
  MultiIndex e = zero(n);
  e.k_.at(j) = 1;
  return e;
}

bool MultiIndex::is_zero() const noexcept {
  return std::all_of(k_.begin(), k_.end(), [](std::int64_t v) { return v == 0; });
}

MultiIndex MultiIndex::sign_canonical() const {
  for (const auto v : k_) {
    if (v > 0) return *this;
    if (v < 0) return -*this;
  }
  return *this;
}

MultiIndex MultiIndex::operator-() const {
  MultiIndex r = *this;
  for (auto& v : r.k_) v = -v;
  return r;
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
  if (a.size() != b.size()) throw DimensionError("multi-index dimensions differ");
  MultiIndex r = a;
  for (std::size_t j = 0; j < a.size(); ++j) r.k_[j] += b.k_[j];
  return r;
}

MultiIndex operator-(const MultiIndex& a, const MultiIndex& b) {
  if (a.size() != b.size()) throw DimensionError("multi-index dimensions differ");
  MultiIndex r = a;
  for (std::size_t j = 0; j < a.size(); ++j) r.k_[j] -= b.k_[j];
  return r;
}

std::size_t MultiIndexHash::operator()(const MultiIndex& k) const noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ull;
  for (const auto v : k) {
    h ^= std::hash<std::int64_t>{}(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

std::string to_string(const MultiIndex& k) {
  std::ostringstream os;
  os << '(';
  for (std::size_t j = 0; j < k.size(); ++j) os << (j ? "," : "") << k[j];
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------------------

FrequencyVector::FrequencyVector(std::vector<std::string> decimals) : decimals_(std::move(decimals)) {
  alpha_.reserve(decimals_.size());
  for (const auto& d : decimals_) alpha_.push_back(parse_real(d));
  check();
}

FrequencyVector::FrequencyVector(std::vector<Real> values) : alpha_(std::move(values)) {
  for (const auto& v : alpha_) decimals_.push_back(to_decimal(v));
  check();
}

void FrequencyVector::check() {
  if (alpha_.empty()) throw DimensionError("frequency vector needs N >= 1 components");
  alpha_d_.clear();
  for (std::size_t j = 0; j < alpha_.size(); ++j) {
    const auto& v = alpha_[j];
    if (!mp::isfinite(v) || v == 0)
      throw DomainError("alpha component " + std::to_string(j + 1) + " must be finite and nonzero");
    alpha_d_.push_back(to_double(v));
  }
}

Real generated_frequency(const FrequencyVector& alpha, const MultiIndex& k) {
  if (alpha.dimension() != k.size())
    throw DimensionError("alpha has dimension " + std::to_string(alpha.dimension()) + " but k has " +
                         std::to_string(k.size()));
  Real acc = 0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    if (k[j] != 0) acc += alpha.component(j) * Real(k[j]);
  }
  return acc;
}

// ---------------------------------------------------------------------------

WeightProfile::WeightProfile(std::vector<double> sigma, double a) : sigma_(std::move(sigma)), a_(a) {
  for (const double v : sigma_)
    if (!std::isfinite(v)) throw DomainError("sigma components must be finite");
  if (!std::isfinite(a_)) throw DomainError("weight exponent a must be finite");
  s_ = std::accumulate(sigma_.begin(), sigma_.end(), 0.0);
}

WeightProfile WeightProfile::validated(std::vector<double> sigma, double a) {
  WeightProfile p(std::move(sigma), a);
  const auto report = check_assumption_A(p.sigma_);
  if (!report.holds) throw DomainError("assumption (A) fails: " + report.violated);
  p.validated_ = true;
  return p;
}

WeightProfile WeightProfile::with_a(double a) const {
  WeightProfile p = *this;
  p.a_ = a;
  return p;
}

WeightProfile WeightProfile::inverse() const {
  std::vector<double> neg(sigma_.size());
  std::transform(sigma_.begin(), sigma_.end(), neg.begin(), [](double v) { return -v; });
  return WeightProfile(std::move(neg), -a_);
}

double weight_from_frequency(const WeightProfile& profile, double abs_frequency, const MultiIndex& k) {
  if (profile.dimension() != k.size()) throw DimensionError("weight profile and k dimensions differ");
  double w = profile.a() == 0.0 ? 1.0 : std::pow(abs_frequency, profile.a());
  for (std::size_t j = 0; j < k.size(); ++j) {
    const double sj = profile.sigma()[j];
    if (sj == 0.0 || k[j] == 0) continue;
    const double kj = static_cast<double>(k[j]);
    w *= std::pow(1.0 + kj * kj, 0.5 * sj);
  }
  return w;
}

double weight(const WeightProfile& profile, const FrequencyVector& alpha, const MultiIndex& k) {
  if (k.is_zero()) throw DomainError("weight undefined at k = 0");
  const Real xi = abs(generated_frequency(alpha, k));
  if (xi < kDependenceThreshold) throw DomainError("weight undefined: alpha.k = 0 at k = " + to_string(k));
  return weight_from_frequency(profile, to_double(xi), k);
}

std::vector<std::vector<double>> lambda_s_vertices(double s, int n) {
  if (n < 2) throw DomainError("Lambda_s vertices need N >= 2");
  const double c = s / static_cast<double>(n - 1);
  std::vector<std::vector<double>> out(n, std::vector<double>(n, c));
  for (int j = 0; j < n; ++j) out[j][j] = 0.0;
  return out;
}

AssumptionReport check_assumption_A(std::span<const double> sigma) {
  AssumptionReport r;
  if (sigma.empty()) {
    r.violated = "sigma is empty";
    return r;
  }
  std::vector<double> sorted(sigma.begin(), sigma.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (sorted.front() < 0.0) {
    r.violated = "sigma_(1) >= 0 violated (min sigma = " + format_double(sorted.front()) + ")";
    return r;
  }
  double partial = sorted.front();
  for (std::size_t j = 2; j < n; ++j) {
    partial += sorted[j - 1];
    const double bound = 0.5 * static_cast<double>(j - 1);
    if (!(partial > bound)) {
      r.violated = "sigma_(1)+...+sigma_(" + std::to_string(j) + ") > " + format_double(bound) +
                   " violated (sum = " + format_double(partial) + ")";
      return r;
    }
  }
  const double s = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  const double bound = 0.5 * static_cast<double>(n - 1);
  if (!(s > bound)) {
    r.violated = "s > (N-1)/2 violated (s = " + format_double(s) + ", (N-1)/2 = " + format_double(bound) + ")";
    return r;
  }
  r.holds = true;
  return r;
}

// ---------------------------------------------------------------------------

std::vector<MultiIndex> TruncationBox::enumerate(std::size_t dim, int bound) {
  if (dim == 0) throw DimensionError("truncation box needs N >= 1");
  if (bound < 1) throw DomainError("truncation bound M must be positive");
  std::vector<MultiIndex> out;
  std::vector<std::int64_t> k(dim, -bound);
  while (true) {
    MultiIndex idx(k);
    if (!idx.is_zero()) out.push_back(std::move(idx));
    std::size_t j = dim;
    while (j > 0) {
      --j;
      if (k[j] < bound) {
        ++k[j];
        break;
      }
      k[j] = -bound;
      if (j == 0) return out;
    }
  }
}

TruncationBox::TruncationBox(const FrequencyVector& alpha, int bound)
    : dim_(alpha.dimension()), bound_(bound), modes_(enumerate(alpha.dimension(), bound)) {
  for (const auto& k : modes_) {
    if (abs(generated_frequency(alpha, k)) < kDependenceThreshold) {
      // Report the primitive relation.
      std::int64_t g = 0;
      for (std::size_t j = 0; j < k.size(); ++j) g = std::gcd(g, k[j]);
      MultiIndex w = k;
      for (std::size_t j = 0; j < w.size(); ++j) w[j] /= g;
      w = w.sign_canonical();
      throw RationalDependenceError("alpha is rationally dependent on the M=" + std::to_string(bound) +
                                        " box: alpha.k = 0 at k = " + to_string(w),
                                    w);
    }
  }
}

bool TruncationBox::contains(const MultiIndex& k) const noexcept {
  if (k.size() != dim_ || k.is_zero()) return false;
  return std::all_of(k.begin(), k.end(), [&](std::int64_t v) { return v >= -bound_ && v <= bound_; });
}

std::optional<std::size_t> TruncationBox::index_of(const MultiIndex& k) const noexcept {
  if (!contains(k)) return std::nullopt;
  const std::size_t side = 2 * static_cast<std::size_t>(bound_) + 1;
  std::size_t r = 0;
  std::size_t center = 0;
  for (std::size_t j = 0; j < dim_; ++j) {
    r = r * side + static_cast<std::size_t>(k[j] + bound_);
    center = center * side + static_cast<std::size_t>(bound_);
  }
  return r < center ? r : r - 1;
}

namespace {

FrequencyGap scan_gap(const FrequencyVector& alpha, const std::vector<MultiIndex>& modes) {
  if (modes.empty()) throw DomainError("frequency gap of an empty box");
  FrequencyGap best{abs(generated_frequency(alpha, modes.front())), modes.front()};
  for (std::size_t i = 1; i < modes.size(); ++i) {
    Real g = abs(generated_frequency(alpha, modes[i]));
    if (g < best.gap) best = FrequencyGap{std::move(g), modes[i]};
  }
  return best;
}

}  // namespace

FrequencyGap min_frequency_gap(const FrequencyVector& alpha, const TruncationBox& box) {
  if (box.dimension() != alpha.dimension()) throw DimensionError("box and alpha dimensions differ");
  return scan_gap(alpha, box.modes());
}

FrequencyGap min_frequency_gap(const FrequencyVector& alpha, int bound) {
  return scan_gap(alpha, TruncationBox::enumerate(alpha.dimension(), bound));
}

// ---------------------------------------------------------------------------

ModeSet::ModeSet(const FrequencyVector& alpha, std::vector<MultiIndex> modes)
    : dim_(alpha.dimension()), modes_(std::move(modes)) {
  std::sort(modes_.begin(), modes_.end());
  modes_.erase(std::unique(modes_.begin(), modes_.end()), modes_.end());
  xi_hp_.reserve(modes_.size());
  xi_.reserve(modes_.size());
  lookup_.reserve(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const auto& k = modes_[i];
    if (k.size() != dim_) throw DimensionError("mode " + to_string(k) + " has the wrong dimension");
    if (k.is_zero()) throw DomainError("mode sets never contain k = 0");
    Real xi = generated_frequency(alpha, k);
    if (abs(xi) < kDependenceThreshold)
      throw RationalDependenceError("alpha.k = 0 at k = " + to_string(k.sign_canonical()), k.sign_canonical());
    xi_.push_back(to_double(xi));
    xi_hp_.push_back(std::move(xi));
    lookup_.emplace(k, i);
  }
}

ModeSet ModeSet::from_box(const FrequencyVector& alpha, const TruncationBox& box) {
  ModeSet s(alpha, box.modes());
  s.box_bound_ = box.bound();
  return s;
}

std::optional<std::size_t> ModeSet::find(const MultiIndex& k) const {
  const auto it = lookup_.find(k);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

}  // namespace qpkdv
