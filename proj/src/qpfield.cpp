#include "qpkdv/qpfield.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace qpkdv {
namespace {

bool mode_less(const Mode& a, const Mode& b) { return a.k < b.k; }

const Mode* find_mode(std::span<const Mode> modes, const MultiIndex& k) {
  const auto it = std::lower_bound(modes.begin(), modes.end(), k,
                                   [](const Mode& m, const MultiIndex& key) { return m.k < key; });
  if (it == modes.end() || it->k != k) return nullptr;
  return &*it;
}

/// Projects onto exact conjugate symmetry: c_k <- (c_k + conj c_{-k}) / 2.
std::vector<Mode> symmetrize(std::vector<Mode> modes) {
  std::unordered_map<MultiIndex, Complex, MultiIndexHash> m;
  m.reserve(modes.size() * 2);
  for (auto& md : modes) m[md.k] += md.c;
  std::vector<Mode> out;
  out.reserve(m.size() * 2);
  for (const auto& [k, c] : m) {
    if (k.sign_canonical() != k) continue;
    const auto it = m.find(-k);
    const Complex cm = it == m.end() ? Complex{} : it->second;
    const Complex avg = 0.5 * (c + std::conj(cm));
    out.push_back({k, avg});
    out.push_back({-k, std::conj(avg)});
  }
  for (const auto& [k, c] : m) {
    if (k.sign_canonical() == k) continue;
    if (m.find(-k) == m.end()) {
      const Complex avg = 0.5 * std::conj(c);
      out.push_back({-k, avg});
      out.push_back({k, std::conj(avg)});
    }
  }
  return out;
}

std::vector<Mode> from_map(const std::unordered_map<MultiIndex, Complex, MultiIndexHash>& acc) {
  std::vector<Mode> out;
  out.reserve(acc.size());
  for (const auto& [k, c] : acc) out.push_back({k, c});
  return out;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

CoefficientField::CoefficientField(std::shared_ptr<const FrequencyVector> alpha, std::vector<Mode> modes,
                                   bool real_symmetric)
    : alpha_(std::move(alpha)), modes_(std::move(modes)), real_symmetric_(real_symmetric) {
  if (!alpha_) throw DomainError("coefficient field needs a frequency vector");
  for (const auto& m : modes_) {
    if (m.k.size() != alpha_->dimension())
      throw DimensionError("mode " + to_string(m.k) + " does not match alpha dimension");
    if (m.k.is_zero()) throw DomainError("coefficient fields carry no k = 0 mode (mean-zero reduction)");
    if (!std::isfinite(m.c.real()) || !std::isfinite(m.c.imag()))
      throw DomainError("non-finite coefficient at k = " + to_string(m.k));
  }
  std::sort(modes_.begin(), modes_.end(), mode_less);
  std::vector<Mode> merged;
  merged.reserve(modes_.size());
  for (auto& m : modes_) {
    if (!merged.empty() && merged.back().k == m.k)
      merged.back().c += m.c;
    else
      merged.push_back(std::move(m));
  }
  std::erase_if(merged, [](const Mode& m) { return std::abs(m.c) < kPruneThreshold; });
  modes_ = std::move(merged);
  if (real_symmetric_ && symmetry_defect() > kSymmetryTolerance)
    throw DomainError("field flagged real_symmetric is not conjugate symmetric");
}

Complex CoefficientField::coefficient(const MultiIndex& k) const {
  const Mode* m = find_mode(modes_, k);
  return m ? m->c : Complex{};
}

double CoefficientField::symmetry_defect() const {
  double scale = 0.0;
  for (const auto& m : modes_) scale = std::max(scale, std::abs(m.c));
  if (scale == 0.0) return 0.0;
  double defect = 0.0;
  for (const auto& m : modes_) {
    const Mode* partner = find_mode(modes_, -m.k);
    const Complex cp = partner ? partner->c : Complex{};
    defect = std::max(defect, std::abs(cp - std::conj(m.c)));
  }
  return defect / scale;
}

CoefficientField CoefficientField::scaled(Complex factor) const {
  std::vector<Mode> out(modes_.begin(), modes_.end());
  for (auto& m : out) m.c *= factor;
  const bool keeps_symmetry = real_symmetric_ && factor.imag() == 0.0;
  return CoefficientField(alpha_, std::move(out), keeps_symmetry);
}

CoefficientField operator+(const CoefficientField& a, const CoefficientField& b) {
  if (!(a.alpha() == b.alpha())) throw DimensionError("fields have different frequency vectors");
  std::vector<Mode> all(a.modes_.begin(), a.modes_.end());
  all.insert(all.end(), b.modes_.begin(), b.modes_.end());
  return CoefficientField(a.alpha_, std::move(all), a.real_symmetric_ && b.real_symmetric_);
}

CoefficientField operator-(const CoefficientField& a, const CoefficientField& b) { return a + b.scaled(-1.0); }

double max_abs_difference(const CoefficientField& a, const CoefficientField& b) {
  const CoefficientField d = a - b;
  double m = 0.0;
  for (const auto& md : d.modes()) m = std::max(m, std::abs(md.c));
  return m;
}

double gnorm(const CoefficientField& f, const WeightProfile& profile) {
  if (profile.dimension() != f.dimension()) throw DimensionError("profile and field dimensions differ");
  double acc = 0.0;
  for (const auto& m : f.modes()) {
    const double w = weight(profile, f.alpha(), m.k) * std::abs(m.c);
    acc += w * w;
  }
  return std::sqrt(acc);
}

Complex evaluate(const CoefficientField& f, double x) {
  Complex acc{};
  for (const auto& m : f.modes()) acc += m.c * expi(generated_frequency(f.alpha(), m.k), x);
  return acc;
}

std::vector<Complex> evaluate(const CoefficientField& f, std::span<const double> xs) {
  std::vector<double> hi, lo;
  for (const auto& m : f.modes()) {
    const Real xi = generated_frequency(f.alpha(), m.k);
    hi.push_back(to_double(xi));
    lo.push_back(to_double(xi - Real(hi.back())));
  }
  std::vector<Complex> out(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    Complex acc{};
    for (std::size_t i = 0; i < hi.size(); ++i) {
      const double p = hi[i] * xs[j];
      const double err = std::fma(hi[i], xs[j], -p);
      const double theta = std::remainder(p, 2 * std::numbers::pi) + (err + lo[i] * xs[j]);
      acc += f.modes()[i].c * std::polar(1.0, theta);
    }
    out[j] = acc;
  }
  return out;
}

ProductResult convolve_product_with_leakage(const CoefficientField& u, const CoefficientField& v,
                                            const TruncationBox* box) {
  if (!(u.alpha() == v.alpha())) throw DimensionError("product of fields with different frequency vectors");
  std::unordered_map<MultiIndex, Complex, MultiIndexHash> inside;
  std::unordered_map<MultiIndex, Complex, MultiIndexHash> outside;
  inside.reserve(u.size() * v.size());
  for (const auto& mu : u.modes()) {
    for (const auto& mv : v.modes()) {
      MultiIndex k = mu.k + mv.k;
      if (k.is_zero()) continue;
      const Complex c = mu.c * mv.c;
      if (box == nullptr || box->contains(k))
        inside[std::move(k)] += c;
      else
        outside[std::move(k)] += c;
    }
  }
  double leak = 0.0;
  for (const auto& [k, c] : outside) leak += std::norm(c);
  const bool sym = u.real_symmetric() && v.real_symmetric();
  std::vector<Mode> modes = from_map(inside);
  if (sym) modes = symmetrize(std::move(modes));
  return {CoefficientField(u.alpha_ptr(), std::move(modes), sym), std::sqrt(leak)};
}

CoefficientField convolve_product(const CoefficientField& u, const CoefficientField& v, const TruncationBox& box) {
  return convolve_product_with_leakage(u, v, &box).field;
}

CoefficientField convolve_product(const CoefficientField& u, const CoefficientField& v) {
  return convolve_product_with_leakage(u, v, nullptr).field;
}

CoefficientField x_derivative(const CoefficientField& f) {
  std::vector<Mode> out(f.modes().begin(), f.modes().end());
  for (auto& m : out) m.c *= Complex(0.0, to_double(generated_frequency(f.alpha(), m.k)));
  if (f.real_symmetric()) out = symmetrize(std::move(out));
  return CoefficientField(f.alpha_ptr(), std::move(out), f.real_symmetric());
}

CoefficientField linear_propagator(const CoefficientField& f, double t) {
  std::vector<Mode> out(f.modes().begin(), f.modes().end());
  for (auto& m : out) {
    const Real xi = generated_frequency(f.alpha(), m.k);
    m.c *= expi(xi * xi * xi, t);
  }
  if (f.real_symmetric()) out = symmetrize(std::move(out));
  return CoefficientField(f.alpha_ptr(), std::move(out), f.real_symmetric());
}

double leakage(const CoefficientField& f, const TruncationBox& box) {
  double acc = 0.0;
  for (const auto& m : f.modes())
    if (!box.contains(m.k)) acc += std::norm(m.c);
  return std::sqrt(acc);
}

DecayLaw bracket_decay(double gamma, double amplitude) {
  return [gamma, amplitude](const MultiIndex& k) {
    double r2 = 1.0;
    for (const auto v : k) r2 += static_cast<double>(v) * static_cast<double>(v);
    return amplitude * std::pow(r2, -0.5 * gamma);
  };
}

CoefficientField random_field(std::shared_ptr<const FrequencyVector> alpha, const TruncationBox& box,
                              std::uint64_t seed, const DecayLaw& decay, bool real_symmetric) {
  if (box.dimension() != alpha->dimension()) throw DimensionError("box and alpha dimensions differ");
  std::mt19937_64 rng(seed);
  std::vector<Mode> modes;
  modes.reserve(box.size());
  for (const auto& k : box.modes()) {
    if (real_symmetric && k.sign_canonical() != k) continue;
    const double phase = 2.0 * std::numbers::pi * uniform01(rng);
    const double mag = decay(k);
    if (!(mag > 0.0)) continue;
    const Complex c = std::polar(mag, phase);
    modes.push_back({k, c});
    if (real_symmetric) modes.push_back({-k, std::conj(c)});
  }
  return CoefficientField(std::move(alpha), std::move(modes), real_symmetric);
}

void write_snapshot(std::ostream& os, const CoefficientField& f, int box_bound) {
  os << "qpkdv-snapshot 1\n";
  os << "N " << f.dimension() << '\n';
  os << "M " << box_bound << '\n';
  os << "alpha";
  for (const auto& d : f.alpha().decimals()) os << ' ' << d;
  os << '\n';
  os << "real_symmetric " << (f.real_symmetric() ? 1 : 0) << '\n';
  os << "modes " << f.size() << '\n';
  for (const auto& m : f.modes()) {
    for (const auto v : m.k) os << v << ' ';
    os << format_double(m.c.real()) << ' ' << format_double(m.c.imag()) << '\n';
  }
}

Snapshot read_snapshot(std::istream& is) {
  auto expect_key = [&](const std::string& key) {
    std::string got;
    if (!(is >> got) || got != key) throw ConfigError("snapshot: expected '" + key + "', got '" + got + "'");
  };
  expect_key("qpkdv-snapshot");
  int version = 0;
  is >> version;
  if (version != 1) throw ConfigError("snapshot: unsupported version " + std::to_string(version));
  std::size_t n = 0;
  int bound = 0;
  expect_key("N");
  is >> n;
  expect_key("M");
  is >> bound;
  expect_key("alpha");
  std::vector<std::string> decimals(n);
  for (auto& d : decimals) is >> d;
  int sym = 0;
  expect_key("real_symmetric");
  is >> sym;
  std::size_t count = 0;
  expect_key("modes");
  is >> count;
  if (!is) throw ConfigError("snapshot: malformed header");
  auto alpha = std::make_shared<const FrequencyVector>(std::move(decimals));
  std::vector<Mode> modes;
  modes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<std::int64_t> k(n);
    for (auto& v : k) is >> v;
    std::string re, im;
    is >> re >> im;
    if (!is) throw ConfigError("snapshot: truncated mode record " + std::to_string(i));
    modes.push_back({MultiIndex(std::move(k)), Complex(parse_double(re), parse_double(im))});
  }
  return {CoefficientField(std::move(alpha), std::move(modes), sym != 0), bound};
}

}  // namespace qpkdv
