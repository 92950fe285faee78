#include "qpkdv/restriction_norms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <fftw3.h>

namespace qpkdv {
namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

class FftwBuffer {
 public:
  explicit FftwBuffer(std::size_t n) : n_(n), p_(fftw_alloc_complex(n)) {
    if (!p_) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(p_); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data() noexcept { return p_; }
  Complex& operator[](std::size_t i) noexcept { return reinterpret_cast<Complex*>(p_)[i]; }

 private:
  std::size_t n_;
  fftw_complex* p_;
};

/// Backward (e^{+2 pi i m j / L}) plans, one per length; planning is serialized.
fftw_plan backward_plan(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard lock(mu);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  FftwBuffer a(n), b(n);
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), a.data(), b.data(), FFTW_BACKWARD, FFTW_ESTIMATE);
  plans.emplace(n, p);
  return p;
}

Real cube_hp(const FrequencyVector& alpha, const MultiIndex& k) { return mp::pow(generated_frequency(alpha, k), 3); }

}  // namespace

// ---------------------------------------------------------------------------

SpaceTimeField::SpaceTimeField(std::shared_ptr<const FrequencyVector> alpha, double half_width, std::size_t length)
    : alpha_(std::move(alpha)), half_width_(half_width), length_(length) {
  if (!alpha_) throw DomainError("space-time field needs a frequency vector");
  if (length < 4 || !std::has_single_bit(length)) throw DomainError("space-time grid length must be a power of two");
  if (!(half_width > 0.0)) throw DomainError("space-time half width must be positive");
}

double SpaceTimeField::merge_radius() const noexcept { return 0.05 * std::numbers::pi / step(); }

const ModeSeries* SpaceTimeField::find(const MultiIndex& k) const {
  const auto it = std::lower_bound(modes_.begin(), modes_.end(), k,
                                   [](const ModeSeries& m, const MultiIndex& key) { return m.k < key; });
  return it != modes_.end() && it->k == k ? &*it : nullptr;
}

void SpaceTimeField::add(const MultiIndex& k, double shift, std::vector<Complex> samples) {
  if (samples.size() != length_) throw DimensionError("sample count does not match the space-time grid");
  if (k.size() != alpha_->dimension()) throw DimensionError("mode dimension does not match alpha");
  if (k.is_zero()) throw DomainError("space-time fields carry no k = 0 mode");
  auto it = std::lower_bound(modes_.begin(), modes_.end(), k,
                             [](const ModeSeries& m, const MultiIndex& key) { return m.k < key; });
  if (it == modes_.end() || it->k != k) {
    const double xi = to_double(generated_frequency(*alpha_, k));
    if (std::abs(xi) < kDependenceThreshold) throw DomainError("alpha.k = 0 at k = " + to_string(k));
    it = modes_.insert(it, ModeSeries{k, xi, {}});
  }
  for (auto& c : it->components) {
    const double d = shift - c.shift;
    if (std::abs(d) < merge_radius()) {
      for (std::size_t j = 0; j < length_; ++j) c.samples[j] += std::polar(1.0, -d * time(j)) * samples[j];
      return;
    }
  }
  it->components.push_back({shift, std::move(samples)});
}

SpaceTimeField SpaceTimeField::windowed_free(const CoefficientField& f, const TimeWindow& window, double half_width,
                                             std::size_t length,
                                             const std::function<double(const MultiIndex&)>& shift) {
  SpaceTimeField u(f.alpha_ptr(), half_width, length);
  std::vector<double> chi(length);
  for (std::size_t j = 0; j < length; ++j) chi[j] = window(u.time(j));
  for (const auto& m : f.modes()) {
    std::vector<Complex> s(length);
    for (std::size_t j = 0; j < length; ++j) s[j] = chi[j] * m.c;
    u.add(m.k, shift ? shift(m.k) : 0.0, std::move(s));
  }
  return u;
}

SpaceTimeField SpaceTimeField::from_trajectory(const Trajectory& traj) {
  if (traj.size() < 2) throw DomainError("trajectory needs at least two nodes");
  const double h = traj.times()[1] - traj.times()[0];
  if (!(h > 0.0) || traj.times().front() != 0.0) throw DomainError("trajectory must run forward from t = 0");
  const std::size_t n = traj.size();
  const std::size_t length = std::bit_ceil(4 * n);
  SpaceTimeField u(traj.alpha_ptr(), 0.5 * h * static_cast<double>(length), length);
  const ModeSet& modes = traj.modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    std::vector<Complex> s(length);
    bool any = false;
    const Real cube = mp::pow(modes.frequency_hp(i), 3);
    for (std::size_t j = 0; j < n; ++j) {
      const Complex a = traj.amplitudes(j)[i];
      if (a == Complex{}) continue;
      s[length / 2 + j] = expi(cube, -traj.times()[j]) * a;
      any = true;
    }
    if (any) u.add(modes.mode(i), 0.0, std::move(s));
  }
  return u;
}

std::vector<Complex> SpaceTimeField::profile(const ModeSeries& m) const {
  std::vector<Complex> w(length_);
  for (const auto& c : m.components)
    for (std::size_t j = 0; j < length_; ++j) w[j] += std::polar(1.0, -c.shift * time(j)) * c.samples[j];
  return w;
}

std::vector<Complex> SpaceTimeField::physical(const ModeSeries& m) const {
  std::vector<Complex> w = profile(m);
  const Real cube = cube_hp(*alpha_, m.k);
  for (std::size_t j = 0; j < length_; ++j) w[j] *= expi(cube, time(j));
  return w;
}

double SpaceTimeField::end_ratio() const {
  double peak = 0.0, ends = 0.0;
  for (const auto& m : modes_) {
    const auto w = profile(m);
    for (const auto& c : w) peak = std::max(peak, std::abs(c));
    ends = std::max({ends, std::abs(w.front()), std::abs(w.back())});
  }
  return peak > 0.0 ? ends / peak : 0.0;
}

SpaceTimeField SpaceTimeField::scaled(Complex c) const {
  SpaceTimeField out = *this;
  for (auto& m : out.modes_)
    for (auto& comp : m.components)
      for (auto& s : comp.samples) s *= c;
  return out;
}

SpaceTimeField SpaceTimeField::x_derivative() const {
  SpaceTimeField out = *this;
  for (auto& m : out.modes_)
    for (auto& comp : m.components)
      for (auto& s : comp.samples) s *= Complex(0.0, m.xi);
  return out;
}

SpaceTimeField product(const SpaceTimeField& u, const SpaceTimeField& v, const TruncationBox* box) {
  if (!(u.alpha() == v.alpha()) || u.length() != v.length() || u.half_width() != v.half_width())
    throw DimensionError("space-time product of fields on different grids");
  SpaceTimeField w(u.alpha_ptr(), u.half_width(), u.length());
  const std::size_t L = u.length();
  for (const auto& a : u.modes()) {
    for (const auto& b : v.modes()) {
      const MultiIndex k = a.k + b.k;
      if (k.is_zero()) continue;
      if (box && !box->contains(k)) continue;
      const double xk = to_double(generated_frequency(u.alpha(), k));
      const double phi = 3.0 * xk * a.xi * b.xi;
      for (const auto& ca : a.components)
        for (const auto& cb : b.components) {
          std::vector<Complex> s(L);
          for (std::size_t j = 0; j < L; ++j) s[j] = ca.samples[j] * cb.samples[j];
          w.add(k, phi + ca.shift + cb.shift, std::move(s));
        }
    }
  }
  return w;
}

double time_l2_mass(const SpaceTimeField& u, const WeightProfile& profile) {
  double acc = 0.0;
  for (const auto& m : u.modes()) {
    const double W = weight_from_frequency(profile, std::abs(m.xi), m.k);
    double s = 0.0;
    for (const auto& c : u.profile(m)) s += std::norm(c);
    acc += W * W * s * u.step();
  }
  return acc;
}

// ---------------------------------------------------------------------------

namespace {

ModulationTable transform_unchecked(const SpaceTimeField& u) {
  const std::size_t L = u.length();
  const double h = u.step();
  ModulationTable t;
  t.alpha = u.alpha_ptr();
  t.half_width = u.half_width();
  t.length = L;
  t.dsigma = 2.0 * std::numbers::pi / (static_cast<double>(L) * h);
  const fftw_plan plan = backward_plan(L);
  FftwBuffer in(L), out(L);
  const std::int64_t half = static_cast<std::int64_t>(L / 2);
  for (const auto& m : u.modes()) {
    std::map<std::int64_t, Complex> acc;
    for (const auto& c : m.components) {
      const double nd = std::nearbyint(c.shift / t.dsigma);
      const std::int64_t n = static_cast<std::int64_t>(nd);
      const double eps = c.shift - nd * t.dsigma;
      for (std::size_t j = 0; j < L; ++j) in[j] = std::polar(1.0, -eps * u.time(j)) * c.samples[j];
      fftw_execute_dft(plan, in.data(), out.data());
      for (std::size_t i = 0; i < L; ++i) {
        const std::int64_t mm = static_cast<std::int64_t>(i) < half ? static_cast<std::int64_t>(i)
                                                                     : static_cast<std::int64_t>(i) - static_cast<std::int64_t>(L);
        const double sign = (mm % 2 == 0) ? 1.0 : -1.0;
        acc[mm + n] += (h * kInvSqrt2Pi * sign) * out[i];
      }
    }
    ModeSpectrum s{m.k, m.xi, {}};
    s.bins.reserve(acc.size());
    for (const auto& [q, val] : acc)
      if (val != Complex{}) s.bins.emplace_back(q, val);
    t.modes.push_back(std::move(s));
  }
  return t;
}

}  // namespace

void verify_sign_convention() {
  static std::once_flag once;
  static bool ok = false;
  std::call_once(once, [] {
    auto alpha = std::make_shared<const FrequencyVector>(std::vector<std::string>{"1"});
    const CoefficientField f(alpha, std::vector<Mode>{Mode{MultiIndex{3}, Complex(1.0)}});
    const auto u = SpaceTimeField::windowed_free(f, TimeWindow(1.0), 4.0, 256);
    const auto table = transform_unchecked(u);
    const auto& bins = table.modes.at(0).bins;
    const auto peak = std::max_element(bins.begin(), bins.end(), [](const auto& x, const auto& y) {
      return std::abs(x.second) < std::abs(y.second);
    });
    // Direct Riemann sums of the physical samples at tau = -xi^3 and tau = +xi^3.
    const auto phys = u.physical(u.modes().at(0));
    auto direct = [&](double tau) {
      Complex s{};
      for (std::size_t j = 0; j < u.length(); ++j) s += std::polar(1.0, tau * u.time(j)) * phys[j];
      return std::abs(s) * u.step() * kInvSqrt2Pi;
    };
    const double at_surface = direct(-27.0);
    ok = peak->first == 0 && at_surface > 100.0 * direct(27.0) &&
         std::abs(at_surface - std::abs(peak->second)) < 1e-9 * at_surface;
  });
  if (!ok) throw Error("time transform sign convention self-test failed: free solutions must sit at zero modulation");
}

ModulationTable time_transform(const SpaceTimeField& u) {
  verify_sign_convention();
  return transform_unchecked(u);
}

SpaceTimeField inverse_transform(const ModulationTable& table) {
  SpaceTimeField u(table.alpha, table.half_width, table.length);
  const std::size_t L = table.length;
  const std::int64_t Li = static_cast<std::int64_t>(L);
  std::vector<Complex> roots(L);
  for (std::size_t r = 0; r < L; ++r) roots[r] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(L));
  const double scale = table.dsigma * kInvSqrt2Pi;
  for (const auto& m : table.modes) {
    std::vector<Complex> w(L);
    for (const auto& [q, val] : m.bins) {
      // e^{-i sigma_q t_j} = (-1)^q e^{-2 pi i q j / L}
      const Complex v = (q % 2 == 0 ? scale : -scale) * val;
      const std::int64_t qm = ((q % Li) + Li) % Li;
      for (std::size_t j = 0; j < L; ++j) w[j] += v * roots[static_cast<std::size_t>((qm * static_cast<std::int64_t>(j)) % Li)];
    }
    u.add(m.k, 0.0, std::move(w));
  }
  return u;
}

double mode_l2(const ModeSpectrum& s, double dsigma, double b) {
  double acc = 0.0;
  for (const auto& [q, v] : s.bins) {
    const double sg = static_cast<double>(q) * dsigma;
    acc += (b == 0.0 ? 1.0 : std::pow(1.0 + sg * sg, b)) * std::norm(v);
  }
  return acc * dsigma;
}

double mode_l1(const ModeSpectrum& s, double dsigma, double b) {
  double acc = 0.0;
  for (const auto& [q, v] : s.bins) {
    const double sg = static_cast<double>(q) * dsigma;
    acc += (b == 0.0 ? 1.0 : std::pow(1.0 + sg * sg, 0.5 * b)) * std::abs(v);
  }
  return acc * dsigma;
}

double xnorm(const ModulationTable& t, const WeightProfile& profile, double b) {
  double acc = 0.0;
  for (const auto& m : t.modes) {
    const double W = weight_from_frequency(profile, std::abs(m.xi), m.k);
    acc += W * W * mode_l2(m, t.dsigma, b);
  }
  return std::sqrt(acc);
}

double ynorm(const ModulationTable& t, const WeightProfile& profile, double b) {
  double acc = 0.0;
  for (const auto& m : t.modes) {
    const double W = weight_from_frequency(profile, std::abs(m.xi), m.k) * mode_l1(m, t.dsigma, b);
    acc += W * W;
  }
  return std::sqrt(acc);
}

double znorm(const ModulationTable& t, const WeightProfile& profile) {
  return xnorm(t, profile, 0.5) + ynorm(t, profile, 0.0);
}

double xnorm(const SpaceTimeField& u, const WeightProfile& profile, double b) {
  return xnorm(time_transform(u), profile, b);
}
double ynorm(const SpaceTimeField& u, const WeightProfile& profile, double b) {
  return ynorm(time_transform(u), profile, b);
}
double znorm(const SpaceTimeField& u, const WeightProfile& profile) { return znorm(time_transform(u), profile); }

// ---------------------------------------------------------------------------

Real resonance(const FrequencyVector& alpha, const MultiIndex& k, const MultiIndex& kp) {
  const Real a = generated_frequency(alpha, k);
  const Real b = generated_frequency(alpha, kp);
  const Real c = generated_frequency(alpha, k - kp);
  return 3 * a * b * c;
}

double resonance_identity_residual(const FrequencyVector& alpha, const MultiIndex& k, const MultiIndex& kp) {
  const Real a = generated_frequency(alpha, k);
  const Real b = generated_frequency(alpha, kp);
  const Real c = generated_frequency(alpha, k - kp);
  const Real lhs = a * a * a - c * c * c - b * b * b;
  const Real scale = std::max({abs(a * a * a), abs(b * b * b), abs(c * c * c)});
  if (scale == 0) return 0.0;
  return to_double(abs(lhs - 3 * a * b * c) / scale);
}

Modulations modulations(const FrequencyVector& alpha, double tau, const MultiIndex& k, double taup,
                        const MultiIndex& kp) {
  const Real a = generated_frequency(alpha, k);
  const Real b = generated_frequency(alpha, kp);
  const Real c = generated_frequency(alpha, k - kp);
  const Real t(tau), tp(taup);
  return {abs(t + a * a * a), abs(tp + b * b * b), abs(t - tp + c * c * c)};
}

int omega_classify(const FrequencyVector& alpha, double tau, const MultiIndex& k, double taup, const MultiIndex& kp) {
  const auto m = modulations(alpha, tau, k, taup, kp);
  if (m.m1 >= m.m2 && m.m1 >= m.m3) return 1;
  if (m.m2 >= m.m3) return 2;
  return 3;
}

bool lemma_max_modulation_check(const FrequencyVector& alpha, double tau, const MultiIndex& k, double taup,
                                const MultiIndex& kp, double constant) {
  const auto m = modulations(alpha, tau, k, taup, kp);
  const Real prod = abs(generated_frequency(alpha, k) * generated_frequency(alpha, kp) *
                        generated_frequency(alpha, k - kp));
  const Real bound = prod * Real(constant) * (1 - Real(1e-9));
  return std::max({m.m1, m.m2, m.m3}) >= bound;
}

}  // namespace qpkdv
