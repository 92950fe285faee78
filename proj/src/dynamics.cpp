#include "qpkdv/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "convolver.hpp"

namespace qpkdv {

Scheme parse_scheme(std::string_view name) {
  if (name == "exponential-RK4" || name == "rk4" || name == "exp-rk4") return Scheme::ExponentialRK4;
  if (name == "exponential-Euler" || name == "euler" || name == "exp-euler") return Scheme::ExponentialEuler;
  throw ConfigError("unknown scheme '" + std::string(name) + "' (expected exponential-RK4 or exponential-Euler)");
}

std::string_view to_string(Scheme s) {
  return s == Scheme::ExponentialRK4 ? "exponential-RK4" : "exponential-Euler";
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(std::shared_ptr<const FrequencyVector> alpha, std::shared_ptr<const ModeSet> modes,
                       bool real_symmetric)
    : alpha_(std::move(alpha)), modes_(std::move(modes)), real_symmetric_(real_symmetric) {
  if (!alpha_ || !modes_) throw DomainError("trajectory needs alpha and a mode set");
  if (alpha_->dimension() != modes_->dimension()) throw DimensionError("trajectory alpha and modes differ");
}

CoefficientField Trajectory::state(std::size_t j) const {
  return from_dense(alpha_, *modes_, states_.at(j), real_symmetric_);
}

void Trajectory::push(double t, std::vector<Complex> amplitudes, StepDiagnostics d) {
  if (amplitudes.size() != modes_->size()) throw DimensionError("state size does not match the mode set");
  if (!times_.empty()) {
    const bool up = times_.size() < 2 ? t > times_.back() : times_[1] > times_[0];
    if (t == times_.back() || (t > times_.back()) != up) throw DomainError("trajectory times must be strictly monotone");
  }
  times_.push_back(t);
  states_.push_back(std::move(amplitudes));
  diag_.push_back(d);
}

std::vector<Complex> to_dense(const CoefficientField& f, const ModeSet& modes) {
  std::vector<Complex> out(modes.size());
  for (const auto& m : f.modes()) {
    const auto i = modes.find(m.k);
    if (!i) throw DomainError("mode " + to_string(m.k) + " lies outside the active mode set");
    out[*i] = m.c;
  }
  return out;
}

CoefficientField from_dense(std::shared_ptr<const FrequencyVector> alpha, const ModeSet& modes,
                            std::span<const Complex> amplitudes, bool real_symmetric) {
  std::vector<Mode> out;
  out.reserve(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (amplitudes[i] != Complex{}) out.push_back({modes.mode(i), amplitudes[i]});
  return CoefficientField(std::move(alpha), std::move(out), real_symmetric);
}

namespace {

double l2(std::span<const Complex> u) {
  double acc = 0.0;
  for (const auto& c : u) acc += std::norm(c);
  return std::sqrt(acc);
}

bool all_finite(std::span<const Complex> u) {
  return std::all_of(u.begin(), u.end(), [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

std::vector<Real> cubes(const ModeSet& modes) {
  std::vector<Real> c(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) c[i] = mp::pow(modes.frequency_hp(i), 3);
  return c;
}

std::vector<Complex> phases(const std::vector<Real>& cube, double t) {
  std::vector<Complex> e(cube.size());
  for (std::size_t i = 0; i < cube.size(); ++i) e[i] = expi(cube[i], t);
  return e;
}

struct Nonlinearity {
  const detail::Convolver& conv;
  const ModeSet& modes;
  mutable std::vector<Complex> w;

  void operator()(std::span<const Complex> u, std::span<Complex> out) const {
    w.resize(modes.size());
    conv.product(u, w);
    for (std::size_t i = 0; i < modes.size(); ++i) out[i] = Complex(0.0, -modes.frequency(i)) * w[i];
  }
};

}  // namespace

CoefficientField rhs(const CoefficientField& u, const TruncationBox& box) {
  const ModeSet modes = ModeSet::from_box(u.alpha(), box);
  const auto dense = to_dense(u, modes);
  const detail::Convolver conv(u.alpha(), modes, modes, u.real_symmetric(), false);
  std::vector<Complex> out(modes.size());
  Nonlinearity{conv, modes, {}}(dense, out);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double xi = modes.frequency(i);
    out[i] += Complex(0.0, xi * xi * xi) * dense[i];
  }
  return from_dense(u.alpha_ptr(), modes, out, u.real_symmetric());
}

std::vector<double> uniform_grid(double T, double dt, bool backward) {
  if (!(T > 0.0) || !(dt > 0.0)) throw ConfigError("time grid needs T > 0 and dt > 0");
  if (dt > T) throw ConfigError("time step dt exceeds the horizon T");
  const long n = static_cast<long>(std::ceil(T / dt - 1e-9));
  const double h = (backward ? -T : T) / static_cast<double>(n);
  std::vector<double> t(n + 1);
  for (long j = 0; j <= n; ++j) t[j] = static_cast<double>(j) * h;
  t[n] = backward ? -T : T;
  return t;
}

Trajectory integrate(const CoefficientField& f, const IntegratorConfig& cfg) {
  if (cfg.record_every < 1) throw ConfigError("record_every must be >= 1");
  const auto times = uniform_grid(cfg.T, cfg.dt, cfg.backward);
  const TruncationBox box(f.alpha(), cfg.box);
  auto modes = std::make_shared<const ModeSet>(ModeSet::from_box(f.alpha(), box));
  const std::size_t n = modes->size();
  std::vector<Complex> u = to_dense(f, *modes);
  const bool sym = f.real_symmetric();

  const long steps = static_cast<long>(times.size()) - 1;
  const double h = times[1] - times[0];
  const auto cube = cubes(*modes);
  const auto E = phases(cube, h);
  const auto E2 = phases(cube, 0.5 * h);

  std::optional<detail::Convolver> conv;
  if (cfg.nonlinear) conv.emplace(f.alpha(), *modes, *modes, sym, true);

  Trajectory traj(f.alpha_ptr(), modes, sym);
  auto record = [&](long j) {
    StepDiagnostics d;
    d.g00_norm = l2(u);
    if (conv) d.leakage = conv->outside_tendency_mass(u);
    traj.push(j == steps ? times.back() : static_cast<double>(j) * h, u, d);
  };
  if (conv) {
    double worst = 0.0;
    for (const auto& t : conv->triples())
      worst = std::max(worst, std::abs(3.0 * modes->frequency(t.out) * modes->frequency(t.a) * modes->frequency(t.b)));
    traj.set_phase_step(std::abs(h) * worst);
  }
  record(0);

  std::vector<Complex> k1(n), k2(n), k3(n), k4(n), tmp(n);
  std::optional<Nonlinearity> N;
  if (conv) N.emplace(Nonlinearity{*conv, *modes, {}});

  for (long step = 1; step <= steps; ++step) {
    if (!N) {
      for (std::size_t i = 0; i < n; ++i) u[i] *= E[i];
    } else if (cfg.scheme == Scheme::ExponentialEuler) {
      (*N)(u, k1);
      for (std::size_t i = 0; i < n; ++i) u[i] = E[i] * (u[i] + h * k1[i]);
    } else {
      (*N)(u, k1);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = E2[i] * (u[i] + 0.5 * h * k1[i]);
      (*N)(tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = E2[i] * u[i] + 0.5 * h * k2[i];
      (*N)(tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = E[i] * u[i] + h * E2[i] * k3[i];
      (*N)(tmp, k4);
      for (std::size_t i = 0; i < n; ++i)
        u[i] = E[i] * u[i] + (h / 6.0) * (E[i] * k1[i] + 2.0 * E2[i] * (k2[i] + k3[i]) + k4[i]);
    }
    if (!all_finite(u)) throw NumericalAbort("non-finite amplitude at step " + std::to_string(step), step);
    if (step % cfg.record_every == 0 || step == steps) record(step);
  }
  return traj;
}

Trajectory free_trajectory(const CoefficientField& f, std::shared_ptr<const ModeSet> modes,
                           const std::vector<double>& times) {
  const auto f0 = to_dense(f, *modes);
  Trajectory traj(f.alpha_ptr(), modes, f.real_symmetric());
  const auto cube = cubes(*modes);
  for (const double t : times) {
    const auto e = phases(cube, t);
    std::vector<Complex> u(f0.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = e[i] * f0[i];
    const StepDiagnostics d{l2(u), 0.0};
    traj.push(t, std::move(u), d);
  }
  return traj;
}

// ---------------------------------------------------------------------------

double sup_gnorm(const Trajectory& u, const WeightProfile& profile) {
  const ModeSet& modes = u.modes();
  std::vector<double> w(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i)
    w[i] = weight_from_frequency(profile, std::abs(modes.frequency(i)), modes.mode(i));
  double sup = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const auto& a = u.amplitudes(j);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(w[i] * a[i]);
    sup = std::max(sup, std::sqrt(acc));
  }
  return sup;
}

namespace {

Trajectory difference(const Trajectory& a, const Trajectory& b) {
  Trajectory d(a.alpha_ptr(), a.modes_ptr(), a.real_symmetric() && b.real_symmetric());
  for (std::size_t j = 0; j < a.size(); ++j) {
    std::vector<Complex> x = a.amplitudes(j);
    const auto& y = b.amplitudes(j);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= y[i];
    d.push(a.times()[j], std::move(x));
  }
  return d;
}

}  // namespace

PicardResult picard_iterate(const CoefficientField& f, const PicardConfig& cfg) {
  if (cfg.m_max < 2) throw ConfigError("picard needs m_max >= 2");
  const auto times = uniform_grid(cfg.T, cfg.dt);
  const TruncationBox box(f.alpha(), cfg.box);
  auto modes = std::make_shared<const ModeSet>(ModeSet::from_box(f.alpha(), box));
  const TrajectoryNorm norm = cfg.norm ? cfg.norm : [&](const Trajectory& t) { return sup_gnorm(t, cfg.profile); };

  PicardReport report;
  Trajectory u = free_trajectory(f, modes, times);
  report.norms.push_back(norm(u));
  if (f.empty()) {
    report.converged = true;
    return {std::move(u), report};
  }
  int above_one = 0;
  for (int m = 1; m <= cfg.m_max; ++m) {
    Trajectory next = duhamel_map(f, u);
    const double diff = norm(difference(next, u));
    if (!std::isfinite(diff)) throw NumericalAbort("non-finite Picard difference", m);
    report.iterations = m;
    report.norms.push_back(norm(next));
    if (!report.differences.empty()) {
      const double prev = report.differences.back();
      const double ratio = prev > 0.0 ? diff / prev : 0.0;
      report.ratios.push_back(ratio);
      above_one = ratio > 1.0 ? above_one + 1 : 0;
    }
    report.differences.push_back(diff);
    u = std::move(next);
    if (diff < cfg.tol) {
      report.converged = report.ratios.empty() || report.ratios.back() <= 0.5;
      break;
    }
    if (above_one >= 3) {
      report.diverged = true;
      break;
    }
  }
  return {std::move(u), report};
}

double existence_time(double r, double theta, double c) {
  if (!(theta > 0.0 && theta < 0.125)) throw DomainError("existence_time needs 0 < theta < 1/8");
  if (!(r > 0.0)) throw DomainError("existence_time needs r > 0");
  if (!(c > 0.0)) throw DomainError("existence_time needs c > 0");
  return c * std::min(std::pow(r, -1.0 / theta), 1.0);
}

ConservationReport conservation_report(const Trajectory& traj) {
  ConservationReport r;
  if (traj.size() == 0) return r;
  const ModeSet& modes = traj.modes();
  std::vector<std::optional<std::size_t>> neg(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) neg[i] = modes.negation(i);
  if (modes.find(MultiIndex::zero(modes.dimension()))) r.zero_mode_mass = 1.0;

  const auto& a0 = traj.amplitudes(0);
  const double g0 = l2(a0);
  double amax0 = 0.0;
  for (const auto& c : a0) amax0 = std::max(amax0, std::abs(c));
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const auto& a = traj.amplitudes(j);
    const double g = l2(a);
    if (g0 > 0.0) r.g00_drift = std::max(r.g00_drift, std::abs(g - g0) / g0);
    double amax = 0.0, defect = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      amax = std::max(amax, std::abs(a[i]));
      const Complex partner = neg[i] ? a[*neg[i]] : Complex{};
      defect = std::max(defect, std::abs(partner - std::conj(a[i])));
      if (amax0 > 0.0) r.amplitude_drift = std::max(r.amplitude_drift, std::abs(std::abs(a[i]) - std::abs(a0[i])) / amax0);
    }
    if (traj.real_symmetric() && amax > 0.0) r.symmetry_drift = std::max(r.symmetry_drift, defect / amax);
    const double leak = traj.diagnostics()[j].leakage;
    r.leakage_total += leak;
    r.leakage_max = std::max(r.leakage_max, leak);
  }
  return r;
}

// ---------------------------------------------------------------------------

TimeWindow::TimeWindow(double scale) : scale_(scale) {
  if (!(scale > 0.0)) throw DomainError("time window scale must be positive");
}

double TimeWindow::chi(double t) {
  const double x = std::abs(t) - 1.0;
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return b / (a + b);
}

double TimeWindow::operator()(double t) const { return chi(t / scale_); }

std::vector<double> TimeWindow::samples(const std::vector<double>& times) const {
  std::vector<double> out(times.size());
  std::transform(times.begin(), times.end(), out.begin(), [this](double t) { return (*this)(t); });
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t dim = traj.modes().dimension();
  os << 't';
  for (std::size_t j = 1; j <= dim; ++j) os << ",k_" << j;
  os << ",re,im\n";
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const auto& a = traj.amplitudes(j);
    const std::string t = format_double(traj.times()[j]);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == Complex{}) continue;
      os << t;
      for (const auto v : traj.modes().mode(i)) os << ',' << v;
      os << ',' << format_double(a[i].real()) << ',' << format_double(a[i].imag()) << '\n';
    }
  }
}

void write_diagnostics_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,g00_norm,leakage\n";
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const auto& d = traj.diagnostics()[j];
    os << format_double(traj.times()[j]) << ',' << format_double(d.g00_norm) << ',' << format_double(d.leakage) << '\n';
  }
}

}  // namespace qpkdv
