#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "qpkdv/qpfield.hpp"

namespace qpkdv {

enum class Scheme { ExponentialRK4, ExponentialEuler };

Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme s);

struct IntegratorConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::ExponentialRK4;
  double T = 1.0;
  int box = 8;
  /// Diagnostic switch: false integrates only the free Airy flow.
  bool nonlinear = true;
  /// Integrate toward -T instead of +T.
  bool backward = false;
  /// Store every n-th step (the final step is always stored).
  int record_every = 1;
};

struct StepDiagnostics {
  double g00_norm = 0.0;
  /// l2 mass of the nonlinear tendency that left the mode set.
  double leakage = 0.0;
};

/// Time-indexed states over a fixed mode set. States are dense amplitude
/// vectors indexed like `modes()`.
class Trajectory {
 public:
  Trajectory(std::shared_ptr<const FrequencyVector> alpha, std::shared_ptr<const ModeSet> modes,
             bool real_symmetric);

  const FrequencyVector& alpha() const noexcept { return *alpha_; }
  const std::shared_ptr<const FrequencyVector>& alpha_ptr() const noexcept { return alpha_; }
  const ModeSet& modes() const noexcept { return *modes_; }
  const std::shared_ptr<const ModeSet>& modes_ptr() const noexcept { return modes_; }
  bool real_symmetric() const noexcept { return real_symmetric_; }

  std::size_t size() const noexcept { return times_.size(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<Complex>& amplitudes(std::size_t j) const { return states_.at(j); }
  const std::vector<StepDiagnostics>& diagnostics() const noexcept { return diag_; }
  /// Largest |dt| * |phi| over the active interactions (0 for linear runs).
  double phase_step() const noexcept { return phase_step_; }
  CoefficientField state(std::size_t j) const;

  void push(double t, std::vector<Complex> amplitudes, StepDiagnostics d = {});
  void set_phase_step(double v) noexcept { phase_step_ = v; }

 private:
  std::shared_ptr<const FrequencyVector> alpha_;
  std::shared_ptr<const ModeSet> modes_;
  bool real_symmetric_;
  std::vector<double> times_;
  std::vector<std::vector<Complex>> states_;
  std::vector<StepDiagnostics> diag_;
  double phase_step_ = 0.0;
};

/// Dense amplitudes of f on the mode set; throws DomainError if f has a mode outside it.
std::vector<Complex> to_dense(const CoefficientField& f, const ModeSet& modes);
CoefficientField from_dense(std::shared_ptr<const FrequencyVector> alpha, const ModeSet& modes,
                            std::span<const Complex> amplitudes, bool real_symmetric);

/// du_k/dt = i xi_k^3 u_k - i xi_k (u*u)_k on the box.
CoefficientField rhs(const CoefficientField& u, const TruncationBox& box);

/// Grid t_j = j h with h = T / ceil(T/dt) (negated when backward).
std::vector<double> uniform_grid(double T, double dt, bool backward = false);

Trajectory integrate(const CoefficientField& f, const IntegratorConfig& cfg);

/// Free solution of f sampled at the given times.
Trajectory free_trajectory(const CoefficientField& f, std::shared_ptr<const ModeSet> modes,
                           const std::vector<double>& times);

/// M(u)(t) = e^{t d^3} f + int_0^t e^{(t-t') d^3} (-(u^2)_x)(t') dt' on the grid of u,
/// evaluated per mode by product-interpolating quadrature against the exact phase.
/// The output lives on `out` (default: the mode set of u); f must be supported on it.
Trajectory duhamel_map(const CoefficientField& f, const Trajectory& u,
                       std::shared_ptr<const ModeSet> out = nullptr);

/// Scalar used to measure Picard differences.
using TrajectoryNorm = std::function<double(const Trajectory&)>;
/// sup over the grid of gnorm(u(t), profile).
double sup_gnorm(const Trajectory& u, const WeightProfile& profile);

struct PicardConfig {
  double T = 0.1;
  double dt = 1e-3;
  int box = 8;
  int m_max = 20;
  double tol = 1e-12;
  /// Weight profile of the sup-in-time surrogate norm (sigma, a = -1/2 by default use).
  WeightProfile profile{{0.0}, -0.5};
  /// Overrides the surrogate norm when set (e.g. an X-norm on the space-time grid).
  TrajectoryNorm norm;
};

struct PicardReport {
  int iterations = 0;
  std::vector<double> norms;
  std::vector<double> differences;
  std::vector<double> ratios;
  bool converged = false;
  bool diverged = false;
};

struct PicardResult {
  Trajectory trajectory;
  PicardReport report;
};

PicardResult picard_iterate(const CoefficientField& f, const PicardConfig& cfg);

/// c * min(r^{-1/theta}, 1); requires r > 0, 0 < theta < 1/8 and c > 0.
double existence_time(double r, double theta, double c = 1.0);

struct ConservationReport {
  double g00_drift = 0.0;
  double symmetry_drift = 0.0;
  double leakage_total = 0.0;
  double leakage_max = 0.0;
  /// Mass ever found at k = 0 (structurally zero).
  double zero_mode_mass = 0.0;
  /// Largest relative change of any |u_k| (meaningful for linear runs).
  double amplitude_drift = 0.0;
};

ConservationReport conservation_report(const Trajectory& traj);

/// Smooth cutoff chi with chi = 1 on |t| <= 1 and chi = 0 on |t| >= 2, scaled to chi(t/T).
class TimeWindow {
 public:
  explicit TimeWindow(double scale = 1.0);
  double scale() const noexcept { return scale_; }
  double operator()(double t) const;
  std::vector<double> samples(const std::vector<double>& times) const;
  /// The unscaled bump profile.
  static double chi(double t);

 private:
  double scale_;
};

/// CSV rows `t, k_1..k_N, re, im`, one per stored mode and time.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// CSV rows `t, g00_norm, leakage`.
void write_diagnostics_csv(std::ostream& os, const Trajectory& traj);

}  // namespace qpkdv
