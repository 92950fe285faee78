#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "qpkdv/dynamics.hpp"

namespace qpkdv {

/// Slow samples P(t_j) carried at an exact modulation offset: the mode's
/// interaction-picture profile gains e^{-i shift t} P(t).
struct Component {
  double shift = 0.0;
  std::vector<Complex> samples;
};

struct ModeSeries {
  MultiIndex k;
  double xi = 0.0;
  std::vector<Component> components;
};

/// Space-time field on the periodic grid t_j = -T_w + j h, h = 2 T_w / L, L a
/// power of two. Mode k holds u_k(t) = e^{i xi_k^3 t} w_k(t) with
/// w_k = sum_c e^{-i shift_c t} P_c(t), so free solutions have w_k constant.
class SpaceTimeField {
 public:
  SpaceTimeField(std::shared_ptr<const FrequencyVector> alpha, double half_width, std::size_t length);

  /// chi-windowed free solution of f; optional per-mode modulation shifts.
  static SpaceTimeField windowed_free(const CoefficientField& f, const TimeWindow& window, double half_width,
                                      std::size_t length,
                                      const std::function<double(const MultiIndex&)>& shift = nullptr);
  /// Trajectory on [0, T] placed on a zero-padded grid with the same step (sharp cutoff).
  static SpaceTimeField from_trajectory(const Trajectory& traj);

  const FrequencyVector& alpha() const noexcept { return *alpha_; }
  const std::shared_ptr<const FrequencyVector>& alpha_ptr() const noexcept { return alpha_; }
  double half_width() const noexcept { return half_width_; }
  std::size_t length() const noexcept { return length_; }
  double step() const noexcept { return 2.0 * half_width_ / static_cast<double>(length_); }
  double time(std::size_t j) const noexcept { return -half_width_ + static_cast<double>(j) * step(); }
  /// Shifts closer than this share one component.
  double merge_radius() const noexcept;

  const std::vector<ModeSeries>& modes() const noexcept { return modes_; }
  const ModeSeries* find(const MultiIndex& k) const;

  /// Adds e^{-i shift t} samples to mode k (merging with a nearby shift).
  void add(const MultiIndex& k, double shift, std::vector<Complex> samples);

  /// w_k(t_j) on the grid.
  std::vector<Complex> profile(const ModeSeries& m) const;
  /// u_k(t_j) on the grid.
  std::vector<Complex> physical(const ModeSeries& m) const;
  /// Largest |w_k| at the first and last grid node relative to the largest |w_k|.
  double end_ratio() const;

  SpaceTimeField scaled(Complex c) const;
  SpaceTimeField x_derivative() const;

 private:
  std::shared_ptr<const FrequencyVector> alpha_;
  double half_width_;
  std::size_t length_;
  std::vector<ModeSeries> modes_;
};

/// Pointwise-in-time product (uv)_k = sum_{a+b=k} u_a v_b, k = 0 dropped,
/// optionally restricted to a box.
SpaceTimeField product(const SpaceTimeField& u, const SpaceTimeField& v, const TruncationBox* box = nullptr);

/// int gnorm(u(t), profile)^2 dt as a grid sum.
double time_l2_mass(const SpaceTimeField& u, const WeightProfile& profile);

struct ModeSpectrum {
  MultiIndex k;
  double xi = 0.0;
  /// Nonzero samples at sigma = q * dsigma, sorted by q.
  std::vector<std::pair<std::int64_t, Complex>> bins;
};

/// Transform in the modulation variable sigma = tau + xi^3:
/// w~(sigma) = (2 pi)^{-1/2} int e^{i sigma t} w(t) dt as a Riemann sum on the grid.
struct ModulationTable {
  std::shared_ptr<const FrequencyVector> alpha;
  double half_width = 0.0;
  std::size_t length = 0;
  double dsigma = 0.0;
  std::vector<ModeSpectrum> modes;
};

ModulationTable time_transform(const SpaceTimeField& u);
SpaceTimeField inverse_transform(const ModulationTable& table);

/// Checks once that a windowed free mode peaks at zero modulation; throws Error otherwise.
void verify_sign_convention();

/// sum_sigma <sigma>^{2b} |w~|^2 dsigma for one mode.
double mode_l2(const ModeSpectrum& s, double dsigma, double b);
/// sum_sigma <sigma>^b |w~| dsigma for one mode.
double mode_l1(const ModeSpectrum& s, double dsigma, double b);

double xnorm(const ModulationTable& t, const WeightProfile& profile, double b);
double ynorm(const ModulationTable& t, const WeightProfile& profile, double b);
/// xnorm(b = 1/2) + ynorm(b = 0).
double znorm(const ModulationTable& t, const WeightProfile& profile);
double xnorm(const SpaceTimeField& u, const WeightProfile& profile, double b);
double ynorm(const SpaceTimeField& u, const WeightProfile& profile, double b);
double znorm(const SpaceTimeField& u, const WeightProfile& profile);

// ---------------------------------------------------------------------------

/// 3 (alpha.k)(alpha.k')(alpha.(k-k')).
Real resonance(const FrequencyVector& alpha, const MultiIndex& k, const MultiIndex& kp);
/// |(a^3 - (a-b)^3 - b^3) - resonance| / max(|a|^3, |a-b|^3, |b|^3) at working precision.
double resonance_identity_residual(const FrequencyVector& alpha, const MultiIndex& k, const MultiIndex& kp);

struct Modulations {
  Real m1;  ///< |tau + (alpha.k)^3|
  Real m2;  ///< |tau' + (alpha.k')^3|
  Real m3;  ///< |tau - tau' + (alpha.(k-k'))^3|
};
Modulations modulations(const FrequencyVector& alpha, double tau, const MultiIndex& k, double taup,
                        const MultiIndex& kp);

/// Region of maximal modulation (1, 2 or 3); ties go to the smaller index.
int omega_classify(const FrequencyVector& alpha, double tau, const MultiIndex& k, double taup, const MultiIndex& kp);

/// max modulation >= constant * |alpha.k||alpha.(k-k')||alpha.k'| * (1 - 1e-9).
bool lemma_max_modulation_check(const FrequencyVector& alpha, double tau, const MultiIndex& k, double taup,
                                const MultiIndex& kp, double constant = 1.0 / 3.0);

// ---------------------------------------------------------------------------

enum class Inequality { E41, E42, BE1, BE2, BE3 };
Inequality parse_inequality(std::string_view name);
std::string_view to_string(Inequality which);

struct Ensemble {
  std::uint64_t seed = 1;
  int size = 1000;
  int box = 8;
  int modes_per_field = 3;
  /// Decay exponents cycled over ensemble members (<k>^{-gamma}).
  std::vector<double> gammas{1.0, 2.0};
  /// Members get modulation shifts uniform in [-spread, spread] (0 disables).
  double modulation_spread = 0.0;
  /// Inject two-mode near-resonant pairs built from the minimal frequency gap.
  bool adversarial = true;
};

struct ProbeOptions {
  /// Samples across [-2T, 2T]; the grid is zero-padded to at least min_half_width.
  std::size_t length = 128;
  /// Lower bound on the grid half width, so dsigma <= pi / min_half_width.
  double min_half_width = 6.283185307179586;
  int threads = 1;
};

struct ProbeRecord {
  int pair_id = 0;
  double T = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

struct RatioStats {
  std::size_t count = 0;
  double max = 0.0;
  double mean = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double q99 = 0.0;
};

RatioStats ratio_stats(std::vector<double> ratios);

struct ProbeResult {
  std::vector<ProbeRecord> records;
  std::vector<double> Ts;
  std::vector<RatioStats> per_T;
  /// Least-squares slope of log(max ratio) against log T, with its standard error (NaN for one T).
  double slope = 0.0;
  double slope_stderr = 0.0;
};

struct FieldPair {
  CoefficientField u;
  CoefficientField v;
  /// Per-mode modulation shifts, applied when building the space-time fields.
  std::function<double(const MultiIndex&)> shift_u;
  std::function<double(const MultiIndex&)> shift_v;
};

/// Deterministic members; adversarial pairs come first when enabled.
std::vector<FieldPair> make_ensemble(std::shared_ptr<const FrequencyVector> alpha, const Ensemble& ens);

/// Ratio LHS/RHS of the selected inequality for inputs windowed to [-T, T]:
/// E41 ||(uv)_x||_{X^{s,-1/2,-1/2}} / ||u||_{X^{s,-1/2,1/2}} ||v||_{X^{s,-1/2,1/2}},
/// E42 the same with Y^{s,-1/2,-1} on the left,
/// BE1 ||uv||_{X^{s,0,0}} / ||u||_{X^{s,0,b}} ||v||_{X^{s,0,b}},
/// BE2 ||uv||_{X^{s,0,-b}} / ||u||_{X^{s,0,b}} ||v||_{X^{s,0,0}},
/// BE3 ||uv||_{Y^{s,0,-1/2}} / ||u||_{X^{s,0,b}} ||v||_{X^{s,0,b}}.
ProbeResult bilinear_probe(std::shared_ptr<const FrequencyVector> alpha, const std::vector<double>& sigma, double b,
                           const std::vector<double>& Ts, const Ensemble& ens, Inequality which,
                           const ProbeOptions& opt = {});

/// Ratio ||u||_{X^{s,a,1/2-eps}} / ||u||_{X^{s,a,1/2}} for u windowed to [-T, T].
ProbeResult time_localization_probe(std::shared_ptr<const FrequencyVector> alpha, const WeightProfile& profile,
                                    double eps, double epsp, const std::vector<double>& Ts, const Ensemble& ens,
                                    const ProbeOptions& opt = {});

/// Fitted slope and standard error of y against x.
std::pair<double, double> fit_slope(const std::vector<double>& x, const std::vector<double>& y);

/// CSV rows `pair_id, T, lhs, rhs, ratio`.
void write_probe_csv(std::ostream& os, const ProbeResult& r);
/// JSON summary: per-T statistics, slope and its standard error.
std::string probe_summary_json(const ProbeResult& r);

}  // namespace qpkdv
