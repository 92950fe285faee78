#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "json.hpp"

#include "qpkdv/restriction_norms.hpp"

namespace qpkdv {
namespace {

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

CoefficientField single(std::shared_ptr<const FrequencyVector> alpha, const MultiIndex& k) {
  return CoefficientField(std::move(alpha), std::vector<Mode>{Mode{k, Complex(1.0)}});
}

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::clamp<std::size_t>(threads < 1 ? 1 : static_cast<std::size_t>(threads), 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void check_Ts(const std::vector<double>& Ts) {
  if (Ts.empty()) throw DomainError("probe needs at least one T");
  for (double T : Ts)
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("probe T must be positive");
}

ProbeResult finish(std::vector<ProbeRecord> records, const std::vector<double>& Ts, std::size_t members) {
  ProbeResult r;
  r.records = std::move(records);
  r.Ts = Ts;
  std::vector<double> lx, ly;
  for (std::size_t t = 0; t < Ts.size(); ++t) {
    std::vector<double> ratios;
    ratios.reserve(members);
    for (std::size_t i = 0; i < members; ++i) ratios.push_back(r.records[t * members + i].ratio);
    r.per_T.push_back(ratio_stats(ratios));
    if (r.per_T.back().max > 0.0) {
      lx.push_back(std::log(Ts[t]));
      ly.push_back(std::log(r.per_T.back().max));
    }
  }
  std::tie(r.slope, r.slope_stderr) = fit_slope(lx, ly);
  return r;
}

struct Grid {
  double half_width;
  std::size_t length;
};

Grid probe_grid(double T, const ProbeOptions& opt) {
  if (opt.length < 4 || !std::has_single_bit(opt.length)) throw DomainError("probe length must be a power of two");
  const double h = 4.0 * T / static_cast<double>(opt.length);
  const double want = std::max(2.0 * T, opt.min_half_width);
  const std::size_t L = std::bit_ceil(static_cast<std::size_t>(std::ceil(2.0 * want / h)));
  return {0.5 * h * static_cast<double>(L), L};
}

}  // namespace

Inequality parse_inequality(std::string_view name) {
  if (name == "E41" || name == "e41") return Inequality::E41;
  if (name == "E42" || name == "e42") return Inequality::E42;
  if (name == "BE1" || name == "be1") return Inequality::BE1;
  if (name == "BE2" || name == "be2") return Inequality::BE2;
  if (name == "BE3" || name == "be3") return Inequality::BE3;
  throw ConfigError("unknown inequality '" + std::string(name) + "' (E41, E42, BE1, BE2, BE3)");
}

std::string_view to_string(Inequality which) {
  switch (which) {
    case Inequality::E41: return "E41";
    case Inequality::E42: return "E42";
    case Inequality::BE1: return "BE1";
    case Inequality::BE2: return "BE2";
    case Inequality::BE3: return "BE3";
  }
  return "?";
}

RatioStats ratio_stats(std::vector<double> ratios) {
  RatioStats s;
  s.count = ratios.size();
  if (ratios.empty()) return s;
  std::sort(ratios.begin(), ratios.end());
  s.max = ratios.back();
  double sum = 0.0;
  for (double r : ratios) sum += r;
  s.mean = sum / static_cast<double>(ratios.size());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(ratios.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, ratios.size() - 1);
    return ratios[lo] + (pos - static_cast<double>(lo)) * (ratios[hi] - ratios[lo]);
  };
  s.q50 = q(0.5);
  s.q90 = q(0.9);
  s.q99 = q(0.99);
  return s;
}

std::pair<double, double> fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (x.size() != y.size()) throw DimensionError("fit_slope needs equal-length inputs");
  const std::size_t n = x.size();
  if (n < 2) return {nan, nan};
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return {nan, nan};
  const double slope = sxy / sxx;
  if (n == 2) return {slope, 0.0};
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - my - slope * (x[i] - mx);
    ss += e * e;
  }
  return {slope, std::sqrt(ss / static_cast<double>(n - 2) / sxx)};
}

std::vector<FieldPair> make_ensemble(std::shared_ptr<const FrequencyVector> alpha, const Ensemble& ens) {
  if (ens.size < 1) throw DomainError("ensemble size must be positive");
  if (ens.modes_per_field < 1) throw DomainError("modes_per_field must be positive");
  if (ens.gammas.empty()) throw DomainError("ensemble needs at least one decay exponent");
  if (ens.modulation_spread < 0.0) throw DomainError("modulation_spread must be nonnegative");
  const TruncationBox box(*alpha, ens.box);
  const std::size_t N = alpha->dimension();
  std::vector<FieldPair> out;

  if (ens.adversarial) {
    const MultiIndex ks = min_frequency_gap(*alpha, box).index;
    const MultiIndex e1 = MultiIndex::unit(N, 0);
    std::vector<std::pair<MultiIndex, MultiIndex>> pairs{{ks, ks}, {ks, e1}, {ks, e1 - ks}, {e1, -ks}};
    if (box.contains(ks + ks)) pairs.emplace_back(ks, -(ks + ks));
    for (auto& [a, b] : pairs) {
      if (static_cast<int>(out.size()) >= ens.size) break;
      if (a.is_zero() || b.is_zero() || !box.contains(a) || !box.contains(b)) continue;
      out.push_back({single(alpha, a), single(alpha, b), nullptr, nullptr});
    }
  }

  std::mt19937_64 rng(ens.seed);
  const auto& all = box.modes();
  std::vector<MultiIndex> pool;
  for (const auto& k : all)
    if (!k.is_zero()) pool.push_back(k);
  auto draw = [&](double gamma) {
    std::vector<Mode> modes;
    std::vector<std::size_t> picked;
    const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(ens.modes_per_field), pool.size());
    while (picked.size() < want) {
      const std::size_t i = static_cast<std::size_t>(u01(rng) * static_cast<double>(pool.size())) % pool.size();
      if (std::find(picked.begin(), picked.end(), i) != picked.end()) continue;
      picked.push_back(i);
      const MultiIndex& k = pool[i];
      double k2 = 0.0;
      for (auto c : k) k2 += static_cast<double>(c * c);
      const double mag = std::pow(1.0 + k2, -0.5 * gamma);
      modes.push_back({k, std::polar(mag, 2.0 * std::numbers::pi * u01(rng))});
    }
    return CoefficientField(alpha, std::move(modes));
  };
  auto shifts = [&](const CoefficientField& f) -> std::function<double(const MultiIndex&)> {
    if (ens.modulation_spread == 0.0) return nullptr;
    auto table = std::make_shared<std::vector<std::pair<MultiIndex, double>>>();
    for (const auto& m : f.modes()) table->emplace_back(m.k, ens.modulation_spread * (2.0 * u01(rng) - 1.0));
    return [table](const MultiIndex& k) {
      for (const auto& [kk, s] : *table)
        if (kk == k) return s;
      return 0.0;
    };
  };
  for (int i = 0; static_cast<int>(out.size()) < ens.size; ++i) {
    const double gamma = ens.gammas[static_cast<std::size_t>(i) % ens.gammas.size()];
    CoefficientField u = draw(gamma);
    CoefficientField v = draw(gamma);
    auto su = shifts(u);
    auto sv = shifts(v);
    out.push_back({std::move(u), std::move(v), std::move(su), std::move(sv)});
  }
  return out;
}

ProbeResult bilinear_probe(std::shared_ptr<const FrequencyVector> alpha, const std::vector<double>& sigma, double b,
                           const std::vector<double>& Ts, const Ensemble& ens, Inequality which,
                           const ProbeOptions& opt) {
  check_Ts(Ts);
  if (sigma.size() != alpha->dimension()) throw DimensionError("sigma dimension does not match alpha");
  const auto members = make_ensemble(alpha, ens);
  const bool derivative = which == Inequality::E41 || which == Inequality::E42;
  const WeightProfile p(sigma, derivative ? -0.5 : 0.0);
  std::vector<ProbeRecord> records(Ts.size() * members.size());
  parallel_for(records.size(), opt.threads, [&](std::size_t slot) {
    const std::size_t t = slot / members.size();
    const std::size_t i = slot % members.size();
    const double T = Ts[t];
    const TimeWindow window(0.5 * T);
    const Grid g = probe_grid(T, opt);
    const auto& pair = members[i];
    const auto U = SpaceTimeField::windowed_free(pair.u, window, g.half_width, g.length, pair.shift_u);
    const auto V = SpaceTimeField::windowed_free(pair.v, window, g.half_width, g.length, pair.shift_v);
    auto W = product(U, V);
    if (derivative) W = W.x_derivative();
    const auto tu = time_transform(U), tv = time_transform(V), tw = time_transform(W);
    double lhs = 0.0, rhs = 0.0;
    switch (which) {
      case Inequality::E41:
        lhs = xnorm(tw, p, -0.5);
        rhs = xnorm(tu, p, 0.5) * xnorm(tv, p, 0.5);
        break;
      case Inequality::E42:
        lhs = ynorm(tw, p, -1.0);
        rhs = xnorm(tu, p, 0.5) * xnorm(tv, p, 0.5);
        break;
      case Inequality::BE1:
        lhs = xnorm(tw, p, 0.0);
        rhs = xnorm(tu, p, b) * xnorm(tv, p, b);
        break;
      case Inequality::BE2:
        lhs = xnorm(tw, p, -b);
        rhs = xnorm(tu, p, b) * xnorm(tv, p, 0.0);
        break;
      case Inequality::BE3:
        lhs = ynorm(tw, p, -0.5);
        rhs = xnorm(tu, p, b) * xnorm(tv, p, b);
        break;
    }
    records[slot] = {static_cast<int>(i), T, lhs, rhs, rhs > 0.0 ? lhs / rhs : 0.0};
  });
  return finish(std::move(records), Ts, members.size());
}

ProbeResult time_localization_probe(std::shared_ptr<const FrequencyVector> alpha, const WeightProfile& profile,
                                    double eps, double epsp, const std::vector<double>& Ts, const Ensemble& ens,
                                    const ProbeOptions& opt) {
  check_Ts(Ts);
  if (!(eps > epsp && epsp > 0.0 && eps < 0.5)) throw DomainError("time localization needs 0 < eps' < eps < 1/2");
  if (profile.dimension() != alpha->dimension()) throw DimensionError("profile dimension does not match alpha");
  const auto members = make_ensemble(alpha, ens);
  std::vector<ProbeRecord> records(Ts.size() * members.size());
  parallel_for(records.size(), opt.threads, [&](std::size_t slot) {
    const std::size_t t = slot / members.size();
    const std::size_t i = slot % members.size();
    const double T = Ts[t];
    const Grid g = probe_grid(T, opt);
    const auto U = SpaceTimeField::windowed_free(members[i].u, TimeWindow(0.5 * T), g.half_width, g.length,
                                                 members[i].shift_u);
    const auto tu = time_transform(U);
    const double lhs = xnorm(tu, profile, 0.5 - eps);
    const double rhs = xnorm(tu, profile, 0.5);
    records[slot] = {static_cast<int>(i), T, lhs, rhs, rhs > 0.0 ? lhs / rhs : 0.0};
  });
  return finish(std::move(records), Ts, members.size());
}

void write_probe_csv(std::ostream& os, const ProbeResult& r) {
  os << "pair_id,T,lhs,rhs,ratio\n";
  for (const auto& rec : r.records)
    os << rec.pair_id << ',' << format_double(rec.T) << ',' << format_double(rec.lhs) << ','
       << format_double(rec.rhs) << ',' << format_double(rec.ratio) << '\n';
}

std::string probe_summary_json(const ProbeResult& r) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["per_T"] = nlohmann::json::array();
  for (std::size_t t = 0; t < r.Ts.size(); ++t) {
    const auto& s = r.per_T[t];
    j["per_T"].push_back({{"T", r.Ts[t]}, {"count", s.count}, {"max", num(s.max)}, {"mean", num(s.mean)},
                          {"q50", num(s.q50)}, {"q90", num(s.q90)}, {"q99", num(s.q99)}});
  }
  j["slope"] = num(r.slope);
  j["slope_stderr"] = num(r.slope_stderr);
  return j.dump(2);
}

}  // namespace qpkdv
