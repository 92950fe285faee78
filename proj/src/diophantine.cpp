#include "qpkdv/diophantine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <regex>

namespace qpkdv {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

BigInt floor_div(const BigInt& p, const BigInt& q) {
  BigInt d = p / q;
  if ((p % q != 0) && ((p < 0) != (q < 0))) --d;
  return d;
}

WideReal wide(const BigInt& x) { return WideReal(x); }

double log_big(const BigInt& x) { return mp::log(wide(x)).convert_to<double>(); }

const WideReal& precision_budget() {
  static const WideReal b = mp::pow(WideReal(10), kWideDigits - 20);
  return b;
}

std::int64_t lattice_int(const BigInt& x) {
  static const BigInt limit = BigInt(1) << 62;
  if (mp::abs(x) >= limit) throw DomainError("convergent too large for a lattice index: " + x.str());
  return x.convert_to<std::int64_t>();
}

WideReal frequency(const InflationSetup& s, const BigInt& k1, const BigInt& k2) {
  return s.alpha1 * wide(k1) + s.alpha2 * wide(k2);
}

/// (1 - e^{-i y t}) / (i y), with the y -> 0 limit t.
Complex oscillatory(double y, double t) {
  const double z = y * t;
  if (std::abs(z) < 1e-4) return t * Complex(1.0 - z * z / 6.0, -z / 2.0);
  return (1.0 - std::polar(1.0, -z)) / Complex(0.0, y);
}

}  // namespace

ContinuedFraction continued_fraction(const WideReal& mu, int depth) {
  if (depth < 1) throw DomainError("continued fraction depth must be positive");
  ContinuedFraction cf;
  cf.mu = mu;
  WideReal x = mu;
  BigInt q1 = 0, q2 = 1;
  for (int i = 0; i < depth; ++i) {
    const WideReal fl = mp::floor(x);
    const BigInt a = static_cast<BigInt>(fl);
    const BigInt q = a * q1 + q2;
    if (i > 0 && wide(q) * wide(q) > precision_budget()) {
      cf.truncated = true;
      break;
    }
    cf.quotients.push_back(a);
    q2 = q1;
    q1 = q;
    const WideReal frac = x - fl;
    if (frac == 0) {
      cf.rational = true;
      break;
    }
    x = 1 / frac;
  }
  return cf;
}

ContinuedFraction continued_fraction(const BigInt& p, const BigInt& q, int depth) {
  if (depth < 1) throw DomainError("continued fraction depth must be positive");
  if (q == 0) throw DomainError("continued fraction of p/0");
  ContinuedFraction cf;
  cf.mu = wide(p) / wide(q);
  BigInt num = q < 0 ? BigInt(-p) : p;
  BigInt den = mp::abs(q);
  for (int i = 0; i < depth; ++i) {
    const BigInt a = floor_div(num, den);
    cf.quotients.push_back(a);
    const BigInt r = num - a * den;
    if (r == 0) {
      cf.rational = true;
      break;
    }
    num = den;
    den = r;
  }
  return cf;
}

ContinuedFraction continued_fraction_from_quotients(std::vector<BigInt> quotients) {
  if (quotients.empty()) throw DomainError("continued fraction needs at least one quotient");
  for (std::size_t i = 1; i < quotients.size(); ++i)
    if (quotients[i] < 1) throw DomainError("partial quotients a_i must be >= 1 for i >= 1");
  ContinuedFraction cf;
  cf.quotients = std::move(quotients);
  const auto c = convergents(cf);
  cf.mu = wide(c.back().p) / wide(c.back().q);
  return cf;
}

ContinuedFraction engineered_liouville(int depth) {
  if (depth < 1) throw DomainError("continued fraction depth must be positive");
  // Enough terms that the value itself is exact at wide precision.
  std::vector<BigInt> a{1};
  BigInt q1 = 1, q2 = 0;
  while (static_cast<int>(a.size()) < depth || wide(q1) * wide(q1) < precision_budget() * 1e40) {
    const BigInt next = q1;
    a.push_back(next);
    const BigInt q = next * q1 + q2;
    q2 = q1;
    q1 = q;
  }
  ContinuedFraction full = continued_fraction_from_quotients(a);
  full.quotients.resize(static_cast<std::size_t>(depth));
  return full;
}

ContinuedFraction parse_continued_fraction(std::string_view text, int depth) {
  const std::string s = trim(text);
  if (s == "liouville") return engineered_liouville(depth);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw ConfigError("continued fraction list must end with ']': " + s);
    std::vector<BigInt> q;
    std::string cur;
    for (char ch : s.substr(1, s.size() - 2)) {
      if (ch == ';' || ch == ',') {
        q.emplace_back(trim(cur));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!trim(cur).empty()) q.emplace_back(trim(cur));
    return continued_fraction_from_quotients(std::move(q));
  }
  static const std::regex ratio(R"(^\s*(-?\d+)\s*(/\s*(\d+))?\s*$)");
  std::smatch m;
  if (std::regex_match(s, m, ratio)) return continued_fraction(BigInt(m[1].str()), BigInt(m[3].matched ? m[3].str() : "1"), depth);
  return continued_fraction(parse_wide(s), depth);
}

std::vector<Convergent> convergents(const ContinuedFraction& cf) {
  std::vector<Convergent> out;
  BigInt p1 = 1, p2 = 0, q1 = 0, q2 = 1;
  for (std::size_t n = 0; n < cf.quotients.size(); ++n) {
    const BigInt& a = cf.quotients[n];
    const BigInt p = a * p1 + p2;
    const BigInt q = a * q1 + q2;
    if (mp::gcd(p, q) != 1) throw Error("convergent " + std::to_string(n) + " is not in lowest terms");
    out.push_back({static_cast<int>(n), p, q});
    p2 = p1;
    p1 = p;
    q2 = q1;
    q1 = q;
  }
  return out;
}

std::vector<Convergent> distinct_convergents(const ContinuedFraction& cf) {
  auto c = convergents(cf);
  if (c.size() >= 2 && c[0].q == c[1].q) c.erase(c.begin());
  return c;
}

WideReal approximation_gap(const ContinuedFraction& cf, const Convergent& c) {
  return mp::abs(cf.mu - wide(c.p) / wide(c.q));
}

TypeEstimate rho_estimate(const ContinuedFraction& cf) {
  const auto d = distinct_convergents(cf);
  if (d.size() < 4) throw DomainError("type estimate needs at least 4 distinct convergents");
  TypeEstimate t;
  for (std::size_t j = 0; j + 1 < d.size(); ++j) {
    if (d[j].q <= 1) continue;
    t.index.push_back(static_cast<int>(j));
    t.rho.push_back(log_big(d[j + 1].q) / log_big(d[j].q) - 1.0);
  }
  if (t.rho.empty()) throw DomainError("type estimate needs denominators above 1");
  const std::size_t tail = t.rho.size() / 2;
  t.rho_hat = *std::max_element(t.rho.begin() + static_cast<std::ptrdiff_t>(tail), t.rho.end());
  t.K_hat = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < t.index.size(); ++s) {
    const auto& c = d[static_cast<std::size_t>(t.index[s])];
    const WideReal gap = approximation_gap(cf, c);
    const double K = gap == 0 ? 0.0
                              : std::exp((2.0 + t.rho_hat) * log_big(c.q) + mp::log(gap).convert_to<double>());
    t.K.push_back(K);
    if (s >= tail && K > 0.0) t.K_hat = std::min(t.K_hat, K);
  }
  if (!std::isfinite(t.K_hat)) t.K_hat = 0.0;
  return t;
}

// ---------------------------------------------------------------------------

InflationSetup inflation_setup(ContinuedFraction cf) {
  InflationSetup s;
  s.alpha1 = cf.mu;
  s.alpha2 = 1;
  s.alpha = std::make_shared<const FrequencyVector>(std::vector<Real>{Real(cf.mu), Real(1)});
  s.cf = std::move(cf);
  return s;
}

InflationSetup inflation_setup(std::string_view alpha1, std::string_view alpha2, int depth) {
  InflationSetup s;
  s.alpha1 = parse_wide(alpha1);
  s.alpha2 = parse_wide(alpha2);
  if (s.alpha2 == 0) throw DomainError("alpha_2 must be nonzero");
  s.alpha = std::make_shared<const FrequencyVector>(std::vector<std::string>{std::string(alpha1), std::string(alpha2)});
  s.cf = continued_fraction(s.alpha1 / s.alpha2, depth);
  return s;
}

InflationDatum inflation_data(const InflationSetup& setup, int n, const WeightProfile& profile, bool unit_weight) {
  if (profile.dimension() != 2) throw DimensionError("inflation data needs N = 2");
  const auto d = distinct_convergents(setup.cf);
  if (n < 0 || static_cast<std::size_t>(n) >= d.size())
    throw DomainError("convergent " + std::to_string(n) + " not available (depth " + std::to_string(d.size()) + ")");
  InflationDatum out{n, d[static_cast<std::size_t>(n)].p, d[static_cast<std::size_t>(n)].q, {}, CoefficientField(setup.alpha), 0.0};
  if (out.p == 0) throw DomainError("inflation data needs p_n != 0");
  out.delta = mp::abs(setup.alpha1 * wide(out.q) - setup.alpha2 * wide(out.p));
  if (out.delta == 0) throw DomainError("small divisor delta_n vanishes: mu is rational");
  const double a = profile.a(), s1 = profile.sigma()[0], s2 = profile.sigma()[1];
  const WideReal q = wide(mp::abs(out.q)), p = wide(mp::abs(out.p));
  const MultiIndex A{-lattice_int(out.q), 0}, B{lattice_int(out.q), -lattice_int(out.p)};
  double cA, cB;
  if (unit_weight) {
    cA = 1.0 / weight_from_frequency(profile, mp::abs(setup.alpha1 * q).convert_to<double>(), A);
    cB = 1.0 / weight_from_frequency(profile, out.delta.convert_to<double>(), B);
  } else {
    cA = mp::pow(q, WideReal(-a - s1)).convert_to<double>();
    cB = (mp::pow(out.delta, WideReal(-a)) * mp::pow(q, WideReal(-s1)) * mp::pow(p, WideReal(-s2))).convert_to<double>();
  }
  out.field = CoefficientField(setup.alpha, std::vector<Mode>{Mode{A, cA}, Mode{B, cB}});
  out.gnorm = gnorm(out.field, profile);
  return out;
}

SecondIterate second_iterate_exact(const InflationSetup& setup, const InflationDatum& datum, double t,
                                   const WeightProfile& profile) {
  const BigInt& p = datum.p;
  const BigInt& q = datum.q;
  const MultiIndex A{-lattice_int(q), 0}, B{lattice_int(q), -lattice_int(p)};
  const Complex cA = datum.field.coefficient(A), cB = datum.field.coefficient(B);
  const WideReal xA = frequency(setup, -q, 0), xB = frequency(setup, q, -p);
  struct Out {
    MultiIndex k;
    WideReal xk, xa, xb;
    double mult;
    Complex c;
  };
  const std::array<Out, 3> outs{{{A + B, xA + xB, xA, xB, 2.0, cA * cB},
                                 {A + A, 2 * xA, xA, xA, 1.0, cA * cA},
                                 {B + B, 2 * xB, xB, xB, 1.0, cB * cB}}};
  SecondIterate r{CoefficientField(setup.alpha), 0.0, 0.0, 0.0, 0.0};
  std::vector<Mode> modes;
  double norms[3];
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& o = outs[i];
    const double y = (3 * o.xk * o.xa * o.xb).convert_to<double>();
    const double xk = o.xk.convert_to<double>();
    const Complex amp = expi(Real(o.xk * o.xk * o.xk), t) * Complex(0.0, -xk) * o.mult * o.c * oscillatory(y, t);
    norms[i] = weight_from_frequency(profile, std::abs(xk), o.k) * std::abs(amp);
    modes.push_back({o.k, amp});
  }
  r.field = CoefficientField(setup.alpha, std::move(modes));
  r.I1 = norms[0];
  r.I2 = norms[1];
  r.I3 = norms[2];
  r.norm = std::sqrt(r.I1 * r.I1 + r.I2 * r.I2 + r.I3 * r.I3);
  return r;
}

double inflation_threshold(const std::vector<double>& sigma, double rho) {
  const double smin = *std::min_element(sigma.begin(), sigma.end());
  return (2.0 * smin - std::min(1.0, rho)) / (1.0 + rho);
}

InflationReport inflation_report(const InflationSetup& setup, const WeightProfile& profile, double t, int n_first,
                                 int n_last, bool unit_weight) {
  if (!(std::abs(t) <= 1.0)) throw DomainError("inflation time must satisfy |t| <= 1");
  if (n_first > n_last) throw DomainError("empty convergent range");
  InflationReport rep;
  try {
    rep.rho_hat = rho_estimate(setup.cf).rho_hat;
  } catch (const DomainError&) {
    rep.rho_hat = std::numeric_limits<double>::quiet_NaN();
  }
  rep.threshold = inflation_threshold(profile.sigma(), rep.rho_hat);
  rep.lower_hypothesis = *std::min_element(profile.sigma().begin(), profile.sigma().end()) + profile.a() >= -2.0;
  const double T = std::abs(t);
  for (int n = n_first; n <= n_last; ++n) {
    const auto datum = inflation_data(setup, n, profile, unit_weight);
    const auto u2 = second_iterate_exact(setup, datum, t, profile);
    InflationRow row{n, datum.p, datum.q, datum.delta, datum.gnorm, u2.I1, u2.I2, u2.I3, 0.0, 0.0};
    const double f2 = datum.gnorm * datum.gnorm;
    row.ratio = u2.norm / f2;
    for (int j = 0; j < 64; ++j) {
      const double tj = -T + 2.0 * T * j / 63.0;
      row.ratio_sup = std::max(row.ratio_sup, second_iterate_exact(setup, datum, tj, profile).norm / f2);
    }
    rep.rows.push_back(std::move(row));
  }
  rep.monotone_growth = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (!(rep.rows[i].ratio > rep.rows[i - 1].ratio)) rep.monotone_growth = false;
  rep.growth = rep.rows.front().ratio > 0.0 ? rep.rows.back().ratio / rep.rows.front().ratio : 0.0;
  return rep;
}

void write_inflation_csv(std::ostream& os, const InflationReport& r) {
  os << "n,p_n,q_n,delta_n,f_norm,I1,I2,I3,ratio,ratio_sup\n";
  for (const auto& row : r.rows)
    os << row.n << ',' << row.p << ',' << row.q << ',' << to_decimal(row.delta, 30) << ',' << format_double(row.f_norm)
       << ',' << format_double(row.I1) << ',' << format_double(row.I2) << ',' << format_double(row.I3) << ','
       << format_double(row.ratio) << ',' << format_double(row.ratio_sup) << '\n';
  os << "# threshold a > " << format_double(r.threshold) << " (rho_hat = " << format_double(r.rho_hat) << ")\n";
}

// ---------------------------------------------------------------------------

BorderlineResult borderline_divergence_demo(const FrequencyVector& alpha, const WeightProfile& profile, int n) {
  const std::size_t N = alpha.dimension();
  if (profile.dimension() != N) throw DimensionError("profile dimension does not match alpha");
  double ssum = 0.0;
  for (double s : profile.sigma()) {
    if (s < 0.0) throw DomainError("borderline demo needs sigma_j >= 0 (violated: sigma_j = " + format_double(s) + ")");
    ssum += s;
  }
  if (ssum > 0.5 * static_cast<double>(N - 1) + 1e-12)
    throw DomainError("borderline demo needs sum sigma_j <= (N-1)/2 (violated: sum = " + format_double(ssum) + ")");
  BorderlineResult r;
  if (n < 1) return r;
  const double aN = std::abs(alpha.component_double(N - 1));
  const double lo = 2.0 * aN, hi = 4.0 * aN;
  const double n2 = static_cast<double>(n) * static_cast<double>(n) - 1.0;  // |k|^2 <= n^2 - 1
  if (n2 < 1.0) return r;
  long double norm2 = 0.0L, pairing = 0.0L;
  std::vector<std::int64_t> k(N, 0);
  auto visit_last = [&](double partial, double r2) {
    const double rest = n2 - r2;
    if (rest < 0.0) return;
    const double kmax = std::floor(std::sqrt(rest));
    const double al = alpha.component_double(N - 1);
    for (double target : {lo, -hi}) {
      // alpha_N k_N in [target - partial, target + 2 aN - partial]
      double a0 = (target - partial) / al, a1 = (target + 2.0 * aN - partial) / al;
      if (a0 > a1) std::swap(a0, a1);
      const double from = std::max(std::ceil(a0) - 1.0, -kmax), to = std::min(std::floor(a1) + 1.0, kmax);
      for (double kn = from; kn <= to; kn += 1.0) {
        k[N - 1] = static_cast<std::int64_t>(kn);
        const double xi = std::abs(partial + al * kn);
        if (xi < lo || xi > hi) continue;
        const double kk2 = r2 + kn * kn;
        if (kk2 == 0.0 || kk2 > n2) continue;
        const double br = std::sqrt(1.0 + kk2);
        const double c = std::pow(br, 1.0 - static_cast<double>(N)) / std::log(br);
        const double w = weight_from_frequency(profile, xi, MultiIndex(k));
        norm2 += static_cast<long double>(w * w * c * c);
        pairing += c;
        ++r.modes;
      }
    }
  };
  std::function<void(std::size_t, double, double)> rec = [&](std::size_t j, double partial, double r2) {
    if (j + 1 == N) {
      visit_last(partial, r2);
      return;
    }
    const int bound = static_cast<int>(std::floor(std::sqrt(std::max(0.0, n2 - r2))));
    for (int v = -bound; v <= bound; ++v) {
      k[j] = v;
      rec(j + 1, partial + alpha.component_double(j) * v, r2 + static_cast<double>(v) * v);
    }
    k[j] = 0;
  };
  rec(0, 0.0, 0.0);
  r.norm = std::sqrt(static_cast<double>(norm2));
  r.pairing = static_cast<double>(pairing);
  return r;
}

}  // namespace qpkdv
