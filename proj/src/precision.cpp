#include "qpkdv/precision.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "qpkdv/errors.hpp"

namespace qpkdv {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool is_decimal_literal(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') ++i;
  bool digits = false;
  bool dot = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c >= '0' && c <= '9') {
      digits = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else if ((c == 'e' || c == 'E') && digits) {
      ++i;
      if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
      if (i == s.size()) return false;
      for (; i < s.size(); ++i)
        if (s[i] < '0' || s[i] > '9') return false;
      return true;
    } else {
      return false;
    }
  }
  return digits;
}

template <class R>
R parse_generic(std::string_view text) {
  const std::string_view s = trim(text);
  if (s == "golden") return (R(1) + mp::sqrt(R(5))) / 2;
  if (s.starts_with("sqrt(") && s.ends_with(")")) {
    const R inner = parse_generic<R>(s.substr(5, s.size() - 6));
    if (inner < 0) throw DomainError("sqrt of a negative value: " + std::string(s));
    return mp::sqrt(inner);
  }
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const R num = parse_generic<R>(s.substr(0, slash));
    const R den = parse_generic<R>(s.substr(slash + 1));
    if (den == 0) throw DomainError("zero denominator: " + std::string(s));
    return num / den;
  }
  if (!is_decimal_literal(s)) throw ConfigError("not a decimal number: '" + std::string(s) + "'");
  return R(std::string(s));
}

template <class R>
std::string render(const R& x, int digits) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

const Real& two_pi() {
  static const Real v = 2 * mp::acos(Real(-1));
  return v;
}

}  // namespace

Real parse_real(std::string_view text) { return parse_generic<Real>(text); }
WideReal parse_wide(std::string_view text) { return parse_generic<WideReal>(text); }

std::string to_decimal(const Real& x, int digits) { return render(x, digits); }
std::string to_decimal(const WideReal& x, int digits) { return render(x, digits); }

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  const std::string_view s = trim(text);
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("not a floating-point number: '" + std::string(s) + "'");
  return v;
}

Complex expi(double omega, double t) { return std::polar(1.0, omega * t); }

Complex expi(const Real& omega, double t) {
  const double approx = to_double(omega) * t;
  if (std::abs(approx) < 1e4) return std::polar(1.0, approx);
  Real theta = mp::fmod(omega * Real(t), two_pi());
  return std::polar(1.0, to_double(theta));
}

}  // namespace qpkdv
