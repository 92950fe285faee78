#pragma once

#include <complex>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace qpkdv {

namespace mp = boost::multiprecision;

/// Working precision for lattice frequencies alpha.k (64 significant digits).
using Real = mp::number<mp::cpp_bin_float<64>, mp::et_off>;
/// Precision used for continued-fraction sources (256 significant digits).
using WideReal = mp::number<mp::cpp_bin_float<256>, mp::et_off>;
using BigInt = mp::cpp_int;
using Complex = std::complex<double>;

inline constexpr int kRealDigits = 64;
inline constexpr int kWideDigits = 256;

/// Parses a high-precision real. Accepted forms: a decimal literal
/// ("1.4142", "-2e-3"), "sqrt(D)", "P/Q" with decimal P and Q, and "golden".
Real parse_real(std::string_view text);
WideReal parse_wide(std::string_view text);

/// Decimal rendering with `digits` significant digits (round trip at working precision).
std::string to_decimal(const Real& x, int digits = kRealDigits);
std::string to_decimal(const WideReal& x, int digits = kWideDigits);

inline double to_double(const Real& x) { return x.convert_to<double>(); }

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double x);
/// Parses text produced by format_double (or any decimal) without loss.
double parse_double(std::string_view text);

/// exp(i * omega * t). The product omega*t is reduced modulo 2*pi at working
/// precision when it is too large for a double phase to stay accurate.
Complex expi(const Real& omega, double t);
Complex expi(double omega, double t);

}  // namespace qpkdv
