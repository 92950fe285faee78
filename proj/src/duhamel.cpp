#include <algorithm>
#include <array>
#include <cmath>

#include "convolver.hpp"
#include "qpkdv/dynamics.hpp"

namespace qpkdv {
namespace {

constexpr int kResync = 64;

/// I_p(w) = int_0^1 x^p e^{-i w x} dx for p = 0..3.
std::array<Complex, 4> moments(double w) {
  std::array<Complex, 4> I{};
  if (std::abs(w) < 2.0) {
    const Complex z(0.0, -w);
    Complex term(1.0);
    for (int n = 0; n < 40; ++n) {
      for (int p = 0; p < 4; ++p) I[p] += term / static_cast<double>(n + p + 1);
      term *= z / static_cast<double>(n + 1);
      if (std::abs(term) < 1e-18) break;
    }
    return I;
  }
  const Complex e = std::polar(1.0, -w);
  const Complex iw(0.0, 1.0 / w);
  I[0] = (1.0 - e) / Complex(0.0, w);
  for (int p = 1; p < 4; ++p) I[p] = iw * (e - static_cast<double>(p) * I[p - 1]);
  return I;
}

/// Monomial coefficients of the Lagrange basis on nodes o, o+1, ..., o+n-1.
std::vector<std::array<double, 4>> lagrange_monomials(int o, int n) {
  std::vector<std::array<double, 4>> out(n);
  for (int m = 0; m < n; ++m) {
    std::array<double, 4> poly{1.0, 0.0, 0.0, 0.0};
    double denom = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j == m) continue;
      const double r = static_cast<double>(o + j);
      std::array<double, 4> next{};
      for (int p = 0; p < 3; ++p) {
        next[p + 1] += poly[p];
        next[p] -= r * poly[p];
      }
      poly = next;
      denom *= static_cast<double>(m - j);
    }
    for (auto& c : poly) c /= denom;
    out[m] = poly;
  }
  return out;
}

struct Stencil {
  int offset;
  std::vector<std::array<double, 4>> basis;
};

}  // namespace

Trajectory duhamel_map(const CoefficientField& f, const Trajectory& u, std::shared_ptr<const ModeSet> out) {
  if (u.size() < 3) throw DomainError("duhamel quadrature needs at least 3 grid nodes");
  if (!(f.alpha() == u.alpha())) throw DimensionError("datum and trajectory use different frequency vectors");
  if (!out) out = u.modes_ptr();
  const ModeSet& in = u.modes();
  const auto& times = u.times();
  const std::size_t nodes = times.size();
  const std::size_t intervals = nodes - 1;
  if (times.front() != 0.0) throw DomainError("duhamel grid must start at t = 0");
  const double h = times[1] - times[0];
  for (std::size_t j = 1; j < nodes; ++j)
    if (std::abs(times[j] - static_cast<double>(j) * h) > 1e-9 * std::abs(h) * static_cast<double>(j))
      throw DomainError("duhamel grid must be uniform");

  const std::vector<Complex> f0 = to_dense(f, *out);
  const bool sym = u.real_symmetric() && f.real_symmetric();
  const detail::Convolver conv(u.alpha(), in, *out, sym, false);

  std::vector<Real> cube_in(in.size()), cube_out(out->size());
  for (std::size_t i = 0; i < in.size(); ++i) cube_in[i] = mp::pow(in.frequency_hp(i), 3);
  for (std::size_t i = 0; i < out->size(); ++i) cube_out[i] = mp::pow(out->frequency_hp(i), 3);

  std::vector<std::vector<Complex>> v(nodes, std::vector<Complex>(in.size()));
  for (std::size_t j = 0; j < nodes; ++j) {
    const auto& a = u.amplitudes(j);
    for (std::size_t i = 0; i < in.size(); ++i)
      if (a[i] != Complex{}) v[j][i] = expi(cube_in[i], -times[j]) * a[i];
  }

  std::vector<Stencil> stencils;
  if (nodes == 3) {
    stencils = {{0, lagrange_monomials(0, 3)}, {-1, lagrange_monomials(-1, 3)}};
  } else {
    stencils = {{0, lagrange_monomials(0, 4)}, {-1, lagrange_monomials(-1, 4)}, {-2, lagrange_monomials(-2, 4)}};
  }
  auto stencil_of = [&](std::size_t i) -> std::size_t {
    if (i == 0) return 0;
    if (nodes == 3) return 1;
    return i + 1 == intervals ? 2 : 1;
  };

  std::vector<std::vector<Complex>> acc(nodes, std::vector<Complex>(out->size()));
  std::vector<Complex> P(nodes);
  std::vector<std::vector<Complex>> W(stencils.size());
  for (const auto& t : conv.triples()) {
    const Real phi = 3 * out->frequency_hp(t.out) * in.frequency_hp(t.a) * in.frequency_hp(t.b);
    const double omega = to_double(phi) * h;
    const auto I = moments(omega);
    for (std::size_t s = 0; s < stencils.size(); ++s) {
      const auto& basis = stencils[s].basis;
      W[s].assign(basis.size(), Complex{});
      for (std::size_t m = 0; m < basis.size(); ++m)
        for (int p = 0; p < 4; ++p) W[s][m] += basis[m][p] * I[p];
    }
    for (std::size_t j = 0; j < nodes; ++j) P[j] = v[j][t.a] * v[j][t.b];
    const Complex coef = Complex(0.0, -out->frequency(t.out)) * t.mult * h;
    const Complex rot = expi(-phi, h);
    Complex z(1.0);
    Complex running{};
    for (std::size_t i = 0; i < intervals; ++i) {
      if (i % kResync == 0 && i > 0) z = expi(-phi, times[i]);
      const std::size_t s = stencil_of(i);
      const std::size_t first = i + stencils[s].offset;
      Complex q{};
      for (std::size_t m = 0; m < W[s].size(); ++m) q += W[s][m] * P[first + m];
      running += z * q;
      acc[i + 1][t.out] += coef * running;
      z *= rot;
    }
  }

  Trajectory result(u.alpha_ptr(), out, sym);
  for (std::size_t j = 0; j < nodes; ++j) {
    if (conv.symmetric()) conv.mirror(acc[j]);
    std::vector<Complex> state(out->size());
    double g = 0.0;
    for (std::size_t i = 0; i < out->size(); ++i) {
      state[i] = expi(cube_out[i], times[j]) * (f0[i] + acc[j][i]);
      g += std::norm(state[i]);
    }
    if (!std::all_of(state.begin(), state.end(), [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }))
      throw NumericalAbort("non-finite Duhamel amplitude at node " + std::to_string(j), static_cast<long>(j));
    result.push(times[j], std::move(state), {std::sqrt(g), 0.0});
  }
  return result;
}

}  // namespace qpkdv
