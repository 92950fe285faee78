#include "convolver.hpp"

#include <algorithm>
#include <cmath>

namespace qpkdv::detail {

bool closed_under_negation(const ModeSet& s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!s.negation(i)) return false;
  return true;
}

Convolver::Convolver(const FrequencyVector& alpha, const ModeSet& in, const ModeSet& out, bool symmetric,
                     bool track_outside)
    : out_size_(out.size()) {
  if (in.dimension() != out.dimension() || in.dimension() != alpha.dimension())
    throw DimensionError("convolver mode sets have different dimensions");
  symmetric_ = symmetric && closed_under_negation(in) && closed_under_negation(out);
  std::unordered_map<MultiIndex, std::uint32_t, MultiIndexHash> outside_ids;
  for (std::uint32_t a = 0; a < in.size(); ++a) {
    for (std::uint32_t b = a; b < in.size(); ++b) {
      MultiIndex k = in.mode(a) + in.mode(b);
      if (k.is_zero()) continue;
      if (symmetric_ && k.sign_canonical() != k) continue;
      const double mult = a == b ? 1.0 : 2.0;
      if (const auto o = out.find(k)) {
        triples_.push_back({static_cast<std::uint32_t>(*o), a, b, mult});
      } else if (track_outside) {
        auto [it, inserted] = outside_ids.try_emplace(std::move(k), static_cast<std::uint32_t>(outside_xi_.size()));
        if (inserted) outside_xi_.push_back(to_double(generated_frequency(alpha, it->first)));
        outside_.push_back({it->second, a, b, mult});
      }
    }
  }
  auto by_out = [](const Triple& x, const Triple& y) {
    return x.out != y.out ? x.out < y.out : (x.a != y.a ? x.a < y.a : x.b < y.b);
  };
  std::sort(triples_.begin(), triples_.end(), by_out);
  std::sort(outside_.begin(), outside_.end(), by_out);
  if (symmetric_) {
    for (std::uint32_t i = 0; i < out.size(); ++i) {
      if (out.mode(i).sign_canonical() != out.mode(i)) continue;
      mirror_.emplace_back(i, static_cast<std::uint32_t>(*out.negation(i)));
    }
  }
}

void Convolver::product(std::span<const Complex> u, std::span<Complex> w) const {
  std::fill(w.begin(), w.end(), Complex{});
  std::size_t i = 0;
  while (i < triples_.size()) {
    const std::uint32_t o = triples_[i].out;
    Complex acc{};
    for (; i < triples_.size() && triples_[i].out == o; ++i) {
      const Triple& t = triples_[i];
      acc += t.mult * (u[t.a] * u[t.b]);
    }
    w[o] = acc;
  }
  if (symmetric_) mirror(w);
}

void Convolver::mirror(std::span<Complex> w) const {
  for (const auto& [c, n] : mirror_) w[n] = std::conj(w[c]);
}

double Convolver::outside_tendency_mass(std::span<const Complex> u) const {
  double mass = 0.0;
  std::size_t i = 0;
  while (i < outside_.size()) {
    const std::uint32_t o = outside_[i].out;
    Complex acc{};
    for (; i < outside_.size() && outside_[i].out == o; ++i) {
      const Triple& t = outside_[i];
      acc += t.mult * (u[t.a] * u[t.b]);
    }
    mass += std::norm(acc) * outside_xi_[o] * outside_xi_[o];
  }
  return std::sqrt(symmetric_ ? 2.0 * mass : mass);
}

}  // namespace qpkdv::detail
