#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qpkdv/lattice.hpp"

namespace qpkdv::detail {

/// One quadratic interaction k_out = k_a + k_b with a <= b; mult is 2 for a != b.
struct Triple {
  std::uint32_t out;
  std::uint32_t a;
  std::uint32_t b;
  double mult;
};

/// Precomputed pair list for w_k = sum_{a+b=k} u_a u_b from an input mode set
/// onto an output mode set. In symmetric mode only sign-canonical outputs are
/// computed and the rest are filled by conjugation.
class Convolver {
 public:
  Convolver(const FrequencyVector& alpha, const ModeSet& in, const ModeSet& out, bool symmetric,
            bool track_outside);

  void product(std::span<const Complex> u, std::span<Complex> w) const;
  /// l2 mass of the tendency -i xi_k w_k over output modes outside the set.
  double outside_tendency_mass(std::span<const Complex> u) const;

  const std::vector<Triple>& triples() const noexcept { return triples_; }
  bool symmetric() const noexcept { return symmetric_; }
  /// Conjugate fill after writing canonical outputs.
  void mirror(std::span<Complex> w) const;

 private:
  std::vector<Triple> triples_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> mirror_;
  std::vector<Triple> outside_;
  std::vector<double> outside_xi_;
  std::size_t out_size_ = 0;
  bool symmetric_ = false;
};

bool closed_under_negation(const ModeSet& s);

}  // namespace qpkdv::detail
