#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace phnhvi::numerics {

/// Counter-based generator: output n is a SplitMix64 finalizer applied to
/// (key + n * golden). Identical (seed, stream) pairs yield identical
/// streams on every platform, which std:: distributions do not guarantee.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (one draw per call, no cached pair).
  double normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang; shapes below one use the
  /// Gamma(shape + 1) * U^(1/shape) boost.
  double gamma(double shape);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream_id) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Draws a point of the probability simplex from Dir(alpha) by normalizing
/// independent Gamma(alpha_j) variates. Throws InvalidArgument if any
/// alpha_j <= 0 or alpha is empty.
std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng);

/// Fisher-Yates shuffle of [0, n).
std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

}  // namespace phnhvi::numerics
