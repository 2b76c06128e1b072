#pragma once

#include <complex>
#include <cstdint>
#include <limits>

namespace rswarm {

/// Purposes that own an independent random stream. Changing the draws of one
/// purpose never perturbs another.
enum class Stream : std::uint64_t {
  UserPlacement = 1,
  Fading = 2,
  LineOfSight = 3,
  Shadowing = 4,
  Test = 99,
};

/// Counter-based generator: the n-th output is a pure function of
/// (seed, stream, substream, n), so any stream can be reproduced in
/// isolation. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, Stream stream, std::uint64_t substream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller; both outputs are used).
  double normal();
  /// Circularly symmetric complex Gaussian with unit variance.
  std::complex<double> complex_normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace rswarm
