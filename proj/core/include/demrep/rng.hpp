#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "demrep/types.hpp"

namespace demrep {

/// Seedable generator with a fully specified output stream.
///
/// std::normal_distribution and friends are implementation-defined, so every
/// derived draw here is computed from the raw mt19937_64 stream by hand. Two
/// builds with the same seed produce bit-identical frames and signals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal via Box-Muller; caches the second variate.
  double normal();

  /// Circularly-symmetric complex normal with E|z|^2 = variance.
  Complex complex_normal(double variance = 1.0);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Child seed for sweep point `a`, trial `b` (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

ComplexVector random_complex_normal(Rng& rng, Index n, double variance = 1.0);

/// `count` distinct indices from [0, n), sorted ascending (partial Fisher-Yates).
std::vector<Index> random_subset(Rng& rng, Index n, Index count);

}  // namespace demrep
