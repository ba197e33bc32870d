#pragma once

#include <cstdint>
#include <random>

namespace ama {

/// Seeded RNG with portable output transforms. std::mt19937_64 produces the
/// same stream everywhere; the uniform/normal transforms below avoid the
/// implementation-defined std::*_distribution so that traces and benchmark
/// scenarios are reproducible byte-for-byte across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (deterministic, no cached spare).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  /// Uniform integer in [lo, hi] (inclusive), unbiased enough for test sizing.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ama
