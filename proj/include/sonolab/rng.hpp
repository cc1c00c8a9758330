#pragma once

#include <cmath>
#include <cstdint>

namespace sonolab {

/// Deterministic RNG with cheap stream splitting.
///
/// Streams are derived from (seed, stream_index) through splitmix64, so
/// per-trial / per-trajectory streams are independent of how work is
/// scheduled. Outputs are identical across platforms: no std::*_distribution
/// is involved anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // Warm up so seed=0 does not start at 0.
    next_u64();
    next_u64();
  }

  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    Rng base(seed);
    // Mix the index through the same permutation; two streams collide only
    // if splitmix64 collides.
    Rng r(base.next_u64() ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    return r;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0,1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; one spare cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925287 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sonolab
