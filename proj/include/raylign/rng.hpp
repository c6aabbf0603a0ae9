#pragma once

#include <cstdint>
#include <cmath>

#include <Eigen/Core>

namespace raylign {

/// PCG32 (Melissa O'Neill's pcg32_random_r). Seedable, stream-splittable and
/// bit-portable across platforms, unlike std:: distributions. All randomness
/// in this project flows through this generator.
class Pcg32 {
 public:
  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0) {
    state_ = 0u;
    inc_ = (stream << 1u) | 1u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    std::uint64_t hi = next_u32();
    std::uint64_t lo = next_u32();
    return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  /// Unbiased integer in [0, bound).
  std::uint32_t next_below(std::uint32_t bound) {
    std::uint32_t threshold = (-bound) % bound;
    for (;;) {
      std::uint32_t r = next_u32();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal via Marsaglia polar method (deterministic, keeps a spare).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = uniform(-1.0, 1.0);
      v = uniform(-1.0, 1.0);
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  /// Area-uniform direction on the unit sphere.
  Eigen::Vector3d unit_vector() {
    double u = uniform(-1.0, 1.0);
    double alpha = uniform(0.0, 2.0 * M_PI);
    double s = std::sqrt(std::max(0.0, 1.0 - u * u));
    return {s * std::cos(alpha), s * std::sin(alpha), u};
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace raylign
