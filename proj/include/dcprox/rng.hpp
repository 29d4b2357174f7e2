#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "dcprox/types.hpp"

namespace dcprox {

/// Seeded RNG with platform-independent draws. mt19937_64 output is specified
/// bit-for-bit by the standard; std::uniform_real_distribution and friends are
/// not, so doubles are derived from the raw bits here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t bits() { return eng_(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

  Vector uniform_box(int dim, double lo, double hi) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  /// Uniform sample from the closed ball B(0, radius).
  Vector uniform_ball(int dim, double radius) {
    Vector dir(dim);
    double n = 0.0;
    do {
      for (int i = 0; i < dim; ++i) dir[i] = normal();
      n = dir.norm();
    } while (n == 0.0);
    const double r = radius * std::pow(uniform01(), 1.0 / dim);
    return dir * (r / n);
  }

 private:
  static constexpr double kTwoPi = 6.283185307179586476925286766559;
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace dcprox
