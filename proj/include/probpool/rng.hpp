#pragma once

// Deterministic, cross-platform random streams. Keys are derived from a
// single 64-bit seed with the SplitMix64 finalizer; every variate is a pure
// function of (key, draw counter), so independent streams can be forked per
// purpose and never perturb each other. All distribution transforms are
// written out explicitly instead of relying on <random> distributions, whose
// output is implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace probpool::rng {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t word) {
  return mix64(key ^ mix64(word));
}

class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}

  Stream fork(std::uint64_t word) const { return Stream(derive_key(key_, word)); }

  std::uint64_t next_u64() { return derive_key(key_, counter_++); }

  // Strictly inside (0,1): 53 mantissa bits, offset by half an ulp.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  bool next_bernoulli(double p) { return next_unit() < p; }

  // Box-Muller; consumes exactly two uniforms.
  double next_normal() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Marsaglia-Tsang; shape < 1 boosted via the U^{1/shape} identity.
  double next_gamma(double shape) {
    if (!(shape > 0.0)) throw std::domain_error("gamma shape must be positive");
    if (shape < 1.0) {
      return next_gamma(shape + 1.0) * std::pow(next_unit(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double z = next_normal();
      const double t = 1.0 + c * z;
      if (t <= 0.0) continue;
      const double v = t * t * t;
      const double u = next_unit();
      if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
      if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double next_beta(double a, double b) {
    const double x = next_gamma(a);
    const double y = next_gamma(b);
    return x / (x + y);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace probpool::rng
