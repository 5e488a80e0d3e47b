// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace risbf {

/// Identifier of the RNG scheme, recorded in run metadata so traces can be
/// reproduced across platforms. Standard-library distributions are not used
/// anywhere: their output is implementation-defined.
inline constexpr const char* kRngAlgorithm = "splitmix64/box-muller";

/// Deterministic 64-bit stream generator (splitmix64, Steele/Lea/Flood).
///
/// Substreams are derived as state = mix(mix(seed) + tag), so independent
/// draws (channel angles, fading, network init, ...) never share a sequence
/// even when they share a user-facing seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Substream `tag` of `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t tag) {
    return Rng(mix(mix(seed) + tag));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (cosine branch).
  double normal() {
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Circularly-symmetric complex normal with unit total variance:
  /// real and imaginary parts are independent N(0, 1/2).
  std::complex<double> cnormal() {
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    const double r = std::sqrt(-std::log(u1));  // sqrt(-2 ln u) / sqrt(2)
    return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  /// Uniform on (0, 1); never returns 0 so log() is safe.
  double uniform01_open() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace risbf
