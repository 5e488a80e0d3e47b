// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risbf/error.hpp"
#include "risbf/matrix.hpp"
#include "risbf/rng.hpp"

namespace risbf {

/// Rician fading parameters for the two hops of the cascaded link.
/// kappa_user applies to every RIS->user row, kappa_bsris to the BS->RIS
/// matrix. All users share one Rician factor.
struct RicianParams {
  std::size_t bs_antennas = 4;   // M
  std::size_t ris_elements = 4;  // N
  std::size_t users = 4;         // K
  double kappa_user = 10.0;
  double kappa_bsris = 10.0;
};

inline void validate(const RicianParams& p) {
  if (p.bs_antennas < 1 || p.ris_elements < 1 || p.users < 1)
    throw ConfigError("channel: all dimensions must be >= 1");
  if (p.kappa_user < 0.0 || p.kappa_bsris < 0.0)
    throw ConfigError("channel: Rician factors must be >= 0");
}

/// Line-of-sight components, built from uniform-linear-array steering
/// vectors; every entry has unit modulus.
struct RicianLos {
  CMatrix bs_to_ris;    // N x M
  CMatrix ris_to_users; // K x N
};

/// One scenario's channel realization.
struct ChannelSet {
  CMatrix bs_to_ris;    // G: N x M
  CMatrix ris_to_users; // H: K x N
  RicianParams params;
  std::uint64_t seed = 0;
};

namespace detail {

// Substream tags for channel generation.
inline constexpr std::uint64_t kAngleStream = 1;
inline constexpr std::uint64_t kFadingStream = 2;

/// Half-wavelength ULA steering vector: a_n = exp(i pi n sin(angle)).
inline std::vector<cdouble> steering(std::size_t len, double angle) {
  std::vector<cdouble> a(len);
  const double s = std::sin(angle);
  for (std::size_t n = 0; n < len; ++n)
    a[n] = std::polar(1.0, 3.14159265358979323846 * static_cast<double>(n) * s);
  return a;
}

}  // namespace detail

/// Line-of-sight matrices for a scenario. Angles of departure/arrival (one
/// pair for the BS->RIS hop, one arrival angle per user) are drawn uniformly
/// from [-pi/2, pi/2) on the angle substream of `angle_seed`.
///
/// The underlying array geometry (half-wavelength ULAs at BS and RIS) is a
/// repository convention; it yields unit-modulus entries and deterministic
/// per-seed scenarios.
inline RicianLos los_components(const RicianParams& p, std::uint64_t angle_seed) {
  validate(p);
  Rng rng = Rng::stream(angle_seed, detail::kAngleStream);
  constexpr double kHalfPi = 1.57079632679489661923;
  const double depart = rng.uniform(-kHalfPi, kHalfPi);
  const double arrive = rng.uniform(-kHalfPi, kHalfPi);

  const auto a_bs = detail::steering(p.bs_antennas, depart);
  const auto a_ris = detail::steering(p.ris_elements, arrive);

  RicianLos los;
  los.bs_to_ris = CMatrix(p.ris_elements, p.bs_antennas);
  for (std::size_t n = 0; n < p.ris_elements; ++n)
    for (std::size_t m = 0; m < p.bs_antennas; ++m)
      los.bs_to_ris(n, m) = a_ris[n] * std::conj(a_bs[m]);

  los.ris_to_users = CMatrix(p.users, p.ris_elements);
  for (std::size_t k = 0; k < p.users; ++k) {
    const double user_angle = rng.uniform(-kHalfPi, kHalfPi);
    const auto a_user = detail::steering(p.ris_elements, user_angle);
    for (std::size_t n = 0; n < p.ris_elements; ++n)
      los.ris_to_users(k, n) = std::conj(a_user[n]);
  }
  return los;
}

/// Rician realization with separate seeds for the line-of-sight geometry and
/// the scattered component. Scattered entries are i.i.d. circularly-symmetric
/// complex Gaussian with unit variance, drawn row-major for G then H.
inline ChannelSet generate_channel_split(const RicianParams& p,
                                         std::uint64_t angle_seed,
                                         std::uint64_t fading_seed) {
  const RicianLos los = los_components(p, angle_seed);
  Rng rng = Rng::stream(fading_seed, detail::kFadingStream);

  const double wg_los = std::sqrt(p.kappa_bsris / (1.0 + p.kappa_bsris));
  const double wg_nlos = std::sqrt(1.0 / (1.0 + p.kappa_bsris));
  const double wh_los = std::sqrt(p.kappa_user / (1.0 + p.kappa_user));
  const double wh_nlos = std::sqrt(1.0 / (1.0 + p.kappa_user));

  ChannelSet ch;
  ch.params = p;
  ch.seed = fading_seed;
  ch.bs_to_ris = CMatrix(p.ris_elements, p.bs_antennas);
  for (std::size_t i = 0; i < ch.bs_to_ris.size(); ++i)
    ch.bs_to_ris.data()[i] =
        wg_los * los.bs_to_ris.data()[i] + wg_nlos * rng.cnormal();
  ch.ris_to_users = CMatrix(p.users, p.ris_elements);
  for (std::size_t i = 0; i < ch.ris_to_users.size(); ++i)
    ch.ris_to_users.data()[i] =
        wh_los * los.ris_to_users.data()[i] + wh_nlos * rng.cnormal();
  return ch;
}

/// Seeded Rician realization; a pure function of (params, seed).
inline ChannelSet generate_channel(const RicianParams& p, std::uint64_t seed) {
  return generate_channel_split(p, seed, seed);
}

/// `count` scenarios seeded base_seed, base_seed+1, ...
inline std::vector<ChannelSet> generate_scenario_batch(const RicianParams& p,
                                                       std::size_t count,
                                                       std::uint64_t base_seed) {
  if (count < 1) throw ConfigError("generate_scenario_batch: count must be >= 1");
  std::vector<ChannelSet> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(generate_channel(p, base_seed + i));
  return out;
}

}  // namespace risbf
