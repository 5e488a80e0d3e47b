// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#pragma once

#include <cmath>
#include <string>

#include "risbf/channel.hpp"
#include "risbf/error.hpp"
#include "risbf/matrix.hpp"

namespace risbf {

/// Receiver noise, linear power units.
struct NoiseModel {
  double sigma2 = 1.0;
};

/// sigma^2 = P / 10^(snr_db / 10).
inline NoiseModel noise_from_snr(double snr_db, double power) {
  if (!(power > 0.0)) throw ConfigError("noise_from_snr: power must be positive");
  return NoiseModel{power / std::pow(10.0, snr_db / 10.0)};
}

/// The joint optimization variable: BS precoder (columns serve users), RIS
/// phase vector in radians, and the total transmit power budget.
struct BeamformingState {
  CMatrix precoder;  // M x K
  RVector phases;    // N
  double power_budget = 1.0;
};

/// Power projection with the applied scale exposed; the scale is needed when
/// differentiating through the projection.
struct PowerProjection {
  CMatrix projected;
  bool engaged = false;   // true when the input exceeded the budget
  double scale = 1.0;     // sqrt(P / pre_trace) when engaged
  double pre_trace = 0.0; // tr(W^H W) of the input
};

inline PowerProjection project_power_info(const CMatrix& w, double power) {
  if (!(power > 0.0)) throw ConfigError("project_power: power must be positive");
  PowerProjection pr;
  pr.pre_trace = frobenius_sq(w);
  // Feasible inputs (with a 1e-12 relative band) pass through untouched,
  // which makes the projection bitwise idempotent.
  if (pr.pre_trace <= power * (1.0 + 1e-12)) {
    pr.projected = w;
    return pr;
  }
  pr.engaged = true;
  pr.scale = std::sqrt(power / pr.pre_trace);
  pr.projected = scaled(w, pr.scale);
  return pr;
}

/// Scale the precoder onto the power constraint tr(W^H W) <= P. Feasible
/// inputs are returned unchanged.
inline CMatrix project_power(const CMatrix& w, double power) {
  return project_power_info(w, power).projected;
}

namespace detail {

inline void check_dims(const BeamformingState& s, const ChannelSet& ch) {
  const auto& p = ch.params;
  if (s.precoder.rows() != p.bs_antennas || s.precoder.cols() != p.users)
    throw ShapeError("precoder is " + shape_str(s.precoder) + ", channel wants " +
                     std::to_string(p.bs_antennas) + "x" + std::to_string(p.users));
  if (s.phases.size() != p.ris_elements)
    throw ShapeError("phase vector has " + std::to_string(s.phases.size()) +
                     " entries, channel wants " + std::to_string(p.ris_elements));
}

/// F = H * diag(e^{j theta}) * G, the K x M effective channel rows.
inline CMatrix effective_channel(const ChannelSet& ch, const RVector& phases) {
  const auto& g = ch.bs_to_ris;
  CMatrix scaled_g = g;
  for (std::size_t n = 0; n < g.rows(); ++n) {
    const cdouble ph = std::polar(1.0, phases[n]);
    for (std::size_t m = 0; m < g.cols(); ++m) scaled_g(n, m) *= ph;
  }
  return matmul(ch.ris_to_users, scaled_g);
}

/// Per-user signal/interference power sums from the cross gains A = F W:
/// total_k = sigma^2 + sum_j |a_kj|^2, interf_k = total_k - |a_kk|^2.
struct PowerSums {
  RVector total;
  RVector interference;
};

inline PowerSums power_sums(const CMatrix& cross, double sigma2) {
  const std::size_t k_users = cross.rows();
  PowerSums ps{RVector(k_users, sigma2), RVector(k_users, sigma2)};
  for (std::size_t k = 0; k < k_users; ++k) {
    for (std::size_t j = 0; j < k_users; ++j) {
      const double p = std::norm(cross(k, j));
      ps.total[k] += p;
      if (j != k) ps.interference[k] += p;
    }
  }
  return ps;
}

inline constexpr double kLn2 = 0.69314718055994530942;

}  // namespace detail

/// SINR per user: gamma_k = |a_kk|^2 / (sigma^2 + sum_{j != k} |a_kj|^2).
inline RVector sinr_per_user(const BeamformingState& s, const ChannelSet& ch,
                             const NoiseModel& noise) {
  detail::check_dims(s, ch);
  const CMatrix f = detail::effective_channel(ch, s.phases);
  const CMatrix cross = matmul(f, s.precoder);
  const auto ps = detail::power_sums(cross, noise.sigma2);
  RVector gamma(ch.params.users);
  for (std::size_t k = 0; k < gamma.size(); ++k)
    gamma[k] = std::norm(cross(k, k)) / ps.interference[k];
  return gamma;
}

/// Sum rate R = sum_k log2(1 + gamma_k) in bits/s/Hz. The training loss used
/// elsewhere is -R.
inline double sum_rate(const BeamformingState& s, const ChannelSet& ch,
                       const NoiseModel& noise) {
  double r = 0.0;
  for (double g : sinr_per_user(s, ch, noise)) r += std::log2(1.0 + g);
  return r;
}

/// Ascent direction of the sum rate with respect to the precoder, in the
/// Wirtinger convention 2 dR/d(conj W): the real and imaginary parts of the
/// returned M x K matrix equal dR/d(Re W) and dR/d(Im W).
///
/// With F = H Θ G, A = F W, S_k = sigma^2 + sum_j |a_kj|^2 and
/// D_k = S_k - |a_kk|^2, the closed form is (2/ln2) F^H (C ∘ A) where
/// C_kj = 1/S_k - [j != k]/D_k.
inline CMatrix grad_sum_rate_wrt_precoder(const BeamformingState& s,
                                          const ChannelSet& ch,
                                          const NoiseModel& noise) {
  detail::check_dims(s, ch);
  const std::size_t k_users = ch.params.users;
  const CMatrix f = detail::effective_channel(ch, s.phases);
  const CMatrix cross = matmul(f, s.precoder);
  const auto ps = detail::power_sums(cross, noise.sigma2);

  CMatrix weighted = cross;  // C ∘ A
  for (std::size_t k = 0; k < k_users; ++k)
    for (std::size_t j = 0; j < k_users; ++j) {
      const double c = 1.0 / ps.total[k] - (j != k ? 1.0 / ps.interference[k] : 0.0);
      weighted(k, j) *= c;
    }
  return scaled(matmul(hermitian(f), weighted), 2.0 / detail::kLn2);
}

/// dR/d(theta) as a real N-vector, differentiating through Θ = diag(e^{j θ}).
///
/// Writing a_kj = sum_n H_kn e^{j theta_n} (G W)_nj, each phase enters one
/// term of each cross gain, giving
///   dR/dtheta_n = -(2/ln2) Im( e^{j theta_n} sum_k H_kn sum_j C_kj conj(a_kj) B_nj )
/// with B = G W and the same C as the precoder gradient.
inline RVector grad_sum_rate_wrt_phases(const BeamformingState& s,
                                        const ChannelSet& ch,
                                        const NoiseModel& noise) {
  detail::check_dims(s, ch);
  const std::size_t k_users = ch.params.users;
  const std::size_t n_ris = ch.params.ris_elements;
  const CMatrix f = detail::effective_channel(ch, s.phases);
  const CMatrix cross = matmul(f, s.precoder);
  const auto ps = detail::power_sums(cross, noise.sigma2);
  const CMatrix b = matmul(ch.bs_to_ris, s.precoder);  // N x K

  CMatrix coef(k_users, k_users);  // C ∘ conj(A)
  for (std::size_t k = 0; k < k_users; ++k)
    for (std::size_t j = 0; j < k_users; ++j) {
      const double c = 1.0 / ps.total[k] - (j != k ? 1.0 / ps.interference[k] : 0.0);
      coef(k, j) = c * std::conj(cross(k, j));
    }

  RVector grad(n_ris);
  const auto& h = ch.ris_to_users;
  for (std::size_t n = 0; n < n_ris; ++n) {
    cdouble acc = 0.0;
    for (std::size_t k = 0; k < k_users; ++k) {
      cdouble inner = 0.0;
      for (std::size_t j = 0; j < k_users; ++j) inner += coef(k, j) * b(n, j);
      acc += h(k, n) * inner;
    }
    grad[n] = -(2.0 / detail::kLn2) * (std::polar(1.0, s.phases[n]) * acc).imag();
  }
  return grad;
}

}  // namespace risbf
