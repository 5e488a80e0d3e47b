// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "risbf/channel.hpp"
#include "risbf/error.hpp"
#include "risbf/flops.hpp"
#include "risbf/gmlb.hpp"
#include "risbf/matrix.hpp"
#include "risbf/objective.hpp"

namespace risbf {

/// Shared knobs for the reference optimizers.
struct BaselineConfig {
  std::size_t max_outer_iters = 200;  // outer-iteration cap (WMMSE and AO)
  double conv_tol = 1e-4;             // relative sum-rate change to stop
  double theta_step = 1.0;            // initial projected-ascent step; 0 disables
  /// Ascent steps per AO round; 0 = max(64, 8N). The auto budget grows with
  /// the phase count so the baseline's rate saturates at large RIS sizes.
  std::size_t theta_inner_iters = 0;
  std::uint64_t seed = 1;
};

inline void validate(const BaselineConfig& c) {
  if (c.max_outer_iters < 1) throw ConfigError("baseline: max_outer_iters must be >= 1");
  if (!(c.conv_tol > 0.0)) throw ConfigError("baseline: conv_tol must be positive");
  if (c.theta_step < 0.0) throw ConfigError("baseline: theta_step must be >= 0");
}

inline std::size_t ao_theta_budget(const BaselineConfig& c, std::size_t n_ris) {
  return c.theta_inner_iters > 0 ? c.theta_inner_iters
                                 : std::max<std::size_t>(64, 8 * n_ris);
}

namespace detail {

/// In-place lower Cholesky of a Hermitian positive definite matrix.
/// Returns false when a pivot is not strictly positive.
inline bool cholesky_factor(CMatrix& a) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(a(j, k));
    if (!(d > 0.0)) return false;
    const double root = std::sqrt(d);
    a(j, j) = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      cdouble s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * std::conj(a(j, k));
      a(i, j) = s / root;
    }
  }
  return true;
}

/// Solves L L^H x = b given the lower factor.
inline std::vector<cdouble> cholesky_solve(const CMatrix& chol,
                                           const std::vector<cdouble>& b) {
  const std::size_t n = chol.rows();
  std::vector<cdouble> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    cdouble s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= chol(i, k) * y[k];
    y[i] = s / chol(i, i).real();
  }
  std::vector<cdouble> x(n);
  for (std::size_t i = n; i-- > 0;) {
    cdouble s = y[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= std::conj(chol(k, i)) * x[k];
    x[i] = s / chol(i, i).real();
  }
  return x;
}

inline constexpr std::uint64_t kRandomPrecoderStream = 8;
inline constexpr std::uint64_t kBaselinePhaseStream = 4;  // shared with init_state

}  // namespace detail

/// Uniform phases on [0, 2pi) for a given seed; identical to the phase part
/// of init_state so paired comparisons start from the same RIS configuration.
inline RVector initial_phases(std::size_t n_ris, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, detail::kBaselinePhaseStream);
  RVector phases(n_ris);
  for (auto& t : phases) t = rng.uniform(0.0, 6.28318530717958647692);
  return phases;
}

/// Optional per-run diagnostics for the WMMSE iteration.
struct WmmseDiagnostics {
  std::vector<double> sum_rates;      // after each outer iteration
  std::vector<double> mse_objective;  // after each block update (3 per iter)
  std::size_t iterations = 0;
  std::uint64_t flops = 0;
};

/// Weighted-MMSE precoder for fixed RIS phases: alternates scalar receiver
/// gains, MSE weights, and the transmit filters, with the power constraint
/// enforced by bisection on the Lagrange multiplier. Stops when the relative
/// sum-rate change drops below conv_tol or at max_outer_iters.
inline CMatrix wmmse_precoder(const ChannelSet& ch, const RVector& theta,
                              const NoiseModel& noise, double power,
                              const BaselineConfig& cfg,
                              WmmseDiagnostics* diag = nullptr) {
  validate(cfg);
  if (!(power > 0.0)) throw ConfigError("wmmse: power must be positive");
  if (theta.size() != ch.params.ris_elements)
    throw ShapeError("wmmse: phase vector length mismatch");
  const std::size_t m_ant = ch.params.bs_antennas;
  const std::size_t k_users = ch.params.users;
  const double sigma2 = noise.sigma2;
  std::uint64_t flops = 0;

  const CMatrix f = detail::effective_channel(ch, theta);  // K x M rows
  flops += flopcost::effective_channel(k_users, ch.params.ris_elements, m_ant);

  if (frobenius_sq(f) == 0.0) {
    if (diag) diag->flops = flops;
    return CMatrix(m_ant, k_users);  // dead channel: zero precoder is optimal
  }

  // Matched-filter start at full power.
  CMatrix w(m_ant, k_users);
  for (std::size_t k = 0; k < k_users; ++k)
    for (std::size_t m = 0; m < m_ant; ++m) w(m, k) = std::conj(f(k, m));
  w = scaled(w, std::sqrt(power / frobenius_sq(w)));

  BeamformingState probe{w, theta, power};
  double prev_rate = sum_rate(probe, ch, noise);
  flops += flopcost::sum_rate(k_users, ch.params.ris_elements, m_ant);

  std::vector<double> u(k_users), v(k_users), chan_gain(k_users);
  std::vector<cdouble> u_c(k_users);

  // Weighted-MSE surrogate g(u, v, W) = sum_k v_k e_k - ln v_k, recorded for
  // diagnostics after each block update.
  auto surrogate = [&](const CMatrix& cur_w) {
    CMatrix a = matmul(f, cur_w);
    double g = 0.0;
    for (std::size_t k = 0; k < k_users; ++k) {
      double rx = sigma2;
      for (std::size_t j = 0; j < k_users; ++j) rx += std::norm(a(k, j));
      const double e = std::norm(u_c[k]) * rx -
                       2.0 * (std::conj(u_c[k]) * a(k, k)).real() + 1.0;
      g += v[k] * e - std::log(v[k]);
    }
    return g;
  };

  for (std::size_t iter = 0; iter < cfg.max_outer_iters; ++iter) {
    const CMatrix a = matmul(f, w);
    flops += flopcost::cross_gains(k_users, m_ant);

    // Block 1: MMSE receiver gains.
    for (std::size_t k = 0; k < k_users; ++k) {
      double rx = sigma2;
      for (std::size_t j = 0; j < k_users; ++j) rx += std::norm(a(k, j));
      u_c[k] = a(k, k) / rx;
      chan_gain[k] = rx;
    }
    flops += k_users * (8 * k_users + 12);
    if (diag) diag->mse_objective.push_back(surrogate(w));

    // Block 2: MSE weights v_k = 1/e_k with the optimal-receiver MSE.
    for (std::size_t k = 0; k < k_users; ++k) {
      const double e = 1.0 - (std::conj(u_c[k]) * a(k, k)).real();
      v[k] = 1.0 / e;
    }
    flops += k_users * 10;
    if (diag) diag->mse_objective.push_back(surrogate(w));

    // Block 3: transmit filters w_k = v_k u_k (Gram + mu I)^{-1} f_k^H with
    // bisection on mu for the power constraint.
    CMatrix gram(m_ant, m_ant);
    double gram_trace = 0.0;
    for (std::size_t k = 0; k < k_users; ++k) {
      const double c = v[k] * std::norm(u_c[k]);
      for (std::size_t i = 0; i < m_ant; ++i)
        for (std::size_t j = 0; j < m_ant; ++j)
          gram(i, j) += c * std::conj(f(k, i)) * f(k, j);
    }
    for (std::size_t i = 0; i < m_ant; ++i) gram_trace += gram(i, i).real();
    flops += flopcost::gram_build(k_users, m_ant);

    auto solve_power = [&](double mu, CMatrix& out_w) {
      CMatrix reg = gram;
      for (std::size_t i = 0; i < m_ant; ++i) reg(i, i) += mu;
      if (!detail::cholesky_factor(reg)) return -1.0;
      double total = 0.0;
      std::vector<cdouble> rhs(m_ant);
      for (std::size_t k = 0; k < k_users; ++k) {
        const cdouble coef = v[k] * u_c[k];
        for (std::size_t m = 0; m < m_ant; ++m) rhs[m] = coef * std::conj(f(k, m));
        const auto wk = detail::cholesky_solve(reg, rhs);
        for (std::size_t m = 0; m < m_ant; ++m) {
          out_w(m, k) = wk[m];
          total += std::norm(wk[m]);
        }
      }
      flops += flopcost::cholesky(m_ant) + k_users * flopcost::cholesky_solve(m_ant);
      return total;
    };

    CMatrix next_w(m_ant, k_users);
    const double mu_floor = 1e-12 * gram_trace / static_cast<double>(m_ant);
    double used = solve_power(mu_floor, next_w);
    if (used > power) {
      double lo = mu_floor;
      double hi = std::max(gram_trace / static_cast<double>(m_ant), 1e-12);
      CMatrix hi_w(m_ant, k_users);
      std::size_t expand = 0;
      double hi_used = solve_power(hi, hi_w);
      while (hi_used > power) {
        hi *= 2.0;
        hi_used = solve_power(hi, hi_w);
        if (++expand > 200)
          throw NumericError("wmmse: bisection bracket expansion failed (mu=" +
                             std::to_string(hi) + ")");
      }
      next_w = hi_w;
      used = hi_used;
      for (std::size_t it = 0; it < 200 && std::fabs(used - power) > 1e-10 * power;
           ++it) {
        const double mid = 0.5 * (lo + hi);
        CMatrix mid_w(m_ant, k_users);
        const double mid_used = solve_power(mid, mid_w);
        if (mid_used > power) {
          lo = mid;
        } else {
          hi = mid;
          next_w = mid_w;  // keep the last feasible iterate
          used = mid_used;
        }
      }
    }
    w = next_w;
    if (diag) diag->mse_objective.push_back(surrogate(w));

    probe.precoder = w;
    const double rate = sum_rate(probe, ch, noise);
    flops += flopcost::sum_rate(k_users, ch.params.ris_elements, m_ant);
    if (diag) {
      diag->sum_rates.push_back(rate);
      diag->iterations = iter + 1;
    }
    if (std::fabs(rate - prev_rate) <= cfg.conv_tol * std::max(1.0, std::fabs(prev_rate))) {
      prev_rate = rate;
      break;
    }
    prev_rate = rate;
  }

  if (diag) diag->flops = flops;
  return w;
}

struct AoResult {
  BeamformingState state;
  std::size_t rounds = 0;
  std::uint64_t flops = 0;
  std::vector<double> rate_per_round;
};

/// Alternating optimization: WMMSE for the precoder with phases fixed, then
/// projected gradient ascent on the phases (accept-if-improved with a
/// doubling/halving step), repeated until the joint relative improvement per
/// round drops below conv_tol.
inline AoResult ao_optimize(const ChannelSet& ch, const NoiseModel& noise,
                            double power, const BaselineConfig& cfg) {
  validate(cfg);
  const std::size_t n_ris = ch.params.ris_elements;
  AoResult res;
  res.state.power_budget = power;
  res.state.phases = initial_phases(n_ris, cfg.seed);

  double prev_rate = -1.0;
  const double step_floor = cfg.theta_step * 1e-9;
  const double step_ceil = cfg.theta_step * 1e3;
  const std::size_t theta_budget = ao_theta_budget(cfg, n_ris);

  for (std::size_t round = 0; round < cfg.max_outer_iters; ++round) {
    double step = cfg.theta_step;
    WmmseDiagnostics wd;
    // Accept the refreshed precoder only if it does not lose rate: WMMSE is
    // cold-started per round and can land marginally below the incumbent.
    const CMatrix refreshed =
        wmmse_precoder(ch, res.state.phases, noise, power, cfg, &wd);
    res.flops += wd.flops;
    double rate = sum_rate({refreshed, res.state.phases, power}, ch, noise);
    res.flops += flopcost::sum_rate(ch.params.users, n_ris, ch.params.bs_antennas);
    if (round == 0 || rate >= prev_rate) {
      res.state.precoder = refreshed;
    } else {
      rate = prev_rate;
    }

    for (std::size_t it = 0; it < theta_budget && step > 0.0; ++it) {
      const RVector grad = grad_sum_rate_wrt_phases(res.state, ch, noise);
      res.flops += flopcost::grad_phases(ch.params.users, n_ris, ch.params.bs_antennas);
      bool improved = false;
      while (step >= step_floor) {
        BeamformingState cand = res.state;
        for (std::size_t n = 0; n < n_ris; ++n) cand.phases[n] += step * grad[n];
        const double cand_rate = sum_rate(cand, ch, noise);
        res.flops += flopcost::sum_rate(ch.params.users, n_ris, ch.params.bs_antennas);
        if (cand_rate > rate) {
          res.state = std::move(cand);
          rate = cand_rate;
          step = std::min(step * 2.0, step_ceil);
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
    }

    res.rate_per_round.push_back(rate);
    res.rounds = round + 1;
    if (round > 0 &&
        rate - prev_rate <= cfg.conv_tol * std::max(1.0, std::fabs(prev_rate)))
      break;
    prev_rate = rate;
  }
  return res;
}

/// Single random draw: Gaussian precoder rescaled to the full power budget,
/// uniform phases. No optimization.
inline BeamformingState random_beamforming(const ChannelSet& ch, double power,
                                           std::uint64_t seed) {
  if (!(power > 0.0)) throw ConfigError("random_beamforming: power must be positive");
  BeamformingState s;
  s.power_budget = power;
  s.precoder = CMatrix(ch.params.bs_antennas, ch.params.users);
  Rng rng = Rng::stream(seed, detail::kRandomPrecoderStream);
  for (auto& z : s.precoder.data()) z = rng.cnormal();
  s.precoder = scaled(s.precoder, std::sqrt(power / frobenius_sq(s.precoder)));
  s.phases = initial_phases(ch.params.ris_elements, seed);
  return s;
}

}  // namespace risbf
