// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "risbf/channel.hpp"
#include "risbf/error.hpp"
#include "risbf/flops.hpp"
#include "risbf/matrix.hpp"
#include "risbf/nets.hpp"
#include "risbf/objective.hpp"
#include "risbf/rng.hpp"

namespace risbf {

// Gradient-based meta-learning beamforming (GMLB). Each epoch refines the
// precoder and then the RIS phases with small gradient-as-input networks
// under an accept/revert guard, then updates the networks' own parameters by
// backpropagating the epoch loss L = -R through the accepted steps.

struct GmlbConfig {
  std::size_t epochs = 2000;       // meta iterations
  std::size_t inner_iters = 1;     // refinement steps per variable per epoch
  double lr_w = 1e-3;              // precoder-net learning rate
  double lr_theta = 1.5e-3;        // phase-net learning rate
  double lambda = 1.57079632679489661923;  // regulator amplitude, pi/2
  bool regulated = true;           // false: raw network output as phase step
  bool centered_regulator = false; // non-standard zero-centered variant
  double power = 1000.0;           // transmit power budget P
  std::size_t hidden = 200;        // perceptron hidden width
  std::uint64_t seed = 1;
};

inline void validate(const GmlbConfig& c) {
  if (c.epochs < 1 || c.inner_iters < 1)
    throw ConfigError("gmlb: epochs and inner_iters must be >= 1");
  if (!(c.lr_w > 0.0) || !(c.lr_theta > 0.0))
    throw ConfigError("gmlb: learning rates must be positive");
  if (!(c.lambda > 0.0)) throw ConfigError("gmlb: lambda must be positive");
  if (!(c.power > 0.0)) throw ConfigError("gmlb: power must be positive");
  if (c.hidden < 1) throw ConfigError("gmlb: hidden width must be >= 1");
}

/// Per-epoch record: the accepted sum rate, acceptance counters, and the
/// cumulative compute cost up to and including this epoch.
struct EpochTrace {
  std::size_t epoch = 0;          // 1-based
  double sum_rate = 0.0;          // accepted rate at epoch end
  std::size_t accepted_w = 0;     // accepted precoder steps this epoch
  std::size_t accepted_theta = 0; // accepted phase steps this epoch
  std::uint64_t flops = 0;        // cumulative flop-model cost
  double elapsed_s = 0.0;         // cumulative wall time (non-deterministic)
};

/// Optional plateau stop used by compute-cost experiments: stop when the
/// accepted rate has improved by less than rel_tol * max(1, |R|) over the
/// last `patience` epochs. Rate experiments run the full epoch budget.
struct EarlyStop {
  bool enabled = false;
  double rel_tol = 1e-4;
  std::size_t patience = 50;
};

namespace detail {
// Substream tags for run initialization.
inline constexpr std::uint64_t kPrecoderInitStream = 3;
inline constexpr std::uint64_t kPhaseInitStream = 4;
inline constexpr std::uint64_t kBfNetStream = 5;
inline constexpr std::uint64_t kThetaNetStream = 6;
inline constexpr double kTwoPi = 6.28318530717958647692;
}  // namespace detail

/// Initial state: i.i.d. complex Gaussian precoder rescaled to use the full
/// power budget, phases uniform on [0, 2pi). Deterministic per seed.
inline BeamformingState init_state(const ChannelSet& ch, double power,
                                   std::uint64_t seed) {
  if (!(power > 0.0)) throw ConfigError("init_state: power must be positive");
  BeamformingState s;
  s.power_budget = power;
  s.precoder = CMatrix(ch.params.bs_antennas, ch.params.users);
  Rng wrng = Rng::stream(seed, detail::kPrecoderInitStream);
  for (auto& z : s.precoder.data()) z = wrng.cnormal();
  s.precoder = scaled(s.precoder, std::sqrt(power / frobenius_sq(s.precoder)));
  Rng trng = Rng::stream(seed, detail::kPhaseInitStream);
  s.phases.resize(ch.params.ris_elements);
  for (auto& t : s.phases) t = trng.uniform(0.0, detail::kTwoPi);
  return s;
}

// ---------------------------------------------------------------------------
// Epoch tape: every inner proposal of the epoch (accepted or reverted), kept
// so the meta update can backpropagate the epoch loss. Network inputs are
// recorded values and are treated as constants by the meta gradient
// (first-order scheme).
//
// The accept/revert guard only governs the state carried between epochs and
// the reported trace; the meta gradient differentiates the proposal chain.
// An accepted-only gradient would deadlock: the run is deterministic, so an
// epoch that reverts every proposal would leave both the state and the
// parameters unchanged and every later epoch would repeat it verbatim. When
// every proposal is accepted the two formulations coincide.

struct WStepRecord {
  CMatrix net_input;  // recorded dR/dW fed to the network
  CMatrix delta;      // network output, reassembled
  std::vector<MlpCache> row_caches;
  bool accepted = false;
};

struct ThetaStepRecord {
  RVector net_input;  // recorded dR/dtheta
  RVector delta;      // regulated step
  MlpCache cache;     // cache.output is the pre-regulator output
  bool accepted = false;
};

struct EpochTape {
  BeamformingState start;        // carried state at epoch start
  std::vector<WStepRecord> w_steps;
  std::vector<ThetaStepRecord> theta_steps;
  BeamformingState final_state;  // carried state at epoch end
};

namespace detail {

inline RVector phase_step_from_output(const GmlbConfig& cfg, const RVector& z) {
  if (!cfg.regulated) return z;
  RegulatorConfig reg{cfg.lambda, cfg.centered_regulator};
  return apply_regulator(reg, z);
}

}  // namespace detail

/// Loss the precoder net is trained on: -R at the endpoint of the epoch's
/// precoder proposal chain (recorded inputs held constant), with the phases
/// the proposals were computed under. Used directly by finite-difference
/// checks of the meta gradient.
inline double tape_loss_precoder(const MlpParams& bf, const EpochTape& tape,
                                 const ChannelSet& ch, const NoiseModel& noise,
                                 const GmlbConfig& cfg) {
  CMatrix w = tape.start.precoder;
  for (const auto& step : tape.w_steps) {
    const CMatrix delta = bf_net_apply(bf, step.net_input);
    w = project_power(w + delta, cfg.power);
  }
  return -sum_rate({w, tape.start.phases, cfg.power}, ch, noise);
}

/// Loss the phase net is trained on: -R at the endpoint of the epoch's phase
/// proposal chain, with the precoder the proposals were computed under.
inline double tape_loss_phases(const MlpParams& theta_net, const EpochTape& tape,
                               const ChannelSet& ch, const NoiseModel& noise,
                               const GmlbConfig& cfg) {
  RVector phases = tape.start.phases;
  for (const auto& step : tape.theta_steps) {
    const RVector z = mlp_forward(theta_net, step.net_input);
    const RVector delta = detail::phase_step_from_output(cfg, z);
    for (std::size_t n = 0; n < phases.size(); ++n) phases[n] += delta[n];
  }
  return -sum_rate({tape.final_state.precoder, phases, cfg.power}, ch, noise);
}

/// One meta update: backpropagates the proposal-chain losses above through
/// the epoch's recorded steps (network inputs held constant, power
/// projection differentiated) and applies one SGD step per network. With an
/// empty tape the parameters are returned unchanged.
inline std::pair<MlpParams, MlpParams> meta_update(
    const MlpParams& bf, const MlpParams& theta_net, const EpochTape& tape,
    const ChannelSet& ch, const NoiseModel& noise, const GmlbConfig& cfg,
    std::uint64_t* flops = nullptr) {
  if (tape.w_steps.empty() && tape.theta_steps.empty()) return {bf, theta_net};

  const std::size_t m_ant = ch.params.bs_antennas;
  const std::size_t n_ris = ch.params.ris_elements;
  const std::size_t k_users = ch.params.users;
  std::uint64_t cost = 0;

  MlpParams bf_grads = MlpParams::zeros(bf.dims);
  if (!tape.w_steps.empty()) {
    // Forward replay of the proposal chain (network outputs are recorded;
    // only adds and projections are recomputed).
    std::vector<PowerProjection> projections;
    projections.reserve(tape.w_steps.size());
    CMatrix w = tape.start.precoder;
    for (const auto& step : tape.w_steps) {
      projections.push_back(project_power_info(w + step.delta, cfg.power));
      w = projections.back().projected;
      cost += flopcost::power_projection(m_ant, k_users);
    }
    // dL/dW at the chain endpoint, in real-coordinate packing.
    CMatrix upstream = scaled(
        grad_sum_rate_wrt_precoder({w, tape.start.phases, cfg.power}, ch, noise),
        -1.0);
    cost += flopcost::grad_precoder(k_users, n_ris, m_ant);
    for (std::size_t j = tape.w_steps.size(); j-- > 0;) {
      const PowerProjection& proj = projections[j];
      if (proj.engaged) {
        // Y = c(X) X with c = sqrt(P)/||X||_F: dL/dX = c (U - X <X,U>/tr),
        // where X is the pre-projection matrix of this chain step.
        const CMatrix pre = j == 0 ? tape.start.precoder + tape.w_steps[0].delta
                                   : projections[j - 1].projected +
                                         tape.w_steps[j].delta;
        double ip = 0.0;
        for (std::size_t i = 0; i < upstream.size(); ++i)
          ip += pre.data()[i].real() * upstream.data()[i].real() +
                pre.data()[i].imag() * upstream.data()[i].imag();
        const double f = ip / proj.pre_trace;
        for (std::size_t i = 0; i < upstream.size(); ++i)
          upstream.data()[i] =
              proj.scale * (upstream.data()[i] - f * pre.data()[i]);
        cost += flopcost::power_projection(m_ant, k_users);
      }
      // The sum node W_j = W_{j-1} + DeltaW passes `upstream` unchanged to
      // both the network branch and the earlier chain.
      for (std::size_t row = 0; row < m_ant; ++row)
        mlp_backward(bf, tape.w_steps[j].row_caches[row], pack_row(upstream, row),
                     bf_grads);
      cost += m_ant * flopcost::mlp_backward(bf.dims.in, bf.dims.hidden, bf.dims.out);
    }
  }

  MlpParams theta_grads = MlpParams::zeros(theta_net.dims);
  if (!tape.theta_steps.empty()) {
    RVector phases = tape.start.phases;
    for (const auto& step : tape.theta_steps)
      for (std::size_t n = 0; n < phases.size(); ++n) phases[n] += step.delta[n];
    RVector d_theta = grad_sum_rate_wrt_phases(
        {tape.final_state.precoder, phases, cfg.power}, ch, noise);
    for (auto& v : d_theta) v = -v;  // dL/dtheta at the chain endpoint
    cost += flopcost::grad_phases(k_users, n_ris, m_ant);
    const RegulatorConfig reg{cfg.lambda, cfg.centered_regulator};
    for (const auto& step : tape.theta_steps) {
      // phases_final = phases_start + sum_j delta_j, so every step sees the
      // same upstream d_theta.
      RVector up = d_theta;
      if (cfg.regulated) {
        const RVector dz = regulator_derivative(reg, step.cache.output);
        for (std::size_t n = 0; n < up.size(); ++n) up[n] *= dz[n];
        cost += flopcost::regulator(n_ris);
      }
      mlp_backward(theta_net, step.cache, up, theta_grads);
      cost += flopcost::mlp_backward(theta_net.dims.in, theta_net.dims.hidden,
                                     theta_net.dims.out);
    }
  }

  cost += flopcost::sgd(bf.parameter_count() + theta_net.parameter_count());
  if (flops) *flops += cost;
  return {sgd_step(bf, bf_grads, cfg.lr_w),
          sgd_step(theta_net, theta_grads, cfg.lr_theta)};
}

struct GmlbResult {
  BeamformingState state;
  std::vector<EpochTrace> trace;
  MlpParams bf_params;
  MlpParams theta_params;
};

/// Invoked with the carried state after each epoch; used by tests to check
/// in-run invariants without touching the run itself.
using EpochObserver = std::function<void(const EpochTrace&, const BeamformingState&)>;

/// The full meta-learning run. The per-epoch accepted sum-rate sequence is
/// non-decreasing by construction: a proposal that lowers the running best
/// rate is reverted (ties are kept, so the guard is `R < R0 -> revert`).
inline GmlbResult gmlb_run(const ChannelSet& ch, const NoiseModel& noise,
                           const GmlbConfig& cfg, const EarlyStop& stop = {},
                           const EpochObserver& observer = {}) {
  validate(cfg);
  const std::size_t m_ant = ch.params.bs_antennas;
  const std::size_t n_ris = ch.params.ris_elements;
  const std::size_t k_users = ch.params.users;

  MlpParams bf = init_params({2 * k_users, cfg.hidden, 2 * k_users},
                             Rng::stream(cfg.seed, detail::kBfNetStream).next_u64());
  MlpParams theta_net =
      init_params({n_ris, cfg.hidden, n_ris},
                  Rng::stream(cfg.seed, detail::kThetaNetStream).next_u64());

  BeamformingState state = init_state(ch, cfg.power, cfg.seed);
  double best_rate = sum_rate(state, ch, noise);
  if (!std::isfinite(best_rate))
    throw NumericError("gmlb: non-finite sum rate at initialization");

  std::uint64_t flops = flopcost::sum_rate(k_users, n_ris, m_ant);
  const auto t0 = std::chrono::steady_clock::now();

  GmlbResult result;
  result.trace.reserve(cfg.epochs);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochTape tape;
    tape.start = state;
    std::size_t accepted_w = 0;
    std::size_t accepted_theta = 0;

    for (std::size_t j = 0; j < cfg.inner_iters; ++j) {
      WStepRecord rec;
      rec.net_input = grad_sum_rate_wrt_precoder(state, ch, noise);
      flops += flopcost::grad_precoder(k_users, n_ris, m_ant);
      rec.delta = bf_net_apply(bf, rec.net_input, &rec.row_caches);
      flops += m_ant * flopcost::mlp_forward(bf.dims.in, bf.dims.hidden, bf.dims.out);
      const PowerProjection proj =
          project_power_info(state.precoder + rec.delta, cfg.power);
      flops += flopcost::power_projection(m_ant, k_users);

      BeamformingState candidate = state;
      candidate.precoder = proj.projected;
      const double rate = sum_rate(candidate, ch, noise);
      flops += flopcost::sum_rate(k_users, n_ris, m_ant);
      if (!std::isfinite(rate))
        throw NumericError("gmlb: non-finite sum rate in precoder step, epoch " +
                           std::to_string(epoch));
      if (rate >= best_rate) {  // revert otherwise: keep state and best rate
        best_rate = rate;
        state = std::move(candidate);
        rec.accepted = true;
        ++accepted_w;
      }
      tape.w_steps.push_back(std::move(rec));
    }

    for (std::size_t j = 0; j < cfg.inner_iters; ++j) {
      ThetaStepRecord rec;
      rec.net_input = grad_sum_rate_wrt_phases(state, ch, noise);
      flops += flopcost::grad_phases(k_users, n_ris, m_ant);
      const RVector z = mlp_forward(theta_net, rec.net_input, &rec.cache);
      flops += flopcost::mlp_forward(theta_net.dims.in, theta_net.dims.hidden,
                                     theta_net.dims.out);
      rec.delta = detail::phase_step_from_output(cfg, z);
      if (cfg.regulated) flops += flopcost::regulator(n_ris);

      BeamformingState candidate = state;
      for (std::size_t n = 0; n < n_ris; ++n) candidate.phases[n] += rec.delta[n];
      const double rate = sum_rate(candidate, ch, noise);
      flops += flopcost::sum_rate(k_users, n_ris, m_ant);
      if (!std::isfinite(rate))
        throw NumericError("gmlb: non-finite sum rate in phase step, epoch " +
                           std::to_string(epoch));
      if (rate >= best_rate) {
        best_rate = rate;
        state = std::move(candidate);
        rec.accepted = true;
        ++accepted_theta;
      }
      tape.theta_steps.push_back(std::move(rec));
    }

    tape.final_state = state;
    auto updated = meta_update(bf, theta_net, tape, ch, noise, cfg, &flops);
    bf = std::move(updated.first);
    theta_net = std::move(updated.second);

    EpochTrace tr;
    tr.epoch = epoch;
    tr.sum_rate = best_rate;
    tr.accepted_w = accepted_w;
    tr.accepted_theta = accepted_theta;
    tr.flops = flops;
    tr.elapsed_s = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0).count();
    result.trace.push_back(tr);
    if (observer) observer(tr, state);

    if (stop.enabled && epoch > stop.patience) {
      const double before = result.trace[epoch - 1 - stop.patience].sum_rate;
      if (best_rate - before < stop.rel_tol * std::max(1.0, std::fabs(best_rate)))
        break;
    }
  }

  result.state = std::move(state);
  result.bf_params = std::move(bf);
  result.theta_params = std::move(theta_net);
  return result;
}

}  // namespace risbf
