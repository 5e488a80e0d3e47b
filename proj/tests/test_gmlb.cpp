// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#include <catch2/catch_amalgamated.hpp>

#include "risbf/finite_diff.hpp"
#include "risbf/gmlb.hpp"

using namespace risbf;

namespace {

constexpr double kPi = 3.14159265358979323846;

ChannelSet test_channel(std::uint64_t seed = 7,
                        RicianParams p = RicianParams{4, 4, 4, 10.0, 10.0}) {
  return generate_channel(p, seed);
}

RVector flatten(const MlpParams& p) {
  RVector flat;
  flat.insert(flat.end(), p.w1.begin(), p.w1.end());
  flat.insert(flat.end(), p.b1.begin(), p.b1.end());
  flat.insert(flat.end(), p.w2.begin(), p.w2.end());
  flat.insert(flat.end(), p.b2.begin(), p.b2.end());
  return flat;
}

MlpParams unflatten(const RVector& flat, MlpDims dims) {
  MlpParams p = MlpParams::zeros(dims);
  std::size_t at = 0;
  for (auto& v : p.w1) v = flat[at++];
  for (auto& v : p.b1) v = flat[at++];
  for (auto& v : p.w2) v = flat[at++];
  for (auto& v : p.b2) v = flat[at++];
  return p;
}

/// Builds a two-step tape for each network the same way the runner does,
/// without accept/revert (tape semantics cover proposals regardless).
EpochTape record_tape(const MlpParams& bf, const MlpParams& theta_net,
                      const ChannelSet& ch, const NoiseModel& noise,
                      const GmlbConfig& cfg, std::size_t steps) {
  EpochTape tape;
  BeamformingState state = init_state(ch, cfg.power, cfg.seed);
  tape.start = state;
  for (std::size_t j = 0; j < steps; ++j) {
    WStepRecord rec;
    rec.net_input = grad_sum_rate_wrt_precoder(state, ch, noise);
    rec.delta = bf_net_apply(bf, rec.net_input, &rec.row_caches);
    state.precoder = project_power(state.precoder + rec.delta, cfg.power);
    tape.w_steps.push_back(std::move(rec));
  }
  for (std::size_t j = 0; j < steps; ++j) {
    ThetaStepRecord rec;
    rec.net_input = grad_sum_rate_wrt_phases(state, ch, noise);
    const RVector z = mlp_forward(theta_net, rec.net_input, &rec.cache);
    rec.delta = detail::phase_step_from_output(cfg, z);
    for (std::size_t n = 0; n < state.phases.size(); ++n)
      state.phases[n] += rec.delta[n];
    tape.theta_steps.push_back(std::move(rec));
  }
  tape.final_state = state;
  return tape;
}

}  // namespace

TEST_CASE("initial states use the full power budget deterministically",
          "[gmlb]") {
  const ChannelSet ch = test_channel();
  const BeamformingState a = init_state(ch, 1000.0, 5);
  REQUIRE(std::fabs(frobenius_sq(a.precoder) - 1000.0) / 1000.0 < 1e-12);
  const BeamformingState b = init_state(ch, 1000.0, 5);
  REQUIRE(a.precoder.data() == b.precoder.data());
  REQUIRE(a.phases == b.phases);
  const BeamformingState c = init_state(ch, 1000.0, 6);
  REQUIRE(a.precoder.data() != c.precoder.data());
}

TEST_CASE("initial phases are uniform on [0, 2pi)", "[gmlb]") {
  // Chi-squared uniformity test at the 1% level: 20 bins, 1e5 samples,
  // critical value chi2_{0.99, df=19} = 36.191.
  const ChannelSet ch = test_channel();
  constexpr std::size_t kBins = 20;
  std::vector<std::size_t> hist(kBins, 0);
  std::size_t total = 0;
  for (std::uint64_t seed = 0; seed < 25000; ++seed) {
    const BeamformingState s = init_state(ch, 10.0, seed);
    for (double t : s.phases) {
      REQUIRE(t >= 0.0);
      REQUIRE(t < 2.0 * kPi);
      ++hist[static_cast<std::size_t>(t / (2.0 * kPi) * kBins)];
      ++total;
    }
  }
  const double expected = static_cast<double>(total) / kBins;
  double chi2 = 0.0;
  for (std::size_t c : hist) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  REQUIRE(chi2 < 36.191);
}

TEST_CASE("one epoch with zero networks follows the hand trace", "[gmlb]") {
  const ChannelSet ch = test_channel(11);
  const NoiseModel noise = noise_from_snr(20.0, 1000.0);
  GmlbConfig cfg;
  cfg.epochs = 1;
  cfg.inner_iters = 1;
  cfg.hidden = 4;
  cfg.seed = 11;
  cfg.power = 1000.0;

  // Hand trace of the epoch with all-zero networks: the precoder proposal is
  // exactly zero (tie, accepted), the phase proposal is a uniform lambda/2
  // shift, accepted iff the rate does not drop.
  const BeamformingState start = init_state(ch, cfg.power, cfg.seed);
  const double r0 = sum_rate(start, ch, noise);
  BeamformingState expect = start;
  BeamformingState shifted = start;
  for (auto& t : shifted.phases) t += cfg.lambda / 2.0;
  const double r_shift = sum_rate(shifted, ch, noise);
  bool theta_accepted = false;
  if (!(r_shift < r0)) {
    expect = shifted;
    theta_accepted = true;
  }

  // The same epoch through gmlb_run, with networks forced to zero by running
  // one epoch from zero-initialized parameters: init_params never produces
  // zeros, so emulate by running meta-free replay via the tape helpers.
  MlpParams bf = MlpParams::zeros({8, cfg.hidden, 8});
  MlpParams tn = MlpParams::zeros({4, cfg.hidden, 4});
  BeamformingState state = start;
  double best = r0;

  const CMatrix gw = grad_sum_rate_wrt_precoder(state, ch, noise);
  const CMatrix dw = bf_net_apply(bf, gw);
  for (const auto& z : dw.data()) REQUIRE(z == cdouble{0.0, 0.0});
  BeamformingState cand = state;
  cand.precoder = project_power(state.precoder + dw, cfg.power);
  const double rw = sum_rate(cand, ch, noise);
  REQUIRE(rw == r0);  // tie
  if (!(rw < best)) { best = rw; state = cand; }  // ties are accepted

  const RVector gt = grad_sum_rate_wrt_phases(state, ch, noise);
  const RVector delta =
      detail::phase_step_from_output(cfg, mlp_forward(tn, gt));
  for (double d : delta) REQUIRE(d == Catch::Approx(cfg.lambda / 2.0));
  BeamformingState cand2 = state;
  for (std::size_t n = 0; n < 4; ++n) cand2.phases[n] += delta[n];
  const double rt = sum_rate(cand2, ch, noise);
  if (!(rt < best)) { best = rt; state = cand2; }

  REQUIRE((best >= r0));
  REQUIRE(state.phases == expect.phases);
  REQUIRE((theta_accepted ? rt >= r0 : rt < r0));
}

TEST_CASE("accepted sum-rate sequence is non-decreasing", "[gmlb]") {
  const NoiseModel noise = noise_from_snr(20.0, 1000.0);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const ChannelSet ch = test_channel(seed);
    GmlbConfig cfg;
    cfg.epochs = 300;
    cfg.seed = seed;
    cfg.power = 1000.0;
    const GmlbResult res = gmlb_run(ch, noise, cfg);
    REQUIRE(res.trace.size() == 300);
    for (std::size_t e = 1; e < res.trace.size(); ++e)
      REQUIRE(res.trace[e].sum_rate >= res.trace[e - 1].sum_rate);
    REQUIRE(res.trace.front().sum_rate >= 0.0);
  }
}

TEST_CASE("unregulated runs keep monotonicity and feasibility", "[gmlb]") {
  const NoiseModel noise = noise_from_snr(20.0, 1000.0);
  const ChannelSet ch = test_channel(4);
  GmlbConfig cfg;
  cfg.epochs = 300;
  cfg.seed = 4;
  cfg.power = 1000.0;
  cfg.regulated = false;
  const GmlbResult res = gmlb_run(
      ch, noise, cfg, {},
      [&](const EpochTrace&, const BeamformingState& s) {
        REQUIRE(frobenius_sq(s.precoder) <= 1000.0 * (1.0 + 1e-9));
      });
  for (std::size_t e = 1; e < res.trace.size(); ++e)
    REQUIRE(res.trace[e].sum_rate >= res.trace[e - 1].sum_rate);
}

TEST_CASE("per-epoch states respect power and unit-modulus constraints",
          "[gmlb]") {
  const NoiseModel noise = noise_from_snr(20.0, 1000.0);
  const ChannelSet ch = test_channel(5);
  GmlbConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 5;
  cfg.power = 1000.0;
  std::size_t checked = 0;
  gmlb_run(ch, noise, cfg, {},
           [&](const EpochTrace&, const BeamformingState& s) {
             REQUIRE(frobenius_sq(s.precoder) <= cfg.power * (1.0 + 1e-9));
             const CMatrix d = diag_from_phases(s.phases);
             for (std::size_t n = 0; n < s.phases.size(); ++n)
               REQUIRE(std::fabs(std::abs(d(n, n)) - 1.0) < 1e-12);
             ++checked;
           });
  REQUIRE(checked == 200);
}

TEST_CASE("identical inputs give bitwise identical runs", "[gmlb]") {
  const NoiseModel noise = noise_from_snr(10.0, 1000.0);
  const ChannelSet ch = test_channel(6);
  GmlbConfig cfg;
  cfg.epochs = 150;
  cfg.seed = 6;
  cfg.power = 1000.0;
  const GmlbResult a = gmlb_run(ch, noise, cfg);
  const GmlbResult b = gmlb_run(ch, noise, cfg);
  REQUIRE(a.state.precoder.data() == b.state.precoder.data());
  REQUIRE(a.state.phases == b.state.phases);
  for (std::size_t e = 0; e < a.trace.size(); ++e) {
    REQUIRE(a.trace[e].sum_rate == b.trace[e].sum_rate);
    REQUIRE(a.trace[e].accepted_w == b.trace[e].accepted_w);
    REQUIRE(a.trace[e].accepted_theta == b.trace[e].accepted_theta);
    REQUIRE(a.trace[e].flops == b.trace[e].flops);
  }
  REQUIRE(flatten(a.bf_params) == flatten(b.bf_params));
}

TEST_CASE("meta update is a no-op on an empty tape", "[gmlb]") {
  const ChannelSet ch = test_channel(8);
  const NoiseModel noise{1.0};
  GmlbConfig cfg;
  cfg.hidden = 8;
  const MlpParams bf = init_params({8, 8, 8}, 1);
  const MlpParams tn = init_params({4, 8, 4}, 2);
  EpochTape tape;
  tape.start = init_state(ch, cfg.power, 3);
  tape.final_state = tape.start;
  const auto [bf2, tn2] = meta_update(bf, tn, tape, ch, noise, cfg);
  REQUIRE(flatten(bf2) == flatten(bf));
  REQUIRE(flatten(tn2) == flatten(tn));
}

TEST_CASE("meta gradients match finite differences of the tape losses",
          "[gmlb]") {
  const ChannelSet ch = test_channel(9);
  const NoiseModel noise = noise_from_snr(20.0, 1000.0);
  GmlbConfig cfg;
  cfg.hidden = 12;
  cfg.power = 1000.0;
  cfg.seed = 9;
  cfg.lr_w = 1.0;  // unit rates turn the SGD step into the raw gradient
  cfg.lr_theta = 1.0;
  const MlpParams bf = init_params({8, cfg.hidden, 8}, 21);
  const MlpParams tn = init_params({4, cfg.hidden, 4}, 22);
  const EpochTape tape = record_tape(bf, tn, ch, noise, cfg, 2);
  REQUIRE(tape.w_steps.size() == 2);
  REQUIRE(tape.theta_steps.size() == 2);

  const auto [bf2, tn2] = meta_update(bf, tn, tape, ch, noise, cfg);
  RVector bf_grad = flatten(bf);
  const RVector bf_new = flatten(bf2);
  for (std::size_t i = 0; i < bf_grad.size(); ++i) bf_grad[i] -= bf_new[i];
  RVector tn_grad = flatten(tn);
  const RVector tn_new = flatten(tn2);
  for (std::size_t i = 0; i < tn_grad.size(); ++i) tn_grad[i] -= tn_new[i];

  auto bf_loss = [&](const RVector& flat) {
    return tape_loss_precoder(unflatten(flat, bf.dims), tape, ch, noise, cfg);
  };
  const RVector bf_fd = finite_diff_gradient(bf_loss, flatten(bf), 1e-6);
  REQUIRE(l2_dist(bf_fd, bf_grad) / l2_norm(bf_fd) < 1e-4);

  auto tn_loss = [&](const RVector& flat) {
    return tape_loss_phases(unflatten(flat, tn.dims), tape, ch, noise, cfg);
  };
  const RVector tn_fd = finite_diff_gradient(tn_loss, flatten(tn), 1e-6);
  REQUIRE(l2_dist(tn_fd, tn_grad) / l2_norm(tn_fd) < 1e-4);
}

TEST_CASE("zero learning rates would keep parameters fixed", "[gmlb]") {
  // lr = 0 is rejected by config validation; the equivalent contract is that
  // the SGD step with zero gradients leaves parameters unchanged, covered in
  // the nets suite, and that meta_update scales updates by the rates.
  const ChannelSet ch = test_channel(10);
  const NoiseModel noise = noise_from_snr(20.0, 1000.0);
  GmlbConfig cfg;
  cfg.hidden = 8;
  cfg.power = 1000.0;
  cfg.seed = 10;
  const MlpParams bf = init_params({8, cfg.hidden, 8}, 31);
  const MlpParams tn = init_params({4, cfg.hidden, 4}, 32);
  const EpochTape tape = record_tape(bf, tn, ch, noise, cfg, 1);

  cfg.lr_w = 1e-3;
  cfg.lr_theta = 1e-3;
  const auto [bf_a, tn_a] = meta_update(bf, tn, tape, ch, noise, cfg);
  cfg.lr_w = 2e-3;
  cfg.lr_theta = 2e-3;
  const auto [bf_b, tn_b] = meta_update(bf, tn, tape, ch, noise, cfg);
  const RVector base = flatten(bf);
  const RVector da = flatten(bf_a);
  const RVector db = flatten(bf_b);
  for (std::size_t i = 0; i < base.size(); ++i)
    REQUIRE(db[i] - base[i] == Catch::Approx(2.0 * (da[i] - base[i])).margin(1e-15));
}

TEST_CASE("runs abort on non-finite inputs with a diagnostic", "[gmlb]") {
  ChannelSet ch = test_channel(12);
  ch.bs_to_ris(0, 0) = {std::numeric_limits<double>::infinity(), 0.0};
  GmlbConfig cfg;
  cfg.epochs = 3;
  REQUIRE_THROWS_AS(gmlb_run(ch, noise_from_snr(20.0, 1000.0), cfg), NumericError);
}

TEST_CASE("plateau stop shortens runs without breaking monotonicity", "[gmlb]") {
  const ChannelSet ch = test_channel(13);
  const NoiseModel noise = noise_from_snr(20.0, 1000.0);
  GmlbConfig cfg;
  cfg.epochs = 2000;
  cfg.seed = 13;
  cfg.power = 1000.0;
  EarlyStop stop{true, 1e-2, 30};  // coarse tolerance stops early
  const GmlbResult res = gmlb_run(ch, noise, cfg, stop);
  REQUIRE(res.trace.size() < 2000);
  for (std::size_t e = 1; e < res.trace.size(); ++e)
    REQUIRE(res.trace[e].sum_rate >= res.trace[e - 1].sum_rate);
}
