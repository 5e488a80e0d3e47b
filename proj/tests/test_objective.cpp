// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#include <catch2/catch_amalgamated.hpp>

#include "risbf/channel.hpp"
#include "risbf/finite_diff.hpp"
#include "risbf/gmlb.hpp"
#include "risbf/objective.hpp"

using namespace risbf;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Independent SINR evaluation: explicit quadruple loop over Eq.-style sums,
/// no shared code with the library path.
RVector sinr_oracle(const BeamformingState& s, const ChannelSet& ch,
                    const NoiseModel& noise) {
  const std::size_t k_users = ch.params.users;
  const std::size_t n_ris = ch.params.ris_elements;
  const std::size_t m_ant = ch.params.bs_antennas;
  std::vector<std::vector<cdouble>> gains(k_users,
                                          std::vector<cdouble>(k_users, 0.0));
  for (std::size_t k = 0; k < k_users; ++k)
    for (std::size_t j = 0; j < k_users; ++j)
      for (std::size_t n = 0; n < n_ris; ++n)
        for (std::size_t m = 0; m < m_ant; ++m)
          gains[k][j] += ch.ris_to_users(k, n) * std::polar(1.0, s.phases[n]) *
                         ch.bs_to_ris(n, m) * s.precoder(m, j);
  RVector out(k_users);
  for (std::size_t k = 0; k < k_users; ++k) {
    double interference = noise.sigma2;
    for (std::size_t j = 0; j < k_users; ++j)
      if (j != k) interference += std::norm(gains[k][j]);
    out[k] = std::norm(gains[k][k]) / interference;
  }
  return out;
}

ChannelSet scalar_channel(cdouble g, cdouble h) {
  ChannelSet ch;
  ch.params = RicianParams{1, 1, 1, 10.0, 10.0};
  ch.bs_to_ris = CMatrix(1, 1);
  ch.bs_to_ris(0, 0) = g;
  ch.ris_to_users = CMatrix(1, 1);
  ch.ris_to_users(0, 0) = h;
  return ch;
}

RVector pack_precoder(const CMatrix& w) {
  RVector x(2 * w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    x[i] = w.data()[i].real();
    x[w.size() + i] = w.data()[i].imag();
  }
  return x;
}

}  // namespace

TEST_CASE("single-user SINR has no interference term", "[objective]") {
  const ChannelSet ch = generate_channel(RicianParams{4, 4, 1, 10.0, 10.0}, 5);
  const BeamformingState s = init_state(ch, 100.0, 5);
  const NoiseModel noise{2.0};
  const RVector gamma = sinr_per_user(s, ch, noise);
  REQUIRE(gamma.size() == 1);
  const CMatrix f = detail::effective_channel(ch, s.phases);
  const CMatrix a = matmul(f, s.precoder);
  REQUIRE(gamma[0] == Catch::Approx(std::norm(a(0, 0)) / 2.0).epsilon(1e-12));
}

TEST_CASE("all-ones scalar system has unit SINR", "[objective]") {
  const ChannelSet ch = scalar_channel(1.0, 1.0);
  BeamformingState s;
  s.precoder = CMatrix(1, 1);
  s.precoder(0, 0) = 1.0;
  s.phases = {0.0};
  s.power_budget = 1.0;
  const RVector gamma = sinr_per_user(s, ch, NoiseModel{1.0});
  REQUIRE(gamma[0] == Catch::Approx(1.0).epsilon(1e-14));
  REQUIRE(sum_rate(s, ch, NoiseModel{1.0}) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("SINR matches the independent oracle", "[objective]") {
  const ChannelSet ch = generate_channel(RicianParams{4, 4, 4, 10.0, 10.0}, 21);
  const NoiseModel noise{3.7};
  for (std::uint64_t t = 0; t < 5; ++t) {
    const BeamformingState s = init_state(ch, 500.0, 100 + t);
    const RVector got = sinr_per_user(s, ch, noise);
    const RVector want = sinr_oracle(s, ch, noise);
    for (std::size_t k = 0; k < got.size(); ++k) {
      REQUIRE(got[k] >= 0.0);
      REQUIRE(std::fabs(got[k] - want[k]) / want[k] < 1e-12);
    }
  }
}

TEST_CASE("sum rate composes log2(1 + sinr) and is zero for W = 0",
          "[objective]") {
  const ChannelSet ch = generate_channel(RicianParams{4, 4, 4, 10.0, 10.0}, 22);
  const NoiseModel noise{1.0};
  BeamformingState s = init_state(ch, 1000.0, 22);
  const RVector gamma = sinr_per_user(s, ch, noise);
  double expect = 0.0;
  for (double g : gamma) expect += std::log2(1.0 + g);
  REQUIRE(sum_rate(s, ch, noise) == Catch::Approx(expect).epsilon(1e-14));

  s.precoder = CMatrix(4, 4);  // all zeros
  REQUIRE(sum_rate(s, ch, noise) == 0.0);
}

TEST_CASE("sum rate is invariant to 2pi phase shifts and common column phase",
          "[objective]") {
  const ChannelSet ch = generate_channel(RicianParams{4, 6, 4, 10.0, 10.0}, 23);
  const NoiseModel noise{5.0};
  const BeamformingState s = init_state(ch, 1000.0, 23);
  const double base = sum_rate(s, ch, noise);

  BeamformingState shifted = s;
  shifted.phases[2] += 2.0 * kPi;
  REQUIRE(std::fabs(sum_rate(shifted, ch, noise) - base) < 1e-10);

  BeamformingState rotated = s;
  const cdouble phase = std::polar(1.0, 1.234);
  for (std::size_t m = 0; m < 4; ++m) rotated.precoder(m, 1) *= phase;
  REQUIRE(std::fabs(sum_rate(rotated, ch, noise) - base) < 1e-10);
}

TEST_CASE("power projection scales infeasible precoders exactly", "[objective]") {
  Rng rng(31);
  CMatrix w(3, 2);
  for (auto& z : w.data()) z = rng.cnormal();
  const double p = frobenius_sq(w) / 4.0;  // trace is 4P
  const CMatrix scaled_w = project_power(w, p);
  for (std::size_t i = 0; i < w.size(); ++i)
    REQUIRE(std::abs(scaled_w.data()[i] - 0.5 * w.data()[i]) < 1e-12);

  const CMatrix feasible = project_power(w, 2.0 * frobenius_sq(w));
  REQUIRE(feasible.data() == w.data());

  const double target = 0.37;
  const CMatrix exact = project_power(w, target);
  REQUIRE(std::fabs(frobenius_sq(exact) - target) / target < 1e-12);

  const CMatrix zero(4, 4);
  REQUIRE(project_power(zero, 1.0).data() == zero.data());
}

TEST_CASE("power projection is bitwise idempotent", "[objective]") {
  Rng rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    CMatrix w(4, 4);
    for (auto& z : w.data()) z = rng.cnormal();
    const double p = rng.uniform(0.01, 2.0) * frobenius_sq(w);
    const CMatrix once = project_power(w, p);
    const CMatrix twice = project_power(once, p);
    REQUIRE(twice.data() == once.data());
  }
}

TEST_CASE("noise follows the SNR definition", "[objective]") {
  REQUIRE(noise_from_snr(20.0, 1000.0).sigma2 == Catch::Approx(10.0).epsilon(1e-12));
  REQUIRE(noise_from_snr(0.0, 1.0).sigma2 == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(noise_from_snr(-20.0, 1000.0).sigma2 ==
          Catch::Approx(100000.0).epsilon(1e-12));
  REQUIRE_THROWS_AS(noise_from_snr(0.0, 0.0), ConfigError);
}

TEST_CASE("precoder gradient matches finite differences", "[objective]") {
  const NoiseModel noise = noise_from_snr(20.0, 1000.0);
  for (std::uint64_t scen = 0; scen < 2; ++scen) {
    const ChannelSet ch =
        generate_channel(RicianParams{4, 4, 4, 10.0, 10.0}, 40 + scen);
    for (std::uint64_t t = 0; t < 5; ++t) {
      const BeamformingState s = init_state(ch, 1000.0, 900 + 10 * scen + t);
      const CMatrix analytic = grad_sum_rate_wrt_precoder(s, ch, noise);
      auto rate_of = [&](const RVector& v) {
        BeamformingState probe = s;
        for (std::size_t i = 0; i < probe.precoder.size(); ++i)
          probe.precoder.data()[i] = {v[i], v[probe.precoder.size() + i]};
        return sum_rate(probe, ch, noise);
      };
      const RVector fd = finite_diff_gradient(rate_of, pack_precoder(s.precoder));
      const RVector an = pack_precoder(analytic);
      REQUIRE(l2_dist(fd, an) / l2_norm(an) < 1e-5);
    }
  }
}

TEST_CASE("precoder gradient at W = 0 matches finite differences",
          "[objective]") {
  const ChannelSet ch = generate_channel(RicianParams{3, 4, 2, 10.0, 10.0}, 44);
  const NoiseModel noise{1.0};
  BeamformingState s = init_state(ch, 10.0, 44);
  s.precoder = CMatrix(3, 2);
  const CMatrix analytic = grad_sum_rate_wrt_precoder(s, ch, noise);
  auto rate_of = [&](const RVector& v) {
    BeamformingState probe = s;
    for (std::size_t i = 0; i < probe.precoder.size(); ++i)
      probe.precoder.data()[i] = {v[i], v[probe.precoder.size() + i]};
    return sum_rate(probe, ch, noise);
  };
  const RVector fd = finite_diff_gradient(rate_of, pack_precoder(s.precoder));
  const RVector an = pack_precoder(analytic);
  REQUIRE(l2_dist(fd, an) < 1e-5 * std::max(1.0, l2_norm(an)));
}

TEST_CASE("dead channels produce a zero gradient", "[objective]") {
  ChannelSet ch;
  ch.params = RicianParams{3, 4, 2, 10.0, 10.0};
  ch.bs_to_ris = CMatrix(4, 3);
  ch.ris_to_users = CMatrix(2, 4);
  const BeamformingState s{CMatrix(3, 2), RVector(4, 0.3), 10.0};
  const CMatrix gw = grad_sum_rate_wrt_precoder(s, ch, NoiseModel{1.0});
  for (const auto& z : gw.data()) REQUIRE(std::abs(z) == 0.0);
  const RVector gt = grad_sum_rate_wrt_phases(s, ch, NoiseModel{1.0});
  for (double v : gt) REQUIRE(v == 0.0);
}

TEST_CASE("phase gradient matches finite differences", "[objective]") {
  const NoiseModel noise = noise_from_snr(20.0, 1000.0);
  for (std::uint64_t scen = 0; scen < 2; ++scen) {
    const ChannelSet ch =
        generate_channel(RicianParams{4, 6, 4, 10.0, 10.0}, 50 + scen);
    for (std::uint64_t t = 0; t < 5; ++t) {
      const BeamformingState s = init_state(ch, 1000.0, 700 + 10 * scen + t);
      const RVector analytic = grad_sum_rate_wrt_phases(s, ch, noise);
      auto rate_of = [&](const RVector& v) {
        BeamformingState probe = s;
        probe.phases = v;
        return sum_rate(probe, ch, noise);
      };
      const RVector fd = finite_diff_gradient(rate_of, s.phases);
      REQUIRE(l2_dist(fd, analytic) / l2_norm(analytic) < 1e-5);
    }
  }
}

TEST_CASE("phase gradient is 2pi periodic and flat in the scalar case",
          "[objective]") {
  const ChannelSet ch = generate_channel(RicianParams{4, 6, 4, 10.0, 10.0}, 52);
  const NoiseModel noise{2.0};
  const BeamformingState s = init_state(ch, 1000.0, 52);
  const RVector g = grad_sum_rate_wrt_phases(s, ch, noise);
  BeamformingState shifted = s;
  shifted.phases[3] += 2.0 * kPi;
  const RVector g2 = grad_sum_rate_wrt_phases(shifted, ch, noise);
  for (std::size_t n = 0; n < g.size(); ++n)
    REQUIRE(std::fabs(g[n] - g2[n]) < 1e-10);

  // M = N = K = 1: the single phase only rotates the scalar gain, so the
  // rate is flat in theta everywhere.
  const ChannelSet tiny = scalar_channel({0.8, -0.4}, {1.1, 0.9});
  BeamformingState ts{CMatrix(1, 1), {0.7}, 4.0};
  ts.precoder(0, 0) = {1.4, 0.3};
  const RVector gt = grad_sum_rate_wrt_phases(ts, tiny, NoiseModel{1.0});
  REQUIRE(std::fabs(gt[0]) < 1e-12);
}

TEST_CASE("shape mismatches raise shape errors", "[objective]") {
  const ChannelSet ch = generate_channel(RicianParams{4, 4, 4, 10.0, 10.0}, 60);
  BeamformingState s = init_state(ch, 100.0, 60);
  s.precoder = CMatrix(3, 4);
  REQUIRE_THROWS_AS(sinr_per_user(s, ch, NoiseModel{1.0}), ShapeError);
  s = init_state(ch, 100.0, 60);
  s.phases.pop_back();
  REQUIRE_THROWS_AS(sum_rate(s, ch, NoiseModel{1.0}), ShapeError);
}
