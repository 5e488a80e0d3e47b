// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

// Command-line front end: SNR sweeps, epoch traces, RIS-size sweeps,
// compute-cost tables, analytic-gradient checks, and channel dumps. Every
// command writes its resolved configuration next to its outputs; primary CSV
// outputs are byte-identical for identical (config, seed).

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "risbf/channel_io.hpp"
#include "risbf/finite_diff.hpp"
#include "risbf/harness.hpp"

namespace {

using namespace risbf;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string algorithms;
  std::uint64_t seed = 0;
  std::size_t scenarios = 0;
  std::size_t threads = 0;
  bool seed_set = false, scenarios_set = false, threads_set = false,
       out_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value configuration file");
  cmd->add_option("--out", args.out_dir, "output directory")
      ->each([&](const std::string&) { args.out_set = true; });
  cmd->add_option("--seed", args.seed, "master seed")
      ->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--scenarios", args.scenarios, "scenario count per cell")
      ->each([&](const std::string&) { args.scenarios_set = true; });
  cmd->add_option("--algorithms", args.algorithms,
                  "comma-separated optimizer list (gmlb, gmlb-unregulated, "
                  "wmmse, ao, random)");
  cmd->add_option("--threads", args.threads, "worker threads (0 = auto)")
      ->each([&](const std::string&) { args.threads_set = true; });
}

RunConfig resolve(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = load_config(args.config_path);
  if (args.seed_set) cfg.seed = args.seed;
  if (args.scenarios_set) cfg.scenario_count = args.scenarios;
  if (args.threads_set) cfg.threads = args.threads;
  if (args.out_set) cfg.output_dir = args.out_dir;
  if (!args.algorithms.empty()) apply_config_entry(cfg, "algorithms", args.algorithms);
  validate(cfg);
  return cfg;
}

int run_gradient_check(const RunConfig& cfg, std::size_t states_per_scenario) {
  constexpr double kTol = 1e-5;
  constexpr double kStep = 1e-6;
  const NoiseModel noise = noise_from_snr(cfg.snr_db, cfg.power);
  std::filesystem::create_directories(cfg.output_dir);
  std::ostringstream csv;
  csv << "scenario_seed,state,block,rel_err,tolerance,pass\n";
  bool all_pass = true;
  double worst = 0.0;

  for (std::size_t s = 0; s < cfg.scenario_count; ++s) {
    const ChannelSet ch = generate_channel(rician_of(cfg, cfg.ris_elements),
                                           cfg.seed + s);
    for (std::size_t t = 0; t < states_per_scenario; ++t) {
      const BeamformingState state =
          init_state(ch, cfg.power, cfg.seed + 1000 * (s + 1) + t);
      const std::size_t m = state.precoder.rows(), k = state.precoder.cols();

      // Precoder block: flatten W into 2MK reals (re then im, row-major).
      RVector x(2 * m * k);
      for (std::size_t i = 0; i < m * k; ++i) {
        x[i] = state.precoder.data()[i].real();
        x[m * k + i] = state.precoder.data()[i].imag();
      }
      auto rate_of_w = [&](const RVector& v) {
        BeamformingState probe = state;
        for (std::size_t i = 0; i < m * k; ++i)
          probe.precoder.data()[i] = {v[i], v[m * k + i]};
        return sum_rate(probe, ch, noise);
      };
      const RVector fd_w = finite_diff_gradient(rate_of_w, x, kStep);
      const CMatrix an = grad_sum_rate_wrt_precoder(state, ch, noise);
      RVector an_w(2 * m * k);
      for (std::size_t i = 0; i < m * k; ++i) {
        an_w[i] = an.data()[i].real();
        an_w[m * k + i] = an.data()[i].imag();
      }
      const double err_w = l2_dist(fd_w, an_w) / l2_norm(an_w);

      auto rate_of_theta = [&](const RVector& v) {
        BeamformingState probe = state;
        probe.phases = v;
        return sum_rate(probe, ch, noise);
      };
      const RVector fd_t = finite_diff_gradient(rate_of_theta, state.phases, kStep);
      const RVector an_t = grad_sum_rate_wrt_phases(state, ch, noise);
      const double err_t = l2_dist(fd_t, an_t) / l2_norm(an_t);

      worst = std::max(worst, std::max(err_w, err_t));
      all_pass = all_pass && err_w <= kTol && err_t <= kTol;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3e", err_w);
      csv << ch.seed << "," << t << ",precoder," << buf << ",1e-05,"
          << (err_w <= kTol ? "1" : "0") << "\n";
      std::snprintf(buf, sizeof(buf), "%.3e", err_t);
      csv << ch.seed << "," << t << ",phases," << buf << ",1e-05,"
          << (err_t <= kTol ? "1" : "0") << "\n";
    }
  }
  std::ofstream out(cfg.output_dir + "/gradient_check.csv", std::ios::binary);
  out << csv.str();
  write_run_sidecar(cfg, cfg.output_dir);
  std::printf("gradient-check: %s (worst relative error %.3e, tolerance 1e-05)\n",
              all_pass ? "PASS" : "FAIL", worst);
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"risbf: RIS-aided MU-MISO beamforming benchmark toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  std::size_t grad_states = 20;

  CLI::App* snr = app.add_subcommand("snr-sweep", "sum rate vs SNR");
  CLI::App* trace = app.add_subcommand("epoch-trace", "per-epoch training traces");
  CLI::App* ris = app.add_subcommand("ris-sweep", "sum rate vs RIS size");
  CLI::App* cost = app.add_subcommand("cost-compare", "flop/wall-time cost table");
  CLI::App* grad = app.add_subcommand("gradient-check",
                                      "analytic vs finite-difference gradients");
  CLI::App* dump = app.add_subcommand("dump-channels", "write channel realizations");
  for (CLI::App* cmd : {snr, trace, ris, cost, grad, dump}) add_common(cmd, args);
  grad->add_option("--states", grad_states, "random states per scenario");

  try {
    app.parse(argc, argv);
    const RunConfig cfg = resolve(args);

    if (snr->parsed()) {
      const auto results = run_snr_sweep(cfg);
      emit_snr_sweep(results, cfg.output_dir);
      write_run_sidecar(cfg, cfg.output_dir);
      std::printf("snr-sweep: %zu cells -> %s/snr_sweep.csv\n", results.size(),
                  cfg.output_dir.c_str());
    } else if (trace->parsed()) {
      const auto results = run_epoch_trace(cfg);
      emit_epoch_traces(results, cfg.output_dir);
      write_run_sidecar(cfg, cfg.output_dir);
      for (const auto& tr : results)
        std::printf("epoch-trace: n=%zu crossing_epoch=%ld wmmse_mean=%.4f "
                    "final=%.4f\n",
                    tr.n_ris, tr.crossing_epoch, tr.wmmse_mean,
                    tr.mean_rate_per_epoch.back());
    } else if (ris->parsed()) {
      const auto results = run_ris_sweep(cfg);
      emit_ris_sweep(results, cfg.output_dir);
      write_run_sidecar(cfg, cfg.output_dir);
      std::printf("ris-sweep: %zu cells -> %s/ris_sweep.csv\n", results.size(),
                  cfg.output_dir.c_str());
    } else if (cost->parsed()) {
      const auto cells = run_cost_comparison(cfg);
      emit_cost_table(cells, cfg.output_dir, cfg.cost_mode);
      write_run_sidecar(cfg, cfg.output_dir);
      std::printf("cost-compare: %zu cells -> %s/cost_compare.csv\n", cells.size(),
                  cfg.output_dir.c_str());
    } else if (grad->parsed()) {
      return run_gradient_check(cfg, grad_states);
    } else if (dump->parsed()) {
      std::filesystem::create_directories(cfg.output_dir);
      const auto channels = generate_scenario_batch(
          rician_of(cfg, cfg.ris_elements), cfg.scenario_count, cfg.seed);
      for (const auto& ch : channels)
        save_channel(ch, cfg.output_dir + "/channel_" + std::to_string(ch.seed) +
                             ".txt");
      write_run_sidecar(cfg, cfg.output_dir);
      std::printf("dump-channels: %zu files -> %s\n", channels.size(),
                  cfg.output_dir.c_str());
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"type", "config"}}.dump()
              << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"type", "io"}}.dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"type", "runtime"}}.dump()
              << "\n";
    return 1;
  }
}
