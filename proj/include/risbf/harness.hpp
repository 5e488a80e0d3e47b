// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "risbf/baselines.hpp"
#include "risbf/config.hpp"
#include "risbf/error.hpp"
#include "risbf/gmlb.hpp"
#include "risbf/parallel.hpp"

namespace risbf {

// Experiment orchestration. Conventions shared by every command:
//   - Paired seeds: within one sweep cell, every algorithm runs on the same
//     seeded channel realizations (scenario i uses channel seed
//     cfg.seed + i), and per-run RNG is derived from the channel seed.
//   - Primary CSV outputs contain only deterministic quantities, so a rerun
//     with the same config and seed is byte-identical. Wall-clock numbers go
//     to *_timing.csv sidecars, which are excluded from that contract.
//   - Doubles are printed with %.17g and parse back to the exact same value.

struct ScenarioOutcome {
  double rate = 0.0;
  std::uint64_t flops = 0;
  double elapsed_s = 0.0;
};

/// Plateau window (epochs) for GMLB in cost_mode=converged; the relative
/// tolerance reuses baseline.conv_tol so both sides of a cost comparison
/// stop on the same marginal-gain rule.
inline constexpr std::size_t kGmlbCostPatience = 50;

/// Runs one algorithm on one scenario. `cost_stop` enables the plateau rule
/// used by compute-cost experiments; rate experiments run full budgets.
inline ScenarioOutcome run_algorithm(const std::string& name,
                                     const ChannelSet& ch,
                                     const NoiseModel& noise,
                                     const RunConfig& cfg,
                                     bool cost_stop = false) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioOutcome out;
  if (name == "gmlb" || name == "gmlb-unregulated") {
    GmlbConfig g = cfg.gmlb;
    g.power = cfg.power;
    g.regulated = (name == "gmlb");
    g.seed = ch.seed;
    EarlyStop stop;
    if (cost_stop) {
      stop.enabled = true;
      stop.rel_tol = cfg.baseline.conv_tol;
      stop.patience = kGmlbCostPatience;
    }
    const GmlbResult res = gmlb_run(ch, noise, g, stop);
    out.rate = res.trace.back().sum_rate;
    out.flops = res.trace.back().flops;
  } else if (name == "wmmse") {
    BaselineConfig b = cfg.baseline;
    b.seed = ch.seed;
    WmmseDiagnostics diag;
    const RVector theta = initial_phases(ch.params.ris_elements, ch.seed);
    const CMatrix w = wmmse_precoder(ch, theta, noise, cfg.power, b, &diag);
    out.rate = sum_rate({w, theta, cfg.power}, ch, noise);
    out.flops = diag.flops + flopcost::sum_rate(ch.params.users,
                                                ch.params.ris_elements,
                                                ch.params.bs_antennas);
  } else if (name == "ao") {
    BaselineConfig b = cfg.baseline;
    b.seed = ch.seed;
    const AoResult res = ao_optimize(ch, noise, cfg.power, b);
    out.rate = res.rate_per_round.back();
    out.flops = res.flops;
  } else if (name == "random") {
    const BeamformingState s = random_beamforming(ch, cfg.power, ch.seed);
    out.rate = sum_rate(s, ch, noise);
    out.flops = flopcost::sum_rate(ch.params.users, ch.params.ris_elements,
                                   ch.params.bs_antennas);
  } else {
    throw ConfigError("unknown algorithm '" + name + "'");
  }
  out.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

struct SweepResult {
  double axis = 0.0;  // SNR in dB or RIS size, depending on the sweep
  std::string algorithm;
  std::size_t n_scenarios = 0;
  double mean_rate = 0.0;
  double std_rate = 0.0;  // sample standard deviation (n-1)
  double min_rate = 0.0;
  double max_rate = 0.0;
  double mean_flops = 0.0;
  double mean_elapsed_s = 0.0;
  std::vector<std::uint64_t> scenario_seeds;
};

namespace detail {

inline SweepResult aggregate(double axis, const std::string& alg,
                             const std::vector<ScenarioOutcome>& outcomes,
                             const std::vector<ChannelSet>& channels) {
  SweepResult r;
  r.axis = axis;
  r.algorithm = alg;
  r.n_scenarios = outcomes.size();
  r.min_rate = outcomes[0].rate;
  r.max_rate = outcomes[0].rate;
  double sum = 0.0, sum_flops = 0.0, sum_elapsed = 0.0;
  for (const auto& o : outcomes) {
    sum += o.rate;
    sum_flops += static_cast<double>(o.flops);
    sum_elapsed += o.elapsed_s;
    r.min_rate = std::min(r.min_rate, o.rate);
    r.max_rate = std::max(r.max_rate, o.rate);
  }
  const double n = static_cast<double>(outcomes.size());
  r.mean_rate = sum / n;
  r.mean_flops = sum_flops / n;
  r.mean_elapsed_s = sum_elapsed / n;
  double ss = 0.0;
  for (const auto& o : outcomes) {
    const double d = o.rate - r.mean_rate;
    ss += d * d;
  }
  r.std_rate = outcomes.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  for (const auto& ch : channels) r.scenario_seeds.push_back(ch.seed);
  return r;
}

inline std::vector<ScenarioOutcome> run_paired(const std::string& alg,
                                               const std::vector<ChannelSet>& channels,
                                               const NoiseModel& noise,
                                               const RunConfig& cfg,
                                               bool cost_stop = false) {
  std::vector<ScenarioOutcome> outcomes(channels.size());
  parallel_for(channels.size(), cfg.threads, [&](std::size_t i) {
    outcomes[i] = run_algorithm(alg, channels[i], noise, cfg, cost_stop);
  });
  return outcomes;
}

}  // namespace detail

/// Sum-rate vs SNR for every configured algorithm; all algorithms and all
/// SNR points share the same `scenario_count` channel realizations.
inline std::vector<SweepResult> run_snr_sweep(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.snr_db_list.empty()) throw ConfigError("snr sweep: empty snr_db_list");
  const auto channels = generate_scenario_batch(
      rician_of(cfg, cfg.ris_elements), cfg.scenario_count, cfg.seed);
  std::vector<SweepResult> results;
  for (const double snr : cfg.snr_db_list) {
    const NoiseModel noise = noise_from_snr(snr, cfg.power);
    for (const auto& alg : cfg.algorithms) {
      const auto outcomes = detail::run_paired(alg, channels, noise, cfg);
      results.push_back(detail::aggregate(snr, alg, outcomes, channels));
    }
  }
  return results;
}

/// Sum-rate vs RIS size at the configured SNR; channels are regenerated per
/// size (the realization dimensions change) but stay paired across
/// algorithms within a size.
inline std::vector<SweepResult> run_ris_sweep(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.ris_size_list.empty()) throw ConfigError("ris sweep: empty n_list");
  const NoiseModel noise = noise_from_snr(cfg.snr_db, cfg.power);
  std::vector<SweepResult> results;
  for (const std::size_t n : cfg.ris_size_list) {
    const auto channels =
        generate_scenario_batch(rician_of(cfg, n), cfg.scenario_count, cfg.seed);
    for (const auto& alg : cfg.algorithms) {
      const auto outcomes = detail::run_paired(alg, channels, noise, cfg);
      results.push_back(
          detail::aggregate(static_cast<double>(n), alg, outcomes, channels));
    }
  }
  return results;
}

/// Trailing moving average with window `w` (shorter at the start).
inline RVector moving_average(const RVector& x, std::size_t w) {
  if (w < 1) throw ConfigError("moving_average: window must be >= 1");
  RVector out(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i];
    if (i >= w) acc -= x[i - w];
    out[i] = acc / static_cast<double>(std::min(i + 1, w));
  }
  return out;
}

struct EpochTraceResult {
  std::size_t n_ris = 0;
  std::size_t n_scenarios = 0;
  RVector mean_rate_per_epoch;
  RVector smoothed;
  double wmmse_mean = 0.0;
  long crossing_epoch = -1;  // first 1-based epoch with mean > reference
  double mean_total_flops = 0.0;
  double flops_to_crossing = 0.0;  // mean cumulative flops at the crossing epoch
};

/// Mean per-epoch GMLB sum-rate trace per configured RIS size, with a
/// smoothed series and the WMMSE level on the same scenarios (same initial
/// phases) as a reference.
inline std::vector<EpochTraceResult> run_epoch_trace(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.trace_ris_sizes.empty()) throw ConfigError("epoch trace: empty trace_n_list");
  const NoiseModel noise = noise_from_snr(cfg.snr_db, cfg.power);
  std::vector<EpochTraceResult> results;
  for (const std::size_t n : cfg.trace_ris_sizes) {
    const auto channels =
        generate_scenario_batch(rician_of(cfg, n), cfg.scenario_count, cfg.seed);
    std::vector<GmlbResult> runs(channels.size());
    RVector wmmse_rates(channels.size());
    parallel_for(channels.size(), cfg.threads, [&](std::size_t i) {
      GmlbConfig g = cfg.gmlb;
      g.power = cfg.power;
      g.regulated = true;
      g.seed = channels[i].seed;
      runs[i] = gmlb_run(channels[i], noise, g);
      BaselineConfig b = cfg.baseline;
      b.seed = channels[i].seed;
      const RVector theta = initial_phases(n, channels[i].seed);
      const CMatrix w = wmmse_precoder(channels[i], theta, noise, cfg.power, b);
      wmmse_rates[i] = sum_rate({w, theta, cfg.power}, channels[i], noise);
    });

    EpochTraceResult tr;
    tr.n_ris = n;
    tr.n_scenarios = channels.size();
    const std::size_t epochs = runs[0].trace.size();
    tr.mean_rate_per_epoch.assign(epochs, 0.0);
    for (const auto& run : runs)
      for (std::size_t e = 0; e < epochs; ++e)
        tr.mean_rate_per_epoch[e] += run.trace[e].sum_rate;
    for (auto& v : tr.mean_rate_per_epoch) v /= static_cast<double>(runs.size());
    tr.smoothed = moving_average(tr.mean_rate_per_epoch, cfg.smooth_window);
    for (double r : wmmse_rates) tr.wmmse_mean += r;
    tr.wmmse_mean /= static_cast<double>(wmmse_rates.size());
    for (std::size_t e = 0; e < epochs; ++e) {
      if (tr.mean_rate_per_epoch[e] > tr.wmmse_mean) {
        tr.crossing_epoch = static_cast<long>(e + 1);
        double fsum = 0.0;
        for (const auto& run : runs) fsum += static_cast<double>(run.trace[e].flops);
        tr.flops_to_crossing = fsum / static_cast<double>(runs.size());
        break;
      }
    }
    for (const auto& run : runs)
      tr.mean_total_flops += static_cast<double>(run.trace.back().flops);
    tr.mean_total_flops /= static_cast<double>(runs.size());
    results.push_back(std::move(tr));
  }
  return results;
}

struct CostCell {
  std::size_t n_ris = 0;
  std::string algorithm;
  std::size_t n_scenarios = 0;
  double mean_flops = 0.0;
  double normalized_flops = 0.0;
  double mean_rate = 0.0;
  double mean_elapsed_s = 0.0;
  double normalized_elapsed = 0.0;
};

/// Compute-cost table across RIS sizes, normalized to the GMLB cell at the
/// smallest configured size. cost_mode=converged stops GMLB and AO at their
/// matched plateau rules; cost_mode=full runs configured budgets.
inline std::vector<CostCell> run_cost_comparison(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.ris_size_list.empty()) throw ConfigError("cost compare: empty n_list");
  if (std::find(cfg.algorithms.begin(), cfg.algorithms.end(), "gmlb") ==
      cfg.algorithms.end())
    throw ConfigError("cost compare: 'gmlb' must be in the algorithm list "
                      "(it is the normalization cell)");
  const bool cost_stop = cfg.cost_mode == "converged";
  const NoiseModel noise = noise_from_snr(cfg.snr_db, cfg.power);

  std::vector<std::size_t> sizes = cfg.ris_size_list;
  std::sort(sizes.begin(), sizes.end());
  std::vector<CostCell> cells;
  for (const std::size_t n : sizes) {
    const auto channels =
        generate_scenario_batch(rician_of(cfg, n), cfg.scenario_count, cfg.seed);
    for (const auto& alg : cfg.algorithms) {
      const auto outcomes = detail::run_paired(alg, channels, noise, cfg, cost_stop);
      const auto agg = detail::aggregate(static_cast<double>(n), alg, outcomes, channels);
      CostCell cell;
      cell.n_ris = n;
      cell.algorithm = alg;
      cell.n_scenarios = agg.n_scenarios;
      cell.mean_flops = agg.mean_flops;
      cell.mean_rate = agg.mean_rate;
      cell.mean_elapsed_s = agg.mean_elapsed_s;
      cells.push_back(cell);
    }
  }
  double unit_flops = 0.0, unit_elapsed = 0.0;
  for (const auto& c : cells)
    if (c.algorithm == "gmlb" && c.n_ris == sizes.front()) {
      unit_flops = c.mean_flops;
      unit_elapsed = c.mean_elapsed_s;
    }
  for (auto& c : cells) {
    c.normalized_flops = c.mean_flops / unit_flops;
    c.normalized_elapsed = unit_elapsed > 0.0 ? c.mean_elapsed_s / unit_elapsed : 0.0;
  }
  return cells;
}

// ---------------------------------------------------------------------------
// CSV + plot-script emission. CSV is the source of truth; plots are derived.

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

inline std::string sweep_csv(const std::vector<SweepResult>& results,
                             const char* axis_name, bool axis_integral) {
  std::ostringstream out;
  out << axis_name << ",algorithm,mean_rate,std_rate,n_scenarios\n";
  for (const auto& r : results) {
    if (axis_integral)
      out << static_cast<long long>(r.axis);
    else
      out << fmt_double(r.axis);
    out << "," << r.algorithm << "," << fmt_double(r.mean_rate) << ","
        << fmt_double(r.std_rate) << "," << r.n_scenarios << "\n";
  }
  return out.str();
}

inline std::string sweep_timing_csv(const std::vector<SweepResult>& results,
                                    const char* axis_name, bool axis_integral) {
  std::ostringstream out;
  out << axis_name << ",algorithm,mean_elapsed_s,mean_flops\n";
  for (const auto& r : results) {
    if (axis_integral)
      out << static_cast<long long>(r.axis);
    else
      out << fmt_double(r.axis);
    out << "," << r.algorithm << "," << fmt_double(r.mean_elapsed_s) << ","
        << fmt_double(r.mean_flops) << "\n";
  }
  return out.str();
}

inline std::string plot_script(const std::string& csv_name,
                               const std::string& svg_name,
                               const std::string& xlabel,
                               const std::string& ylabel,
                               const std::vector<std::string>& algorithms) {
  std::ostringstream out;
  out << "set datafile separator ','\n";
  out << "set terminal svg size 840,600\n";
  out << "set output '" << svg_name << "'\n";
  out << "set xlabel '" << xlabel << "'\n";
  out << "set ylabel '" << ylabel << "'\n";
  out << "set key top left\n";
  out << "plot \\\n";
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    out << "  '" << csv_name << "' every ::1 using 1:(strcol(2) eq '"
        << algorithms[i] << "' ? $3 : 1/0) with linespoints title '"
        << algorithms[i] << "'";
    out << (i + 1 < algorithms.size() ? ", \\\n" : "\n");
  }
  return out.str();
}

inline std::vector<std::string> algorithms_of(const std::vector<SweepResult>& rs) {
  std::vector<std::string> names;
  for (const auto& r : rs)
    if (std::find(names.begin(), names.end(), r.algorithm) == names.end())
      names.push_back(r.algorithm);
  return names;
}

}  // namespace detail

inline void emit_snr_sweep(const std::vector<SweepResult>& results,
                           const std::string& dir) {
  if (results.empty()) throw ConfigError("emit_snr_sweep: no results");
  std::filesystem::create_directories(dir);
  detail::write_text_file(dir + "/snr_sweep.csv",
                          detail::sweep_csv(results, "snr_db", false));
  detail::write_text_file(dir + "/snr_sweep_timing.csv",
                          detail::sweep_timing_csv(results, "snr_db", false));
  detail::write_text_file(
      dir + "/snr_sweep.gp",
      detail::plot_script("snr_sweep.csv", "snr_sweep.svg", "SNR (dB)",
                          "sum rate (bits/s/Hz)", detail::algorithms_of(results)));
}

inline void emit_ris_sweep(const std::vector<SweepResult>& results,
                           const std::string& dir) {
  if (results.empty()) throw ConfigError("emit_ris_sweep: no results");
  std::filesystem::create_directories(dir);
  detail::write_text_file(dir + "/ris_sweep.csv",
                          detail::sweep_csv(results, "n_ris", true));
  detail::write_text_file(dir + "/ris_sweep_timing.csv",
                          detail::sweep_timing_csv(results, "n_ris", true));
  detail::write_text_file(
      dir + "/ris_sweep.gp",
      detail::plot_script("ris_sweep.csv", "ris_sweep.svg", "RIS elements",
                          "sum rate (bits/s/Hz)", detail::algorithms_of(results)));
}

inline void emit_epoch_traces(const std::vector<EpochTraceResult>& results,
                              const std::string& dir) {
  if (results.empty()) throw ConfigError("emit_epoch_traces: no results");
  std::filesystem::create_directories(dir);
  std::ostringstream summary;
  summary << "n_ris,crossing_epoch,wmmse_mean,final_mean_rate,mean_total_flops,"
             "flops_to_crossing,n_scenarios\n";
  for (const auto& tr : results) {
    std::ostringstream out;
    out << "epoch,mean_sum_rate,smoothed_sum_rate,wmmse_mean\n";
    for (std::size_t e = 0; e < tr.mean_rate_per_epoch.size(); ++e)
      out << (e + 1) << "," << detail::fmt_double(tr.mean_rate_per_epoch[e]) << ","
          << detail::fmt_double(tr.smoothed[e]) << ","
          << detail::fmt_double(tr.wmmse_mean) << "\n";
    const std::string name = dir + "/epoch_trace_n" + std::to_string(tr.n_ris);
    detail::write_text_file(name + ".csv", out.str());

    std::ostringstream gp;
    gp << "set datafile separator ','\n"
       << "set terminal svg size 840,600\n"
       << "set output 'epoch_trace_n" << tr.n_ris << ".svg'\n"
       << "set xlabel 'epoch'\nset ylabel 'sum rate (bits/s/Hz)'\nset key bottom right\n"
       << "plot 'epoch_trace_n" << tr.n_ris
       << ".csv' every ::1 using 1:3 with lines title 'gmlb (smoothed)', \\\n"
       << "     '' every ::1 using 1:4 with lines title 'wmmse reference'\n";
    detail::write_text_file(name + ".gp", gp.str());

    summary << tr.n_ris << "," << tr.crossing_epoch << ","
            << detail::fmt_double(tr.wmmse_mean) << ","
            << detail::fmt_double(tr.mean_rate_per_epoch.back()) << ","
            << detail::fmt_double(tr.mean_total_flops) << ","
            << detail::fmt_double(tr.flops_to_crossing) << "," << tr.n_scenarios
            << "\n";
  }
  detail::write_text_file(dir + "/epoch_trace_summary.csv", summary.str());
}

inline void emit_cost_table(const std::vector<CostCell>& cells,
                            const std::string& dir, const std::string& cost_mode) {
  if (cells.empty()) throw ConfigError("emit_cost_table: no results");
  std::filesystem::create_directories(dir);
  std::ostringstream out;
  out << "n_ris,algorithm,mean_flops,normalized_flops,mean_rate,n_scenarios\n";
  for (const auto& c : cells)
    out << c.n_ris << "," << c.algorithm << "," << detail::fmt_double(c.mean_flops)
        << "," << detail::fmt_double(c.normalized_flops) << ","
        << detail::fmt_double(c.mean_rate) << "," << c.n_scenarios << "\n";
  detail::write_text_file(dir + "/cost_compare.csv", out.str());

  std::ostringstream timing;
  timing << "n_ris,algorithm,mean_elapsed_s,normalized_elapsed\n";
  for (const auto& c : cells)
    timing << c.n_ris << "," << c.algorithm << ","
           << detail::fmt_double(c.mean_elapsed_s) << ","
           << detail::fmt_double(c.normalized_elapsed) << "\n";
  detail::write_text_file(dir + "/cost_compare_timing.csv", timing.str());

  std::size_t min_n = cells.front().n_ris;
  for (const auto& c : cells) min_n = std::min(min_n, c.n_ris);
  std::ostringstream meta;
  meta << "# cost table metadata\n"
       << "normalization_cell = gmlb at n_ris=" << min_n << "\n"
       << "cost_mode = " << cost_mode << "\n"
       << "rng = " << kRngAlgorithm << "\n";
  detail::write_text_file(dir + "/cost_compare_meta.txt", meta.str());

  std::vector<std::string> algorithms;
  for (const auto& c : cells)
    if (std::find(algorithms.begin(), algorithms.end(), c.algorithm) ==
        algorithms.end())
      algorithms.push_back(c.algorithm);
  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set terminal svg size 840,600\n"
     << "set output 'cost_compare.svg'\n"
     << "set xlabel 'RIS elements'\nset ylabel 'normalized flop cost'\n"
     << "set logscale y\nset key top left\nplot \\\n";
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    gp << "  'cost_compare.csv' every ::1 using 1:(strcol(2) eq '" << algorithms[i]
       << "' ? $4 : 1/0) with linespoints title '" << algorithms[i] << "'";
    gp << (i + 1 < algorithms.size() ? ", \\\n" : "\n");
  }
  detail::write_text_file(dir + "/cost_compare.gp", gp.str());
}

/// Parsed row of a sweep CSV; doubles round-trip exactly.
struct SweepCsvRow {
  double axis = 0.0;
  std::string algorithm;
  double mean_rate = 0.0;
  double std_rate = 0.0;
  std::size_t n_scenarios = 0;
};

inline std::vector<SweepCsvRow> parse_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("parse_sweep_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("parse_sweep_csv: empty file " + path);
  std::vector<SweepCsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    SweepCsvRow row;
    std::getline(ss, tok, ',');
    row.axis = std::strtod(tok.c_str(), nullptr);
    std::getline(ss, row.algorithm, ',');
    std::getline(ss, tok, ',');
    row.mean_rate = std::strtod(tok.c_str(), nullptr);
    std::getline(ss, tok, ',');
    row.std_rate = std::strtod(tok.c_str(), nullptr);
    std::getline(ss, tok, ',');
    row.n_scenarios = static_cast<std::size_t>(std::stoull(tok));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Writes the resolved configuration sidecar every command emits.
inline void write_run_sidecar(const RunConfig& cfg, const std::string& dir) {
  std::filesystem::create_directories(dir);
  detail::write_text_file(dir + "/resolved_config.txt", serialize_config(cfg));
}

}  // namespace risbf
