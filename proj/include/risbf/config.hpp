// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "risbf/baselines.hpp"
#include "risbf/channel.hpp"
#include "risbf/error.hpp"
#include "risbf/gmlb.hpp"
#include "risbf/rng.hpp"

namespace risbf {

/// Registered optimizer names accepted in configs and on the command line.
inline const std::vector<std::string>& registered_algorithms() {
  static const std::vector<std::string> names{"gmlb", "gmlb-unregulated",
                                              "wmmse", "ao", "random"};
  return names;
}

/// Everything one experiment needs: scenario dimensions, sweep axes,
/// per-algorithm hyperparameters, and the master seed.
struct RunConfig {
  std::size_t bs_antennas = 4;   // M
  std::size_t ris_elements = 4;  // N (non-sweep commands)
  std::size_t users = 4;         // K
  double power = 1000.0;         // P
  double snr_db = 20.0;          // non-sweep commands
  std::vector<double> snr_db_list{-20, -10, 0, 10, 20, 30};
  std::vector<std::size_t> ris_size_list{4, 8, 16, 32};
  std::vector<std::size_t> trace_ris_sizes{4, 8};
  std::size_t scenario_count = 10;
  std::vector<std::string> algorithms{"gmlb", "gmlb-unregulated", "wmmse", "ao",
                                      "random"};
  double kappa_user = 10.0;
  double kappa_bsris = 10.0;
  GmlbConfig gmlb{};
  BaselineConfig baseline{};
  /// "full": cost sweeps run every configured epoch/round.
  /// "converged": cost sweeps stop each optimizer at its plateau rule.
  std::string cost_mode = "converged";
  std::size_t smooth_window = 5;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

inline RicianParams rician_of(const RunConfig& cfg, std::size_t n_ris) {
  return RicianParams{cfg.bs_antennas, n_ris, cfg.users, cfg.kappa_user,
                      cfg.kappa_bsris};
}

inline void validate(const RunConfig& cfg) {
  if (cfg.bs_antennas < 1 || cfg.ris_elements < 1 || cfg.users < 1)
    throw ConfigError("config: dimensions must be >= 1");
  if (!(cfg.power > 0.0)) throw ConfigError("config: power must be positive");
  if (cfg.scenario_count < 1) throw ConfigError("config: scenarios must be >= 1");
  if (cfg.algorithms.empty()) throw ConfigError("config: algorithm list is empty");
  const auto& known = registered_algorithms();
  for (const auto& a : cfg.algorithms)
    if (std::find(known.begin(), known.end(), a) == known.end())
      throw ConfigError("config: unknown algorithm '" + a + "'");
  if (cfg.cost_mode != "full" && cfg.cost_mode != "converged")
    throw ConfigError("config: cost_mode must be 'full' or 'converged'");
  if (cfg.smooth_window < 1) throw ConfigError("config: smooth_window must be >= 1");
  validate(cfg.gmlb);
  validate(cfg.baseline);
  validate(rician_of(cfg, cfg.ris_elements));
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number '" + v + "' for key '" + key + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer '" + v + "' for key '" + key + "'");
  }
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: bad boolean '" + v + "' for key '" + key + "'");
}

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace detail

/// Applies one `key = value` assignment. Recognized keys mirror the
/// serialized form written by serialize_config.
inline void apply_config_entry(RunConfig& cfg, const std::string& key,
                               const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_u64;
  if (key == "m") cfg.bs_antennas = parse_u64(value, key);
  else if (key == "n") cfg.ris_elements = parse_u64(value, key);
  else if (key == "k") cfg.users = parse_u64(value, key);
  else if (key == "power") cfg.power = parse_double(value, key);
  else if (key == "snr_db") cfg.snr_db = parse_double(value, key);
  else if (key == "snr_db_list") {
    cfg.snr_db_list.clear();
    for (const auto& t : detail::split_list(value))
      cfg.snr_db_list.push_back(parse_double(t, key));
  } else if (key == "n_list") {
    cfg.ris_size_list.clear();
    for (const auto& t : detail::split_list(value))
      cfg.ris_size_list.push_back(parse_u64(t, key));
  } else if (key == "trace_n_list") {
    cfg.trace_ris_sizes.clear();
    for (const auto& t : detail::split_list(value))
      cfg.trace_ris_sizes.push_back(parse_u64(t, key));
  } else if (key == "scenarios") cfg.scenario_count = parse_u64(value, key);
  else if (key == "algorithms") cfg.algorithms = detail::split_list(value);
  else if (key == "kappa_user") cfg.kappa_user = parse_double(value, key);
  else if (key == "kappa_bsris") cfg.kappa_bsris = parse_double(value, key);
  else if (key == "gmlb.epochs") cfg.gmlb.epochs = parse_u64(value, key);
  else if (key == "gmlb.inner_iters") cfg.gmlb.inner_iters = parse_u64(value, key);
  else if (key == "gmlb.lr_w") cfg.gmlb.lr_w = parse_double(value, key);
  else if (key == "gmlb.lr_theta") cfg.gmlb.lr_theta = parse_double(value, key);
  else if (key == "gmlb.lambda") cfg.gmlb.lambda = parse_double(value, key);
  else if (key == "gmlb.hidden") cfg.gmlb.hidden = parse_u64(value, key);
  else if (key == "gmlb.centered_regulator")
    cfg.gmlb.centered_regulator = parse_bool(value, key);
  else if (key == "baseline.max_outer_iters")
    cfg.baseline.max_outer_iters = parse_u64(value, key);
  else if (key == "baseline.conv_tol") cfg.baseline.conv_tol = parse_double(value, key);
  else if (key == "baseline.theta_step")
    cfg.baseline.theta_step = parse_double(value, key);
  else if (key == "baseline.theta_inner_iters")
    cfg.baseline.theta_inner_iters = parse_u64(value, key);
  else if (key == "cost_mode") cfg.cost_mode = value;
  else if (key == "smooth_window") cfg.smooth_window = parse_u64(value, key);
  else if (key == "out") cfg.output_dir = value;
  else if (key == "seed") cfg.seed = parse_u64(value, key);
  else if (key == "threads") cfg.threads = parse_u64(value, key);
  else throw ConfigError("config: unknown key '" + key + "'");
}

/// Parses a `key = value` file; '#' starts a comment, blank lines ignored.
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: missing '=' at " + path + ":" +
                        std::to_string(lineno));
    apply_config_entry(cfg, detail::trim(line.substr(0, eq)),
                       detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

/// Fully resolved configuration in the same key=value syntax, written next
/// to every run's outputs. Doubles use round-trip precision so the file
/// reloads to the exact same configuration.
inline std::string serialize_config(const RunConfig& cfg) {
  using detail::fmt_double;
  std::ostringstream out;
  out << "# resolved risbf configuration\n";
  out << "# rng = " << kRngAlgorithm << "\n";
  out << "m = " << cfg.bs_antennas << "\n";
  out << "n = " << cfg.ris_elements << "\n";
  out << "k = " << cfg.users << "\n";
  out << "power = " << fmt_double(cfg.power) << "\n";
  out << "snr_db = " << fmt_double(cfg.snr_db) << "\n";
  out << "snr_db_list = ";
  for (std::size_t i = 0; i < cfg.snr_db_list.size(); ++i)
    out << (i ? "," : "") << fmt_double(cfg.snr_db_list[i]);
  out << "\n";
  out << "n_list = ";
  for (std::size_t i = 0; i < cfg.ris_size_list.size(); ++i)
    out << (i ? "," : "") << cfg.ris_size_list[i];
  out << "\n";
  out << "trace_n_list = ";
  for (std::size_t i = 0; i < cfg.trace_ris_sizes.size(); ++i)
    out << (i ? "," : "") << cfg.trace_ris_sizes[i];
  out << "\n";
  out << "scenarios = " << cfg.scenario_count << "\n";
  out << "algorithms = ";
  for (std::size_t i = 0; i < cfg.algorithms.size(); ++i)
    out << (i ? "," : "") << cfg.algorithms[i];
  out << "\n";
  out << "kappa_user = " << fmt_double(cfg.kappa_user) << "\n";
  out << "kappa_bsris = " << fmt_double(cfg.kappa_bsris) << "\n";
  out << "gmlb.epochs = " << cfg.gmlb.epochs << "\n";
  out << "gmlb.inner_iters = " << cfg.gmlb.inner_iters << "\n";
  out << "gmlb.lr_w = " << fmt_double(cfg.gmlb.lr_w) << "\n";
  out << "gmlb.lr_theta = " << fmt_double(cfg.gmlb.lr_theta) << "\n";
  out << "gmlb.lambda = " << fmt_double(cfg.gmlb.lambda) << "\n";
  out << "gmlb.hidden = " << cfg.gmlb.hidden << "\n";
  out << "gmlb.centered_regulator = "
      << (cfg.gmlb.centered_regulator ? "true" : "false") << "\n";
  out << "baseline.max_outer_iters = " << cfg.baseline.max_outer_iters << "\n";
  out << "baseline.conv_tol = " << fmt_double(cfg.baseline.conv_tol) << "\n";
  out << "baseline.theta_step = " << fmt_double(cfg.baseline.theta_step) << "\n";
  out << "baseline.theta_inner_iters = " << cfg.baseline.theta_inner_iters << "\n";
  out << "cost_mode = " << cfg.cost_mode << "\n";
  out << "smooth_window = " << cfg.smooth_window << "\n";
  out << "out = " << cfg.output_dir << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "threads = " << cfg.threads << "\n";
  return out.str();
}

}  // namespace risbf
