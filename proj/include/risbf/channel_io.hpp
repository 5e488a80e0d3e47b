// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "risbf/channel.hpp"
#include "risbf/error.hpp"

namespace risbf {

// Plain-text channel dump, one file per scenario. Layout (line oriented):
//
//   risbf-channel v1
//   seed <u64>
//   kappa_user <hexfloat>
//   kappa_bsris <hexfloat>
//   dims <M> <N> <K>
//   g <N*M lines: "re im">      row-major, hexfloat
//   h <K*N lines: "re im">
//
// Hexfloat round-trips doubles bit-exactly, so load(save(ch)) == ch.

namespace detail {

inline std::string hexf(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", x);
  return buf;
}

inline double parse_hexf(const std::string& tok, const std::string& ctx) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str()) throw IoError("channel dump: bad float in " + ctx);
  return v;
}

}  // namespace detail

inline void save_channel(const ChannelSet& ch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_channel: cannot open " + path);
  out << "risbf-channel v1\n";
  out << "seed " << ch.seed << "\n";
  out << "kappa_user " << detail::hexf(ch.params.kappa_user) << "\n";
  out << "kappa_bsris " << detail::hexf(ch.params.kappa_bsris) << "\n";
  out << "dims " << ch.params.bs_antennas << " " << ch.params.ris_elements
      << " " << ch.params.users << "\n";
  out << "g\n";
  for (const auto& z : ch.bs_to_ris.data())
    out << detail::hexf(z.real()) << " " << detail::hexf(z.imag()) << "\n";
  out << "h\n";
  for (const auto& z : ch.ris_to_users.data())
    out << detail::hexf(z.real()) << " " << detail::hexf(z.imag()) << "\n";
  if (!out) throw IoError("save_channel: write failed for " + path);
}

inline ChannelSet load_channel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_channel: cannot open " + path);
  std::string word;
  auto expect = [&](const std::string& want) {
    if (!(in >> word) || word != want)
      throw IoError("load_channel: expected '" + want + "' in " + path);
  };
  expect("risbf-channel");
  expect("v1");
  ChannelSet ch;
  expect("seed");
  if (!(in >> ch.seed)) throw IoError("load_channel: bad seed in " + path);
  expect("kappa_user");
  in >> word;
  ch.params.kappa_user = detail::parse_hexf(word, path);
  expect("kappa_bsris");
  in >> word;
  ch.params.kappa_bsris = detail::parse_hexf(word, path);
  expect("dims");
  if (!(in >> ch.params.bs_antennas >> ch.params.ris_elements >> ch.params.users))
    throw IoError("load_channel: bad dims in " + path);
  validate(ch.params);

  auto read_matrix = [&](std::size_t rows, std::size_t cols) {
    CMatrix m(rows, cols);
    for (auto& z : m.data()) {
      std::string re, im;
      if (!(in >> re >> im)) throw IoError("load_channel: truncated " + path);
      z = {detail::parse_hexf(re, path), detail::parse_hexf(im, path)};
    }
    return m;
  };
  expect("g");
  ch.bs_to_ris = read_matrix(ch.params.ris_elements, ch.params.bs_antennas);
  expect("h");
  ch.ris_to_users = read_matrix(ch.params.users, ch.params.ris_elements);
  return ch;
}

}  // namespace risbf
