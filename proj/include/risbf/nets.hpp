// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "risbf/error.hpp"
#include "risbf/matrix.hpp"
#include "risbf/rng.hpp"

namespace risbf {

struct MlpDims {
  std::size_t in = 0;
  std::size_t hidden = 0;
  std::size_t out = 0;
  bool operator==(const MlpDims& o) const {
    return in == o.in && hidden == o.hidden && out == o.out;
  }
};

/// Parameters of one two-linear-layer perceptron with ReLU in between:
/// y = w2 * relu(w1 * x + b1) + b2. Also reused as the container for
/// parameter gradients (same shapes).
struct MlpParams {
  MlpDims dims;
  std::vector<double> w1;  // hidden x in, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // out x hidden, row-major
  std::vector<double> b2;  // out

  static MlpParams zeros(MlpDims d) {
    MlpParams p;
    p.dims = d;
    p.w1.assign(d.hidden * d.in, 0.0);
    p.b1.assign(d.hidden, 0.0);
    p.w2.assign(d.out * d.hidden, 0.0);
    p.b2.assign(d.out, 0.0);
    return p;
  }

  std::size_t parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
  }
};

// Substream tags for parameter initialization.
namespace detail {
inline constexpr std::uint64_t kInitStream = 7;
}

/// Weights uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
/// Draw order: w1 row-major, then w2 row-major.
inline MlpParams init_params(MlpDims dims, std::uint64_t seed) {
  if (dims.in < 1 || dims.hidden < 1 || dims.out < 1)
    throw ConfigError("init_params: all dims must be >= 1");
  MlpParams p = MlpParams::zeros(dims);
  Rng rng = Rng::stream(seed, detail::kInitStream);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(dims.in));
  for (auto& w : p.w1) w = rng.uniform(-bound1, bound1);
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(dims.hidden));
  for (auto& w : p.w2) w = rng.uniform(-bound2, bound2);
  return p;
}

/// Forward-pass activations retained for backprop.
struct MlpCache {
  RVector input;       // in
  RVector hidden_pre;  // hidden, before ReLU
  RVector output;      // out
};

/// y = w2 * relu(w1 x + b1) + b2. When `cache` is given it is filled for a
/// later mlp_backward call.
inline RVector mlp_forward(const MlpParams& p, const RVector& x,
                           MlpCache* cache = nullptr) {
  if (x.size() != p.dims.in)
    throw ShapeError("mlp_forward: input size " + std::to_string(x.size()) +
                     ", expected " + std::to_string(p.dims.in));
  RVector hidden_pre(p.dims.hidden);
  for (std::size_t h = 0; h < p.dims.hidden; ++h) {
    double acc = p.b1[h];
    const double* row = &p.w1[h * p.dims.in];
    for (std::size_t i = 0; i < p.dims.in; ++i) acc += row[i] * x[i];
    hidden_pre[h] = acc;
  }
  RVector y(p.dims.out);
  for (std::size_t o = 0; o < p.dims.out; ++o) {
    double acc = p.b2[o];
    const double* row = &p.w2[o * p.dims.hidden];
    for (std::size_t h = 0; h < p.dims.hidden; ++h) {
      const double a = hidden_pre[h] > 0.0 ? hidden_pre[h] : 0.0;
      acc += row[h] * a;
    }
    y[o] = acc;
  }
  if (cache) {
    cache->input = x;
    cache->hidden_pre = hidden_pre;
    cache->output = y;
  }
  return y;
}

/// Exact reverse-mode gradients of y . upstream with respect to parameters,
/// accumulated into `grads` (MlpParams-shaped, zero it first for fresh
/// gradients). The ReLU subgradient at exactly 0 is 0. Optionally also
/// produces the gradient with respect to the input.
inline void mlp_backward(const MlpParams& p, const MlpCache& cache,
                         const RVector& upstream, MlpParams& grads,
                         RVector* input_grad = nullptr) {
  if (cache.input.size() != p.dims.in || cache.hidden_pre.size() != p.dims.hidden)
    throw ShapeError("mlp_backward: cache does not match network dims");
  if (upstream.size() != p.dims.out)
    throw ShapeError("mlp_backward: upstream size " +
                     std::to_string(upstream.size()) + ", expected " +
                     std::to_string(p.dims.out));
  if (!(grads.dims == p.dims)) throw ShapeError("mlp_backward: grads shape mismatch");

  RVector d_hidden(p.dims.hidden, 0.0);
  for (std::size_t o = 0; o < p.dims.out; ++o) {
    const double u = upstream[o];
    grads.b2[o] += u;
    double* grow = &grads.w2[o * p.dims.hidden];
    const double* wrow = &p.w2[o * p.dims.hidden];
    for (std::size_t h = 0; h < p.dims.hidden; ++h) {
      const double a = cache.hidden_pre[h] > 0.0 ? cache.hidden_pre[h] : 0.0;
      grow[h] += u * a;
      d_hidden[h] += u * wrow[h];
    }
  }
  if (input_grad) input_grad->assign(p.dims.in, 0.0);
  for (std::size_t h = 0; h < p.dims.hidden; ++h) {
    const double dz = cache.hidden_pre[h] > 0.0 ? d_hidden[h] : 0.0;
    if (dz == 0.0) continue;
    grads.b1[h] += dz;
    double* grow = &grads.w1[h * p.dims.in];
    const double* wrow = &p.w1[h * p.dims.in];
    for (std::size_t i = 0; i < p.dims.in; ++i) {
      grow[i] += dz * cache.input[i];
      if (input_grad) (*input_grad)[i] += dz * wrow[i];
    }
  }
}

/// params - lr * grads, elementwise.
inline MlpParams sgd_step(MlpParams params, const MlpParams& grads, double lr) {
  if (!(params.dims == grads.dims)) throw ShapeError("sgd_step: shape mismatch");
  for (std::size_t i = 0; i < params.w1.size(); ++i) params.w1[i] -= lr * grads.w1[i];
  for (std::size_t i = 0; i < params.b1.size(); ++i) params.b1[i] -= lr * grads.b1[i];
  for (std::size_t i = 0; i < params.w2.size(); ++i) params.w2[i] -= lr * grads.w2[i];
  for (std::size_t i = 0; i < params.b2.size(); ++i) params.b2[i] -= lr * grads.b2[i];
  return params;
}

/// Bounded activation applied to the phase network output (amplification
/// operator times sigmoid).
struct RegulatorConfig {
  double lambda = 1.57079632679489661923;  // pi/2
  /// Non-standard variant that shifts the output to (-lambda/2, +lambda/2)
  /// instead of (0, lambda); off by default, kept for comparison sweeps.
  bool centered = false;
};

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

/// lambda * sigmoid(z) elementwise (or the centered variant).
inline RVector apply_regulator(const RegulatorConfig& cfg, const RVector& z) {
  if (!(cfg.lambda > 0.0)) throw ConfigError("regulator: lambda must be positive");
  RVector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double s = detail::sigmoid(z[i]);
    out[i] = cfg.lambda * (cfg.centered ? s - 0.5 : s);
  }
  return out;
}

/// d(regulator)/dz elementwise, for backprop through the bounded activation.
inline RVector regulator_derivative(const RegulatorConfig& cfg, const RVector& z) {
  RVector d(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double s = detail::sigmoid(z[i]);
    d[i] = cfg.lambda * s * (1.0 - s);
  }
  return d;
}

/// Pack one precoder-gradient row (K complex entries) as 2K reals: K real
/// parts then K imaginary parts. This ordering is part of the checkpoint
/// and test contract.
inline RVector pack_row(const CMatrix& m, std::size_t row) {
  const std::size_t k = m.cols();
  RVector x(2 * k);
  for (std::size_t j = 0; j < k; ++j) {
    x[j] = m(row, j).real();
    x[k + j] = m(row, j).imag();
  }
  return x;
}

inline void unpack_row(const RVector& y, CMatrix& m, std::size_t row) {
  const std::size_t k = m.cols();
  for (std::size_t j = 0; j < k; ++j) m(row, j) = {y[j], y[k + j]};
}

/// Precoder update network: the same 2K -> 2K perceptron is applied to each
/// of the M antenna rows of the input gradient (shared parameters), and the
/// outputs are reassembled into a complex M x K update. Optionally records
/// the per-row forward caches.
inline CMatrix bf_net_apply(const MlpParams& p, const CMatrix& grad_precoder,
                            std::vector<MlpCache>* caches = nullptr) {
  const std::size_t k = grad_precoder.cols();
  if (p.dims.in != 2 * k || p.dims.out != 2 * k)
    throw ShapeError("bf_net_apply: network is " + std::to_string(p.dims.in) +
                     "->" + std::to_string(p.dims.out) + ", gradient has " +
                     std::to_string(k) + " columns");
  CMatrix delta(grad_precoder.rows(), k);
  if (caches) caches->assign(grad_precoder.rows(), MlpCache{});
  for (std::size_t m = 0; m < grad_precoder.rows(); ++m) {
    const RVector y = mlp_forward(p, pack_row(grad_precoder, m),
                                  caches ? &(*caches)[m] : nullptr);
    unpack_row(y, delta, m);
  }
  return delta;
}

/// Phase update network: N -> N perceptron followed by the bounded
/// regulator; every output lies strictly inside (0, lambda) (or the centered
/// band). Optionally records the cache and the pre-regulator output.
inline RVector theta_net_apply(const MlpParams& p, const RegulatorConfig& cfg,
                               const RVector& grad_phases,
                               MlpCache* cache = nullptr) {
  if (p.dims.in != grad_phases.size() || p.dims.out != grad_phases.size())
    throw ShapeError("theta_net_apply: network is " + std::to_string(p.dims.in) +
                     "->" + std::to_string(p.dims.out) + ", gradient has " +
                     std::to_string(grad_phases.size()) + " entries");
  const RVector z = mlp_forward(p, grad_phases, cache);
  return apply_regulator(cfg, z);
}

// ---------------------------------------------------------------------------
// Checkpoint format: "risbf-mlp v1", dims, then the four parameter blocks as
// hexfloat tokens (bit-exact round trip).

inline void save_params(const MlpParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_params: cannot open " + path);
  auto hexf = [](double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", x);
    return std::string(buf);
  };
  out << "risbf-mlp v1\n";
  out << "dims " << p.dims.in << " " << p.dims.hidden << " " << p.dims.out << "\n";
  for (const char* name : {"w1", "b1", "w2", "b2"}) {
    const std::vector<double>& block =
        name[0] == 'w' ? (name[1] == '1' ? p.w1 : p.w2)
                       : (name[1] == '1' ? p.b1 : p.b2);
    out << name;
    for (double v : block) out << " " << hexf(v);
    out << "\n";
  }
  if (!out) throw IoError("save_params: write failed for " + path);
}

inline MlpParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_params: cannot open " + path);
  std::string word;
  auto expect = [&](const std::string& want) {
    if (!(in >> word) || word != want)
      throw IoError("load_params: expected '" + want + "' in " + path);
  };
  expect("risbf-mlp");
  expect("v1");
  expect("dims");
  MlpDims dims;
  if (!(in >> dims.in >> dims.hidden >> dims.out))
    throw IoError("load_params: bad dims in " + path);
  MlpParams p = MlpParams::zeros(dims);
  auto read_block = [&](const char* name, std::vector<double>& block) {
    expect(name);
    for (double& v : block) {
      if (!(in >> word)) throw IoError("load_params: truncated " + path);
      char* end = nullptr;
      v = std::strtod(word.c_str(), &end);
      if (end == word.c_str()) throw IoError("load_params: bad float in " + path);
    }
  };
  read_block("w1", p.w1);
  read_block("b1", p.b1);
  read_block("w2", p.w2);
  read_block("b2", p.b2);
  return p;
}

}  // namespace risbf
