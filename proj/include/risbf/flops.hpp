// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#pragma once

#include <cstdint>

namespace risbf {
namespace flopcost {

// Floating-point cost model used as the energy proxy for every optimizer in
// the toolkit. Conventions:
//   - complex multiply = 6 flops, complex add = 2 flops, complex MAC = 8
//   - real MAC = 2 flops
//   - transcendentals (exp, log, sin, cos, sqrt, sigmoid) are folded into
//     small per-element constants; they are a negligible share of every
//     algorithm compared here, so the comparison is MAC-driven.
// The same model is applied to all algorithms, so ratios between them are
// meaningful even where absolute counts are approximate.

using u64 = std::uint64_t;

/// (r x k) * (k x c) complex product.
constexpr u64 cmatmul(u64 r, u64 k, u64 c) { return 8 * r * k * c; }

/// Row scaling of an n x m complex matrix by a diagonal of unit phasors,
/// including forming the phasors from angles.
constexpr u64 diag_scale(u64 n, u64 m) { return 6 * n * m + 4 * n; }

/// Effective channel rows: H * diag(e^{j theta}) * G.
constexpr u64 effective_channel(u64 k, u64 n, u64 m) {
  return diag_scale(n, m) + cmatmul(k, n, m);
}

/// Cross gains A = F * W with F (K x M), W (M x K).
constexpr u64 cross_gains(u64 k, u64 m) { return cmatmul(k, m, k); }

/// Full sum-rate evaluation (effective channel + cross gains + SINR/log).
constexpr u64 sum_rate(u64 k, u64 n, u64 m) {
  return effective_channel(k, n, m) + cross_gains(k, m) + k * (2 * k + 16);
}

/// Ascent gradient of the sum rate with respect to the precoder.
constexpr u64 grad_precoder(u64 k, u64 n, u64 m) {
  return effective_channel(k, n, m) + cross_gains(k, m) + 10 * k * k +
         cmatmul(m, k, k);
}

/// Gradient of the sum rate with respect to the phase vector.
constexpr u64 grad_phases(u64 k, u64 n, u64 m) {
  return effective_channel(k, n, m) + cross_gains(k, m) + cmatmul(n, m, k) +
         12 * k * k * n;
}

/// Two-linear-layer perceptron forward pass (in -> hidden -> out).
constexpr u64 mlp_forward(u64 in, u64 hidden, u64 out) {
  return 2 * hidden * in + hidden + 2 * out * hidden + out;
}

/// Reverse pass: roughly twice the forward MACs plus activation masking.
constexpr u64 mlp_backward(u64 in, u64 hidden, u64 out) {
  return 2 * mlp_forward(in, hidden, out) + 2 * hidden;
}

/// Bounded-activation regulator applied to an n-vector.
constexpr u64 regulator(u64 n) { return 8 * n; }

/// Trace check plus rescale of an M x K precoder.
constexpr u64 power_projection(u64 m, u64 k) { return 6 * m * k; }

/// Elementwise parameter update for n parameters.
constexpr u64 sgd(u64 n) { return 2 * n; }

/// Parameter count of a two-linear-layer perceptron.
constexpr u64 mlp_params(u64 in, u64 hidden, u64 out) {
  return hidden * in + hidden + out * hidden + out;
}

/// Complex Cholesky factorization of an M x M Hermitian matrix.
constexpr u64 cholesky(u64 m) { return (8 * m * m * m) / 3 + 8 * m * m; }

/// Forward + backward triangular solves for one right-hand side.
constexpr u64 cholesky_solve(u64 m) { return 8 * m * m; }

/// Gram accumulation  sum_k  c_k f_k f_k^H  over K rank-one terms.
constexpr u64 gram_build(u64 k, u64 m) { return 8 * k * m * m; }

}  // namespace flopcost
}  // namespace risbf
