// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "risbf/error.hpp"
#include "risbf/matrix.hpp"

namespace risbf {

/// Central-difference gradient of a real-valued function of a real vector:
/// g_n = (f(x + h e_n) - f(x - h e_n)) / (2h).
///
/// This is the independent oracle used to validate every analytic gradient
/// in the library. The default step suits objectives of order 1..100; it is
/// a parameter, not a constant.
template <typename F>
RVector finite_diff_gradient(F&& f, const RVector& x, double h = 1e-6) {
  if (!(h > 0.0))
    throw NumericError("finite_diff_gradient: step h must be positive");
  RVector grad(x.size());
  RVector probe = x;
  for (std::size_t n = 0; n < x.size(); ++n) {
    probe[n] = x[n] + h;
    const double fp = f(probe);
    probe[n] = x[n] - h;
    const double fm = f(probe);
    probe[n] = x[n];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("finite_diff_gradient: non-finite value at coordinate " +
                         std::to_string(n));
    grad[n] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

/// l2 norm helpers used by gradient checks.
inline double l2_norm(const RVector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double l2_dist(const RVector& a, const RVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace risbf
