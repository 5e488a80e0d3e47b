// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "risbf/error.hpp"

namespace risbf {

using cdouble = std::complex<double>;
using RVector = std::vector<double>;

/// Dense complex matrix, row-major, double precision. Sized for the problem
/// scales of this toolkit (tens of rows/columns); not a BLAS substitute.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  cdouble& operator()(std::size_t r, std::size_t c) noexcept {
    return data_[r * cols_ + c];
  }
  const cdouble& operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }

  std::vector<cdouble>& data() noexcept { return data_; }
  const std::vector<cdouble>& data() const noexcept { return data_; }

  bool same_shape(const CMatrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const noexcept {
    for (const auto& z : data_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cdouble> data_;
};

inline std::string shape_str(const CMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

/// Standard complex matrix product. Throws ShapeError on mismatch.
inline CMatrix matmul(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: " + shape_str(a) + " by " + shape_str(b));
  CMatrix c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cdouble aik = a(i, k);
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

/// Conjugate transpose.
inline CMatrix hermitian(const CMatrix& a) {
  CMatrix h(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) h(j, i) = std::conj(a(i, j));
  return h;
}

/// N x N diagonal matrix with entries exp(i*theta_n); unit modulus on the
/// diagonal, exact zeros elsewhere.
inline CMatrix diag_from_phases(const RVector& theta) {
  CMatrix d(theta.size(), theta.size());
  for (std::size_t n = 0; n < theta.size(); ++n)
    d(n, n) = std::polar(1.0, theta[n]);
  return d;
}

inline CMatrix operator+(const CMatrix& a, const CMatrix& b) {
  if (!a.same_shape(b))
    throw ShapeError("add: " + shape_str(a) + " vs " + shape_str(b));
  CMatrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

inline CMatrix operator-(const CMatrix& a, const CMatrix& b) {
  if (!a.same_shape(b))
    throw ShapeError("sub: " + shape_str(a) + " vs " + shape_str(b));
  CMatrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

inline CMatrix scaled(const CMatrix& a, cdouble s) {
  CMatrix c = a;
  for (auto& z : c.data()) z *= s;
  return c;
}

/// Sum of squared entry magnitudes; equals tr(A^H A) and the squared
/// Frobenius norm.
inline double frobenius_sq(const CMatrix& a) {
  double s = 0.0;
  for (const auto& z : a.data()) s += std::norm(z);
  return s;
}

inline double frobenius_norm(const CMatrix& a) {
  return std::sqrt(frobenius_sq(a));
}

inline double frobenius_dist(const CMatrix& a, const CMatrix& b) {
  return frobenius_norm(a - b);
}

}  // namespace risbf
