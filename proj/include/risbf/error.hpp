// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 risbf contributors

#pragma once

#include <stdexcept>
#include <string>

namespace risbf {

/// Dimension mismatch between operands (matrix shapes, vector lengths).
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numeric failure: non-finite values, failed bisection, bad step sizes.
/// The message carries the offending index / iteration where known.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid run configuration (unknown algorithm name, non-positive dims, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// File I/O failure (unwritable path, malformed dump).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace risbf
