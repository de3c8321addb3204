// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace srif {

/// Raised when a mode-moment system is singular (some mode is exactly pure).
/// Callers that can tolerate a regularized answer should add a thermal floor
/// to the state and retry; the solvers never regularize silently.
class SingularMomentError : public std::runtime_error {
 public:
  explicit SingularMomentError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Raised when a quadrature result fails its node-doubling convergence check.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Raised when operand dimensions are inconsistent.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Raised when a closed-form coefficient representation degenerates
/// (e.g. cot/csc poles at zero phase separation).
class CoefficientSingularity : public std::domain_error {
 public:
  explicit CoefficientSingularity(const std::string& what)
      : std::domain_error(what) {}
};

}  // namespace srif
