#pragma once

#include <stdexcept>
#include <string>

namespace robustlr {

/// A matrix that must be invertible (or a pivot that must be nonzero) is
/// singular within tolerance.
class singular_matrix_error : public std::runtime_error {
 public:
  explicit singular_matrix_error(const std::string& what) : std::runtime_error(what) {}
};

/// Parameters fall outside the regime in which the requested construction or
/// estimator guarantee is defined.
class regime_error : public std::runtime_error {
 public:
  explicit regime_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace robustlr
