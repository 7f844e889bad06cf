#pragma once

#include <stdexcept>

namespace detmart {

// Raised when an iterative or quadrature routine fails to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a requested exact enumeration exceeds its size cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace detmart
