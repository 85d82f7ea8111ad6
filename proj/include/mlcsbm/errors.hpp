#pragma once

#include <stdexcept>
#include <string>

namespace mlcsbm {

// Invalid parameters or inputs; the CLI maps these to exit code 1.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Divergence, infeasibility, factorization failure; exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Work caps on enumeration; exit code 3.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mlcsbm
