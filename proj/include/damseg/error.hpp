#pragma once

#include <stdexcept>
#include <string>

namespace damseg {

// Base of everything the library throws. The CLI maps IoError to exit code 1
// with the offending path and every other Error to exit code 1 as well, while
// argument problems are reported by the parser with exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument value (even-sided kernel, threshold out of range, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Two rasters or masks that must agree in shape do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Malformed or out-of-contract file content (PNG values, manifest lines).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A filesystem or subprocess failure; message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

// Violation of a dataset-level contract (duplicate tile ids, synthetic data
// touching the test split, generator output missing).
class ContractError : public Error {
 public:
  using Error::Error;
};

inline std::string shape_string(int width, int height) {
  return std::to_string(width) + "x" + std::to_string(height);
}

}  // namespace damseg
