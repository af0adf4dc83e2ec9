#pragma once

#include <stdexcept>
#include <string>

namespace vrpca {

/// Caller broke a documented precondition (shape mismatch, out-of-range parameter).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterate lost rank: the Gram matrix of W' is (numerically) singular.
class DegenerateIterate : public std::runtime_error {
 public:
  DegenerateIterate(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// Malformed dataset or configuration input. `offset` is a line number for text
/// formats and a byte offset for binary ones.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Generic numerical failure that is not a contract violation (e.g. zero data).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vrpca
