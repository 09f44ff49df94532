#pragma once

#include <stdexcept>
#include <string>

namespace examweight {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (dimensions, ranges, tolerances).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// An iterative method hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed, out of range or incomplete.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace examweight
