#pragma once

#include <stdexcept>
#include <string>

namespace bsp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (datasets, labelings, checkpoints).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An output space larger than the enumeration budget allows.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, undefined estimates, failed numeric properties.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace bsp
