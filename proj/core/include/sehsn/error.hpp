#pragma once

#include <stdexcept>
#include <string>

namespace sehsn {

// Base of every error the library throws on purpose. The CLI maps the
// concrete subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or arguments (CLI exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data, I/O failures (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

// Tensor or parameter shapes that do not line up (exit code 2).
class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

// NaN/Inf, divergence, failed numerical checks (exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] void throw_data_error(const std::string& where, const std::string& what);

}  // namespace sehsn
