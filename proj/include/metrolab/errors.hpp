#pragma once

#include <stdexcept>
#include <string>

namespace metrolab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition (non-Hermitian input, bad dims, ...).
struct ContractViolation : Error {
  using Error::Error;
};

struct DegenerateEncodingError : Error {
  using Error::Error;
};

struct FlatSignalError : Error {
  using Error::Error;
};

// Integrator or finite-difference self-check failed.
struct AccuracyError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace metrolab
