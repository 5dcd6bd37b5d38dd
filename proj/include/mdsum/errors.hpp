#pragma once

#include <stdexcept>
#include <string>

namespace mdsum {

// Caller broke a documented precondition (dimension mismatch, id out of
// range, bad argument). These indicate bugs, not bad input data.
class ContractViolation : public std::logic_error {
  public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Malformed or inconsistent input data (corpus files, summaries).
class DataError : public std::runtime_error {
  public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration: missing directories, bad keys, incompatible
// checkpoint.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure surfaced to the caller; never patched silently.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class SingularMatrixError : public NumericalError {
  public:
    explicit SingularMatrixError(const std::string& what) : NumericalError(what) {}
};

// A metric was requested on input for which it is undefined.
class MetricError : public std::runtime_error {
  public:
    explicit MetricError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mdsum
