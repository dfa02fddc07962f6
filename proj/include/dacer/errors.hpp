#pragma once

#include <stdexcept>
#include <string>

namespace dacer {

// Common base so callers can catch everything this library throws in one arm.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Tensor/net shape disagreement.
struct DimensionError : Error {
    explicit DimensionError(const std::string& what) : Error(what) {}
};

// Bad user-supplied configuration value (CLI flag, config key, constructor arg).
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// An API precondition was violated by the caller (empty batch, index out of
// range, stale tape handle, ...).
struct ContractError : Error {
    explicit ContractError(const std::string& what) : Error(what) {}
};

// Non-finite value where a finite one is required (NaN gradient, diverging
// chain, non-positive-definite covariance, ...).
struct NumericFault : Error {
    explicit NumericFault(const std::string& what) : Error(what) {}
};

// Checkpoint or data file could not be loaded / does not match expectations.
struct LoadError : Error {
    explicit LoadError(const std::string& what) : Error(what) {}
};

// Environment misuse or internal environment failure.
struct EnvFault : Error {
    explicit EnvFault(const std::string& what) : Error(what) {}
};

} // namespace dacer
