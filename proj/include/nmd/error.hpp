#pragma once

#include <stdexcept>
#include <string>

namespace nmd {

// Invalid argument to a numerical routine (x <= 0 for a Bessel function,
// sigma <= 0, |beta| >= alpha, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A diagonal entry of B outside (0, 1), or a K eigenvalue <= 0.
class NonStationaryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Singular or non-positive-definite matrix encountered.
class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (CSV schema, missing months, ...).
// Also used for missing upstream artifacts in the CLI workflow.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An upstream artifact required by a CLI command does not exist.
class MissingArtifactError : public DataError {
public:
    using DataError::DataError;
};

// Invalid run configuration (unknown keys, out-of-range values).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Optimizer failed to converge after all restarts.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nmd
