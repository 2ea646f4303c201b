#pragma once

#include <stdexcept>
#include <string>

namespace sphdist {

/// Raised when a caller breaks a documented precondition.
struct ContractViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An integrand produced NaN or Inf.
struct NonFiniteIntegrand : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Arc-length calibration found no sign change of L(p) - target in the bracket.
struct NoBracket : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CalibrationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or schema-invalid configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ContractViolation(what);
}

}  // namespace sphdist
