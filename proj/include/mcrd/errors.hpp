#pragma once

#include <stdexcept>
#include <string>

namespace mcrd {

/// Invalid input: rejected parameters, malformed configuration, mismatched grids.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure did not produce a usable answer
/// (singular Jacobian, iteration budget exhausted, NaN in a time step, ...).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A checked structural property (conservation, positivity, ...) failed.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mcrd
