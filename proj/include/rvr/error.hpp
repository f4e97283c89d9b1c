// Exception types shared by the engine.
#pragma once

#include <stdexcept>
#include <string>

namespace rvr {

/// Bad or inconsistent input data (CSV rows, price series invariants).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameter values.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical solve failed to meet its postcondition.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rvr
