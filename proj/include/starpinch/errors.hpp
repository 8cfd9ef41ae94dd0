#pragma once

#include <stdexcept>
#include <string>

namespace starpinch {

// Each error class maps to one CLI exit code.

/// A geometric hypothesis does not hold (not starshaped, H_{r+1} <= 0,
/// point outside the model chart, ...). Exit code 1.
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 1;
};

/// Optimizer non-convergence, degenerate sampling, violated identities. Exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 2;
};

/// Malformed or inconsistent configuration. Exit code 3.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 3;
};

} // namespace starpinch
