#pragma once

#include <stdexcept>
#include <string>

namespace distlab {

/// Rejected input: a precondition on caller-supplied data failed.
/// The CLI maps this to exit code 2 (usage/input error).
class InvalidInput : public std::runtime_error {
public:
    explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

/// Internal solver defect: infeasibility or non-convergence that valid
/// inputs should never produce. Carries residual diagnostics in the message.
class SolverFailure : public std::runtime_error {
public:
    explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace distlab
