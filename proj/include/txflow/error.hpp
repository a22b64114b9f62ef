#pragma once

#include <stdexcept>
#include <string>

namespace txflow {

/// Malformed or inconsistent input data (bad records, unknown addresses,
/// duplicate labels). Maps to exit status 1 in the CLI.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed to reach its tolerance. Maps to exit status 3.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace txflow
