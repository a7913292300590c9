#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmvdyn {

enum class ErrorKind {
    configuration,     // missing coefficient / coin / config field
    domain,            // value outside the admissible set (|alpha| >= 1, |z| >= 1, ...)
    alignment,         // windows that do not line up
    truncation,        // state support reached the edge of a fixed window
    numerical,         // solver failure or numerical pathology
    resource,          // memory or length budget exhausted
    input,             // malformed or insufficient input data
    capability,        // required data (e.g. eigenvectors) not available
    gauge_degenerate,  // CGMV phase extraction undefined
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Error carrying the largest horizon that would have fit the budget.
class ResourceError : public Error {
public:
    ResourceError(const std::string& message, long long admissible)
        : Error(ErrorKind::resource, message), admissible_(admissible) {}

    long long admissible() const noexcept { return admissible_; }

private:
    long long admissible_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace cmvdyn
