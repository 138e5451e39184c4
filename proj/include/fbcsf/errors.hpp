#pragma once
#include <stdexcept>
#include <string>

namespace fbcsf {

// Point lies outside the chart or a parameter is out of range.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& m) : std::runtime_error(m) {}
};

// Metric degeneracy, lost convexity, degenerate tangents and the like.
struct GeometryError : std::runtime_error {
    explicit GeometryError(const std::string& m) : std::runtime_error(m) {}
};

// Solver non-convergence, step underflow, tolerance failures.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& m) : std::runtime_error(m) {}
};

// Sample density too low for the requested quantity.
struct ResolutionError : std::runtime_error {
    explicit ResolutionError(const std::string& m) : std::runtime_error(m) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace fbcsf
