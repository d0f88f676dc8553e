#pragma once

#include <stdexcept>
#include <string>

namespace dynet {

/// λ + μ = 0, or p ∈ {0,1} where a rate conversion would divide by zero.
class DegenerateParameters : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A simulation would exceed the configured node-count cap.
class ResourceLimitExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical routine failed (singular pivot, non-convergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dynet
