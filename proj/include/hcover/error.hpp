#pragma once

#include <stdexcept>
#include <string>

namespace hcover {

/// Requested size exceeds what an operation supports (dimension caps, oracle state limits).
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside its admissible range (probabilities, vertex labels, budgets).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A closed form evaluated outside its domain of validity (e.g. p <= 1/2 in the cover-time formula).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Iterative numerical routine failed to converge.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Walk started on, or stepped onto, a vertex without retained edges.
class WalkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hcover
