#pragma once

#include <stdexcept>
#include <string>

namespace qduhamel {

/// Invalid configuration or problem specification (bad q, mismatched
/// dimensions, malformed config file). CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation outside an operator's domain (e.g. a q-derivative at x = 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Non-finite value encountered mid-computation (overflow, NaN forcing).
/// CLI maps this to exit code 3.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Series evaluation requested outside its radius of convergence.
class RadiusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested target is not reachable from the start point on the q-lattice.
class LatticeAlignmentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Singular implicit step (I - t(1-q)A): the operator has an eigenvalue at
/// 1/(t(1-q)). Carries the lattice point and that eigenvalue estimate.
class PoleError : public std::runtime_error {
public:
    PoleError(double t, double eigenvalue_estimate)
        : std::runtime_error("singular implicit step at lattice point t = " +
                             std::to_string(t) + " (eigenvalue estimate " +
                             std::to_string(eigenvalue_estimate) + ")"),
          t_(t),
          eigenvalue_estimate_(eigenvalue_estimate) {}

    double t() const { return t_; }
    double eigenvalue_estimate() const { return eigenvalue_estimate_; }

private:
    double t_;
    double eigenvalue_estimate_;
};

} // namespace qduhamel
