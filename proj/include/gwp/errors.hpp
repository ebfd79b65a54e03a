#pragma once

#include <stdexcept>
#include <string>

namespace gwp {

// Bad argument or precondition violation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Floating-point or convergence failure.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Kernel coefficients requested at a focal point.
struct FocalSingularity : DomainError {
    using DomainError::DomainError;
};

struct ConstraintError : DomainError {
    using DomainError::DomainError;
};

struct DegenerateGeometry : DomainError {
    using DomainError::DomainError;
};

// Target linewidth that no branch of the two-pulse solver can reach.
struct InfeasibleTarget : DomainError {
    double A0, B0, tan_omega_T, n_o_sq;
    InfeasibleTarget(const std::string& msg, double a0, double b0, double tn, double no2)
        : DomainError(msg), A0(a0), B0(b0), tan_omega_T(tn), n_o_sq(no2) {}
};

struct NoSolution : NumericError {
    using NumericError::NumericError;
};

struct TruncationError : NumericError {
    int suggested_size;
    TruncationError(const std::string& msg, int n) : NumericError(msg), suggested_size(n) {}
};

struct StepSizeError : NumericError {
    using NumericError::NumericError;
};

struct DomainEscape : NumericError {
    using NumericError::NumericError;
};

// A parameter combination at which a formula diverges (zero detuning, ...).
struct SingularParameter : DomainError {
    using DomainError::DomainError;
};

// Inputs outside the validity domain of an approximate model.
struct ModelDomainError : DomainError {
    using DomainError::DomainError;
};

}  // namespace gwp
