#pragma once

#include <stdexcept>
#include <string>

namespace robinwg {

// Input that violates an operation's precondition (bad geometry, bad counts).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Base for failures of a numerical procedure on valid input.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The dispersion function has no sign change in the expected bracket.
class BracketError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Two transversal modes live on strips of different width.
class WidthMismatchError : public ContractError {
public:
    using ContractError::ContractError;
};

// Trial energy sits on a pole of the axial stiffness l*tanh(l a) / l*coth(l a).
class PoleError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Null vector requested from a matrix that is not (numerically) singular.
class NotAtRootError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class QuadratureError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Sparse factorization or eigen-iteration failure; message carries residuals.
class SolverError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace robinwg
