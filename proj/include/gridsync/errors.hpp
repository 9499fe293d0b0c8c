#pragma once

#include <stdexcept>
#include <string>

namespace gridsync {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Graph fails the algebraic connectivity test (lambda2 below tolerance).
class DisconnectedGraph : public Error {
public:
    using Error::Error;
};

/// Boundary node set is empty, out of range, or covers all nodes.
class InvalidBoundary : public Error {
public:
    using Error::Error;
};

/// Scalar parameter outside its admissible range.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// A factorization or eigensolve broke down.
class NumericalFailure : public Error {
public:
    explicit NumericalFailure(const std::string& msg, double condition_estimate = 0.0)
        : Error(msg), condition_estimate(condition_estimate) {}
    double condition_estimate;
};

/// Eigenvalue expected to be positive is not.
class DegenerateSpectrum : public Error {
public:
    using Error::Error;
};

/// Net power injection vector does not sum to zero.
class UnbalancedInjection : public Error {
public:
    using Error::Error;
};

/// Newton iteration on the synchronized-state equations did not converge.
class NoSynchronizedState : public Error {
public:
    using Error::Error;
};

/// Newton iteration on the load power-balance equations failed.
class AlgebraicSolveFailure : public Error {
public:
    explicit AlgebraicSolveFailure(const std::string& msg, double time = 0.0)
        : Error(msg), time(time) {}
    double time;
};

/// Malformed input text. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg, int line = 0) : Error(msg), line(line) {}
    int line;
};

/// Branch record with nonpositive reactance or bad endpoints.
class InvalidBranch : public Error {
public:
    using Error::Error;
};

}  // namespace gridsync
