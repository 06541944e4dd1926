#pragma once

#include <stdexcept>
#include <string>

namespace propwing {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int { success = 0, validation = 2, convergence = 3, io = 4 };

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept = 0;
};

/// Input violates a documented precondition or type invariant.
class ValidationError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::validation; }
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, int line)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Least-squares lift fit could not produce a usable model.
class FitError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Iterative method stopped without meeting its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const noexcept { return residual_; }
    ExitCode exit_code() const noexcept override { return ExitCode::convergence; }

private:
    double residual_;
};

/// Linear system could not be solved (rank deficient collocation matrix).
class SolverError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::convergence; }
};

class IoError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::io; }
};

}  // namespace propwing
