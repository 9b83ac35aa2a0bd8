#pragma once

#include <stdexcept>
#include <string>

namespace imrom {

// Base class for all library errors. The CLI maps the subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or missing input (files, headers, config keys).
class ParseError : public Error {
public:
    using Error::Error;
};

// Structurally invalid model: asymmetric M/K, indefinite mass, non-classical damping.
class ModelError : public Error {
public:
    using Error::Error;
};

// Eigenvalue problem failure, or a linear system judged singular.
class SolveError : public Error {
public:
    using Error::Error;
};

// A monomial resonates with a mode that is not a master.
class OuterResonanceError : public Error {
public:
    OuterResonanceError(const std::string& what, int mode)
        : Error(what), mode_(mode) {}
    int mode() const { return mode_; }

private:
    int mode_;
};

// A requested option combination that is not supported (e.g. forced CNF).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

// Newton or continuation failed to converge after all step reductions.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Time integration left the admissible region (blow-up or step-size underflow).
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double time)
        : Error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

}  // namespace imrom
