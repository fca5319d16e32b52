#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gradhom {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidMaterial : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

/// A chiral length was requested from a material without second-gradient stiffness.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

class UnsupportedRegime : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// CG did not reach the requested tolerance; carries the relative residual per iteration.
class SolverError : public Error {
public:
    SolverError(const std::string &what, std::vector<double> history)
        : Error(what), history_(std::move(history)) {}
    const std::vector<double> &residual_history() const { return history_; }

private:
    std::vector<double> history_;
};

/// The assembled fine-scale form is not positive definite.
class CoercivityError : public Error {
public:
    CoercivityError(const std::string &what, double margin) : Error(what), margin_(margin) {}
    double margin() const { return margin_; }

private:
    double margin_;
};

} // namespace gradhom
