#pragma once

#include <stdexcept>
#include <string>

namespace sgdgp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: malformed files, bad configuration, inconsistent shapes.
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure broke down (non-PD matrix, divergence, NaN iterates).
class NumericalError : public Error {
public:
    using Error::Error;
};

class CholeskyError : public NumericalError {
public:
    CholeskyError(const std::string& what, double smallest_pivot)
        : NumericalError(what), smallest_pivot_(smallest_pivot) {}

    double smallest_pivot() const { return smallest_pivot_; }

private:
    double smallest_pivot_;
};

class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, long step) : NumericalError(what), step_(step) {}

    long step() const { return step_; }

private:
    long step_;
};

}  // namespace sgdgp
