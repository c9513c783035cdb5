#pragma once

#include <stdexcept>
#include <string>

namespace mvsde {

/// Raised when an argument violates a documented precondition
/// (dimension mismatch, non-positive step count, unknown model name, ...).
class InvalidInputError : public std::invalid_argument {
public:
    explicit InvalidInputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a simulated state stops being finite.  Carries enough
/// context (time, particle, step) to reproduce the blow-up.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double t, long particle, long step)
        : std::runtime_error(what), time(t), particle(particle), step(step) {}

    double time = 0.0;
    long particle = -1;
    long step = -1;
};

} // namespace mvsde
