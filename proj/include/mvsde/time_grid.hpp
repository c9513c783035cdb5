#pragma once

#include "mvsde/errors.hpp"

namespace mvsde {

/// Uniform grid 0 = t_0 < t_1 < ... < t_n = T with dt = T / n.
/// Nodes are indexed 0..n; increments (cells) are indexed 0..n-1, cell k
/// covering [t_k, t_{k+1}).
struct TimeGrid {
    TimeGrid() = default;

    TimeGrid(double horizon, long steps) : T(horizon), n(steps) {
        if (!(horizon > 0.0)) throw InvalidInputError("TimeGrid: horizon T must be positive");
        if (steps <= 0) throw InvalidInputError("TimeGrid: steps must be positive");
        dt = T / static_cast<double>(n);
    }

    double node(long k) const { return static_cast<double>(k) * dt; }

    bool same_as(const TimeGrid& other) const {
        return n == other.n && T == other.T;
    }

    double T = 1.0;
    long n = 1;
    double dt = 1.0;
};

} // namespace mvsde
