#pragma once

#include "mvsde/errors.hpp"
#include "mvsde/time_grid.hpp"

#include <span>
#include <vector>

namespace mvsde {

enum class Scheme { EulerMaruyama, TamedEulerMaruyama };

/// States of P particles at every grid node, flat [p][node][coordinate].
/// Remembers the scheme that produced it so derivative propagation can
/// differentiate exactly the map that was simulated.
class ParticlePaths {
public:
    ParticlePaths() = default;
    ParticlePaths(TimeGrid grid, long particles, int dim, Scheme scheme)
        : grid_(grid), particles_(particles), d_(dim), scheme_(scheme),
          data_(static_cast<std::size_t>(particles) * (grid.n + 1) * dim, 0.0) {
        if (particles <= 0) throw InvalidInputError("ParticlePaths: particle count must be positive");
        if (dim <= 0) throw InvalidInputError("ParticlePaths: dimension must be positive");
    }

    const TimeGrid& grid() const { return grid_; }
    long particles() const { return particles_; }
    int dim() const { return d_; }
    Scheme scheme() const { return scheme_; }

    std::span<const double> state(long p, long k) const {
        return {data_.data() + offset(p, k), static_cast<std::size_t>(d_)};
    }
    std::span<double> state_mut(long p, long k) {
        return {data_.data() + offset(p, k), static_cast<std::size_t>(d_)};
    }

    /// Full path of one particle, row-major (n+1) x d.
    std::span<const double> path(long p) const {
        return {data_.data() + offset(p, 0), static_cast<std::size_t>(grid_.n + 1) * d_};
    }
    std::span<double> path_mut(long p) {
        return {data_.data() + offset(p, 0), static_cast<std::size_t>(grid_.n + 1) * d_};
    }

private:
    std::size_t offset(long p, long k) const {
        return (static_cast<std::size_t>(p) * (grid_.n + 1) + k) * d_;
    }

    TimeGrid grid_;
    long particles_ = 0;
    int d_ = 1;
    Scheme scheme_ = Scheme::EulerMaruyama;
    std::vector<double> data_;
};

} // namespace mvsde
