#pragma once

#include "mvsde/errors.hpp"
#include "mvsde/seeding.hpp"
#include "mvsde/time_grid.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mvsde {

/// Brownian increments for P particles on a grid: Delta W[p][k][l] with
/// k a cell index and l a noise component, each N(0, dt).
///
/// Particle p's increments come from an engine seeded by (seed, p) only,
/// so stream p is reproduced bit for bit no matter how many particles are
/// sampled, in what order, or on how many threads.  The same keying gives
/// common random numbers across particle counts: growing P extends the
/// bundle without touching existing streams.
class NoiseBundle {
public:
    NoiseBundle(std::uint64_t seed, TimeGrid grid, long particles, int dim_noise);

    std::uint64_t seed() const { return seed_; }
    const TimeGrid& grid() const { return grid_; }
    long particles() const { return particles_; }
    int dim_noise() const { return m_; }

    /// Increment vector of particle p over cell k (m components).
    std::span<const double> increment(long p, long k) const {
        std::size_t off = (static_cast<std::size_t>(p) * grid_.n + k) * m_;
        return {data_.data() + off, static_cast<std::size_t>(m_)};
    }

    /// All increments of particle p, row-major n x m.
    std::span<const double> stream(long p) const {
        std::size_t off = static_cast<std::size_t>(p) * grid_.n * m_;
        return {data_.data() + off, static_cast<std::size_t>(grid_.n) * m_};
    }

private:
    std::uint64_t seed_ = 0;
    TimeGrid grid_;
    long particles_ = 0;
    int m_ = 1;
    std::vector<double> data_;
};

/// Convenience spelling of the constructor.
NoiseBundle sample_noise(std::uint64_t seed, const TimeGrid& grid, long particles, int dim_noise = 1);

/// Initial-condition description.  Scalar parameters broadcast over the
/// state dimension with i.i.d. coordinates.
struct InitSpec {
    enum class Kind { Constant, Gaussian, Uniform };

    static InitSpec constant(double value) { return {Kind::Constant, value, 0.0}; }
    static InitSpec gaussian(double mean, double stddev) { return {Kind::Gaussian, mean, stddev}; }
    static InitSpec uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }

    /// E|xi|^2 of the described law (exact, not sampled).
    double second_moment(int dim) const;

    Kind kind = Kind::Constant;
    double p1 = 0.0;
    double p2 = 0.0;
};

/// Draws P initial states (flat P x d).  Particle p's draw depends only on
/// (seed, p), giving the same cross-P stability as the noise streams.
std::vector<double> sample_initial_states(const InitSpec& spec, long particles, int dim,
                                          std::uint64_t seed);

} // namespace mvsde
