#pragma once

#include "mvsde/errors.hpp"
#include "mvsde/time_grid.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mvsde {

/// Uniformly weighted empirical measure (1/N) sum of Dirac atoms in R^d.
/// The mean and the mean squared norm are cached at construction so that
/// coefficient evaluators reading only low moments stay O(1) per call.
class EmpiricalMeasure {
public:
    EmpiricalMeasure() = default;

    /// Takes atoms as a flat row-major array: atom i occupies
    /// points[i*d .. i*d+d).  All coordinates must be finite.
    EmpiricalMeasure(std::vector<double> points, int dim);

    long size() const { return n_; }
    int dim() const { return d_; }

    std::span<const double> atom(long i) const {
        return {points_.data() + static_cast<std::size_t>(i) * d_, static_cast<std::size_t>(d_)};
    }
    std::span<const double> atoms_flat() const { return points_; }

    /// Barycenter, cached.
    std::span<const double> mean() const { return mean_; }
    /// Mean of |x|^2 over atoms, cached.
    double second_moment() const { return second_moment_; }

private:
    std::vector<double> points_;
    std::vector<double> mean_;
    double second_moment_ = 0.0;
    long n_ = 0;
    int d_ = 0;
};

/// Mean of the identity map under mu (same as mu.mean(), shaped as a vector).
std::vector<double> first_moment(const EmpiricalMeasure& mu);

/// Mean of |x|^2 under mu.
double second_moment(const EmpiricalMeasure& mu);

enum class W2Method { SortedPairing, ExactAssignment, Sliced };

struct W2Result {
    double value = 0.0;
    W2Method method = W2Method::SortedPairing;
};

/// 2-Wasserstein distance between two equally sized empirical measures.
/// d = 1 uses the exact sorted pairing; 1 < d with N <= 512 solves the
/// optimal assignment on the squared-distance cost matrix; larger N falls
/// back to a sliced estimate with `sliced_projections` random directions
/// drawn from a sub-seed, scaled by sqrt(d) to be exact for translations.
W2Result wasserstein2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                      int sliced_projections = 64,
                      std::uint64_t sliced_seed = 0x5f2c3a9e1b7d4680ULL);

/// Root mean squared distance of the in-order pairing (x_i, y_i).
/// Upper bound for wasserstein2 on the two empirical measures; the bound
/// is what couplings of particle systems are measured against.
double empirical_w2_upper_bound(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Exact assignment route, exposed for cross-checks against the sorted
/// pairing and for small multi-dimensional instances.  O(N^3) worst case.
double wasserstein2_assignment(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Sorted-pairing route, d = 1 only.
double wasserstein2_sorted_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Sliced estimate: sqrt(d * average over directions of squared 1-d W2).
double wasserstein2_sliced(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                           int projections, std::uint64_t seed);

/// Piecewise-constant-in-time family of empirical measures on a grid:
/// one measure per node, lookups take the left endpoint of the cell.
class MeasureFlow {
public:
    MeasureFlow() = default;
    MeasureFlow(TimeGrid grid, std::vector<EmpiricalMeasure> nodes);

    /// Flow frozen at a single measure (the zeroth iterate of the
    /// measure-flow fixed point: the law of the initial condition).
    static MeasureFlow constant(TimeGrid grid, EmpiricalMeasure mu);

    const TimeGrid& grid() const { return grid_; }
    /// Measure at node k (piecewise-constant left-endpoint convention:
    /// this is the value used on the whole cell [t_k, t_{k+1})).
    const EmpiricalMeasure& at(long k) const { return nodes_.at(static_cast<std::size_t>(k)); }
    long node_count() const { return static_cast<long>(nodes_.size()); }

private:
    TimeGrid grid_;
    std::vector<EmpiricalMeasure> nodes_;
};

} // namespace mvsde
