#include "mvsde/measure.hpp"

#include "mvsde/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace mvsde {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> points, int dim)
    : points_(std::move(points)), d_(dim) {
    if (d_ <= 0) throw InvalidInputError("EmpiricalMeasure: dimension must be positive");
    if (points_.empty() || points_.size() % static_cast<std::size_t>(d_) != 0)
        throw InvalidInputError("EmpiricalMeasure: atom array size must be a positive multiple of the dimension");
    n_ = static_cast<long>(points_.size() / static_cast<std::size_t>(d_));

    mean_.assign(static_cast<std::size_t>(d_), 0.0);
    second_moment_ = 0.0;
    for (long i = 0; i < n_; ++i) {
        const double* x = points_.data() + static_cast<std::size_t>(i) * d_;
        for (int c = 0; c < d_; ++c) {
            if (!std::isfinite(x[c]))
                throw InvalidInputError("EmpiricalMeasure: atom " + std::to_string(i) + " has a non-finite coordinate");
            mean_[static_cast<std::size_t>(c)] += x[c];
            second_moment_ += x[c] * x[c];
        }
    }
    for (int c = 0; c < d_; ++c) mean_[static_cast<std::size_t>(c)] /= static_cast<double>(n_);
    second_moment_ /= static_cast<double>(n_);
}

std::vector<double> first_moment(const EmpiricalMeasure& mu) {
    return {mu.mean().begin(), mu.mean().end()};
}

double second_moment(const EmpiricalMeasure& mu) { return mu.second_moment(); }

namespace {

void require_compatible(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (mu.dim() != nu.dim())
        throw InvalidInputError("wasserstein2: measures have different dimensions");
    if (mu.size() != nu.size())
        throw InvalidInputError("wasserstein2: only equal-size empirical measures are supported");
    if (mu.size() == 0) throw InvalidInputError("wasserstein2: empty measure");
}

double sorted_pairing_squared(std::vector<double>& a, std::vector<double>& b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc / static_cast<double>(a.size());
}

/// Minimum-cost perfect matching on an n x n cost matrix by shortest
/// augmenting paths with dual potentials.  Returns the total cost.
double assignment_cost(const std::vector<double>& cost, long n) {
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based columns; p[j] = row matched to column j, p[0] = row being inserted.
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<long> p(static_cast<std::size_t>(n) + 1, 0);
    std::vector<long> way(static_cast<std::size_t>(n) + 1, 0);

    for (long i = 1; i <= n; ++i) {
        p[0] = i;
        long j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            long i0 = p[static_cast<std::size_t>(j0)];
            long j1 = -1;
            double delta = inf;
            for (long j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                double cur = cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)]
                             - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (long j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            long j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    double total = 0.0;
    for (long j = 1; j <= n; ++j)
        total += cost[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1) * n + (j - 1)];
    return total;
}

} // namespace

double wasserstein2_sorted_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    require_compatible(mu, nu);
    if (mu.dim() != 1)
        throw InvalidInputError("wasserstein2_sorted_1d: requires dimension 1");
    std::vector<double> a(mu.atoms_flat().begin(), mu.atoms_flat().end());
    std::vector<double> b(nu.atoms_flat().begin(), nu.atoms_flat().end());
    return std::sqrt(sorted_pairing_squared(a, b));
}

double wasserstein2_assignment(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    require_compatible(mu, nu);
    const long n = mu.size();
    const int d = mu.dim();
    std::vector<double> cost(static_cast<std::size_t>(n) * n);
    for (long i = 0; i < n; ++i) {
        auto x = mu.atom(i);
        for (long j = 0; j < n; ++j) {
            auto y = nu.atom(j);
            double sq = 0.0;
            for (int c = 0; c < d; ++c) {
                double diff = x[static_cast<std::size_t>(c)] - y[static_cast<std::size_t>(c)];
                sq += diff * diff;
            }
            cost[static_cast<std::size_t>(i) * n + j] = sq;
        }
    }
    double total = assignment_cost(cost, n);
    return std::sqrt(std::max(total, 0.0) / static_cast<double>(n));
}

double wasserstein2_sliced(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                           int projections, std::uint64_t seed) {
    require_compatible(mu, nu);
    if (projections <= 0) throw InvalidInputError("wasserstein2_sliced: projections must be positive");
    const long n = mu.size();
    const int d = mu.dim();

    std::mt19937_64 engine(derive_seed(seed, StreamPurpose::Projection, 0));
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<double> dir(static_cast<std::size_t>(d));
    std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (int rep = 0; rep < projections; ++rep) {
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (int c = 0; c < d; ++c) {
                dir[static_cast<std::size_t>(c)] = normal(engine);
                norm2 += dir[static_cast<std::size_t>(c)] * dir[static_cast<std::size_t>(c)];
            }
        } while (norm2 < 1e-12);
        double inv = 1.0 / std::sqrt(norm2);
        for (int c = 0; c < d; ++c) dir[static_cast<std::size_t>(c)] *= inv;

        for (long i = 0; i < n; ++i) {
            auto x = mu.atom(i);
            auto y = nu.atom(i);
            double px = 0.0, py = 0.0;
            for (int c = 0; c < d; ++c) {
                px += dir[static_cast<std::size_t>(c)] * x[static_cast<std::size_t>(c)];
                py += dir[static_cast<std::size_t>(c)] * y[static_cast<std::size_t>(c)];
            }
            a[static_cast<std::size_t>(i)] = px;
            b[static_cast<std::size_t>(i)] = py;
        }
        acc += sorted_pairing_squared(a, b);
    }
    // The sqrt(d) factor makes the estimate exact for rigid translations.
    return std::sqrt(static_cast<double>(d) * acc / static_cast<double>(projections));
}

W2Result wasserstein2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                      int sliced_projections, std::uint64_t sliced_seed) {
    require_compatible(mu, nu);
    if (mu.dim() == 1) return {wasserstein2_sorted_1d(mu, nu), W2Method::SortedPairing};
    if (mu.size() <= 512) return {wasserstein2_assignment(mu, nu), W2Method::ExactAssignment};
    return {wasserstein2_sliced(mu, nu, sliced_projections, sliced_seed), W2Method::Sliced};
}

double empirical_w2_upper_bound(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    require_compatible(mu, nu);
    const long n = mu.size();
    const int d = mu.dim();
    auto x = mu.atoms_flat();
    auto y = nu.atoms_flat();
    double acc = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * d; ++i) {
        double diff = x[i] - y[i];
        acc += diff * diff;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

MeasureFlow::MeasureFlow(TimeGrid grid, std::vector<EmpiricalMeasure> nodes)
    : grid_(grid), nodes_(std::move(nodes)) {
    if (static_cast<long>(nodes_.size()) != grid_.n + 1)
        throw InvalidInputError("MeasureFlow: need exactly one measure per grid node");
    for (std::size_t k = 1; k < nodes_.size(); ++k) {
        if (nodes_[k].dim() != nodes_[0].dim())
            throw InvalidInputError("MeasureFlow: all node measures must share one dimension");
    }
}

MeasureFlow MeasureFlow::constant(TimeGrid grid, EmpiricalMeasure mu) {
    std::vector<EmpiricalMeasure> nodes(static_cast<std::size_t>(grid.n + 1), mu);
    return MeasureFlow(grid, std::move(nodes));
}

} // namespace mvsde
