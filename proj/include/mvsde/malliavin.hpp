#pragma once

#include "mvsde/particle.hpp"

#include <span>
#include <vector>

namespace mvsde {

/// Pathwise (Malliavin) derivative field of a decoupled path Z driven by a
/// frozen measure flow: values D_s Z_t in R^{d x m} for one source time s,
/// on every grid node t.  Entries with t < s are exactly zero (adaptedness:
/// a perturbation at s cannot reach the past), and the value at t = s is
/// sigma(s, Z_s, mu_s).
class MalliavinLimitField {
public:
    MalliavinLimitField() = default;
    MalliavinLimitField(TimeGrid grid, long s_index, int dim_state, int dim_noise)
        : grid_(grid), s_(s_index), d_(dim_state), m_(dim_noise),
          values_(static_cast<std::size_t>(grid.n + 1) * dim_state * dim_noise, 0.0) {}

    const TimeGrid& grid() const { return grid_; }
    long source_index() const { return s_; }
    double source_time() const { return grid_.node(s_); }
    int dim_state() const { return d_; }
    int dim_noise() const { return m_; }

    std::span<const double> value_at(long k) const {
        return {values_.data() + static_cast<std::size_t>(k) * d_ * m_,
                static_cast<std::size_t>(d_) * m_};
    }
    std::span<double> value_at_mut(long k) {
        return {values_.data() + static_cast<std::size_t>(k) * d_ * m_,
                static_cast<std::size_t>(d_) * m_};
    }

private:
    TimeGrid grid_;
    long s_ = 0;
    int d_ = 1;
    int m_ = 1;
    std::vector<double> values_;
};

/// Derivative field of the interacting ensemble with respect to one noise
/// stream j: values D^j_s X^i_t for every particle i and node t.  The
/// source block at t = s is sigma(s, X^j_s, ensemble measure) for i = j and
/// zero otherwise; interaction spreads mass to i != j only through the
/// 1/N-weighted measure-derivative sums.
class MalliavinIpsField {
public:
    MalliavinIpsField() = default;
    MalliavinIpsField(TimeGrid grid, long s_index, long source_particle, long particles,
                      int dim_state, int dim_noise)
        : grid_(grid), s_(s_index), j_(source_particle), n_particles_(particles),
          d_(dim_state), m_(dim_noise),
          values_(static_cast<std::size_t>(particles) * (grid.n + 1) * dim_state * dim_noise, 0.0) {}

    const TimeGrid& grid() const { return grid_; }
    long source_index() const { return s_; }
    double source_time() const { return grid_.node(s_); }
    long source_particle() const { return j_; }
    long particles() const { return n_particles_; }
    int dim_state() const { return d_; }
    int dim_noise() const { return m_; }

    std::span<const double> value_at(long i, long k) const {
        return {values_.data() + offset(i, k), static_cast<std::size_t>(d_) * m_};
    }
    std::span<double> value_at_mut(long i, long k) {
        return {values_.data() + offset(i, k), static_cast<std::size_t>(d_) * m_};
    }

private:
    std::size_t offset(long i, long k) const {
        return (static_cast<std::size_t>(i) * (grid_.n + 1) + k) * d_ * m_;
    }

    TimeGrid grid_;
    long s_ = 0;
    long j_ = 0;
    long n_particles_ = 0;
    int d_ = 1;
    int m_ = 1;
    std::vector<double> values_;
};

/// Equispaced source nodes for derivative fields: count indices in [0, n),
/// starting at 0.  Source times near T carry trivial fields, so the
/// sub-grid stays clear of the right endpoint.
std::vector<long> source_subgrid(const TimeGrid& grid, int count);

/// Derivative of the decoupled dynamics along its own noise: the linear
/// tangent recursion
///
///   Y_{k+1} = Y_k + Ddrift_k[Y_k] dt + sum_l grad sigma_l(t_k) Y_k dW_{k,l},
///   Y_s = sigma(s, Z_s, mu_s),
///
/// where Ddrift is the exact derivative of the scheme's drift increment
/// (plain grad b for Euler-Maruyama, the tamed quotient rule otherwise).
/// The step leaving the source carries no growth factor: the increment at
/// cell s enters the state map with coefficient sigma(s, Z_s, mu_s), so
/// the recursion starts acting one node later.  This makes the field the
/// exact derivative of the simulated map, which is what the
/// finite-difference oracle measures.
MalliavinLimitField malliavin_limit(const Model& model, const ParticlePaths& paths, long particle,
                                    const MeasureFlow& flow, long s_index, const NoiseBundle& noise);

/// Same propagation from a caller-chosen source value (the recursion is
/// linear in it; exposed for linearity checks and superposition).
MalliavinLimitField malliavin_limit_from(const Model& model, const ParticlePaths& paths, long particle,
                                         const MeasureFlow& flow, long s_index,
                                         std::span<const double> source_value,
                                         const NoiseBundle& noise);

/// Derivative of the interacting ensemble with respect to stream j: the
/// N coupled tangent recursions
///
///   Y^i_{k+1} = Y^i_k + Ddrift^i_k[ grad_x b Y^i_k + avg_p lions_b(X^p) Y^p_k ] dt
///             + sum_l ( grad_x sigma_l Y^i_k + avg_p lions_sigma_l(X^p) Y^p_k ) dW^i_{k,l},
///
/// seeded at s with sigma on particle j only.  When the model declares its
/// measure derivatives independent of the probe point, the interaction
/// averages collapse to the running mean of the tangents, O(N) per step;
/// force_pairwise_sums keeps the O(N^2) literal sums for cross-checking.
MalliavinIpsField malliavin_ips(const Model& model, const ParticlePaths& ips_paths, long s_index,
                                long source_particle, const NoiseBundle& noise,
                                bool force_pairwise_sums = false);

/// As malliavin_ips but seeded with caller-chosen per-particle values.
MalliavinIpsField malliavin_ips_from(const Model& model, const ParticlePaths& ips_paths, long s_index,
                                     long source_particle, std::span<const double> source_values,
                                     const NoiseBundle& noise, bool force_pairwise_sums = false);

/// Grid quadrature of the pairing between a derivative field family and a
/// cell-wise direction h (flat n x m):
///
///   t  |->  sum_k D_{s_k} X_t h(s_k) dt   (sum over the fields' sources),
///
/// returned as a flat (n+1) x d path.  Every cell where h is nonzero must
/// be covered by exactly one field; the t = s_k boundary value is excluded
/// from the quadrature (the discrete map's derivative there is zero).
std::vector<double> directional_derivative(std::span<const MalliavinLimitField> fields,
                                           std::span<const double> h);

/// Same pairing for one particle of an interacting-ensemble family (all
/// fields must share the source particle j).
std::vector<double> directional_derivative(std::span<const MalliavinIpsField> fields, long particle,
                                           std::span<const double> h);

/// Central-difference Wiener shift on a decoupled path: re-simulates with
/// increments Delta W_k +- epsilon h_k dt and returns
/// (X^{+eps} - X^{-eps}) / (2 epsilon) as a flat (n+1) x d path.  This is
/// the derivative of the very map the simulator runs, so it doubles as an
/// independent oracle for directional_derivative.
std::vector<double> finite_difference_oracle(const Model& model, const MeasureFlow& flow,
                                             std::span<const double> x0, const NoiseBundle& noise,
                                             long particle, Scheme scheme, std::span<const double> h,
                                             double epsilon = 1e-4);

/// Central difference for the interacting ensemble when stream j is
/// tilted; returns difference paths for all particles, flat N x (n+1) x d.
std::vector<double> finite_difference_oracle_ips(const Model& model, std::span<const double> init,
                                                 const NoiseBundle& noise, Scheme scheme, long j,
                                                 std::span<const double> h, double epsilon = 1e-4);

/// Central difference for the decoupled ensemble when stream j is tilted.
/// Particles i != j never read stream j, so their difference paths are
/// exactly zero; returned flat N x (n+1) x d for the nullity check.
std::vector<double> finite_difference_oracle_non_ips(const Model& model, const MeasureFlow& flow,
                                                     std::span<const double> init,
                                                     const NoiseBundle& noise, Scheme scheme, long j,
                                                     std::span<const double> h, double epsilon = 1e-4);

} // namespace mvsde
