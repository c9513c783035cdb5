#pragma once

#include "mvsde/integrator.hpp"

#include <optional>

namespace mvsde {

/// Tilt of one particle's noise stream inside a coupled system, used by
/// derivative probes: stream `particle` gets Delta W_k + epsilon h_k dt.
struct IpsShift {
    long particle = 0;
    std::span<const double> h; ///< flat n x m, per cell
    double epsilon = 0.0;
};

/// Interacting particle system: every particle's coefficients read the
/// empirical measure of the current ensemble state, so the whole ensemble
/// advances through one grid node at a time.  Particle p consumes noise
/// stream p of the bundle.
ParticlePaths simulate_ips(const Model& model, std::span<const double> init,
                           const NoiseBundle& noise, Scheme scheme,
                           const std::optional<IpsShift>& shift = std::nullopt);

/// Decoupled comparison ensemble: all particles read the same frozen flow
/// (a fixed-point iterate of the limit dynamics), particle p touches only
/// stream p and its own initial draw.  Identical to simulate_frozen_flow;
/// both names exist because the coupling argument treats this ensemble as
/// an object of its own.
ParticlePaths simulate_non_ips(const Model& model, const MeasureFlow& flow,
                               std::span<const double> init, const NoiseBundle& noise,
                               Scheme scheme);

/// Interacting and decoupled ensembles driven by the same bundle and the
/// same initial draws, plus the flow the decoupled side used.
struct CoupledSystems {
    ParticlePaths ips;
    ParticlePaths non_ips;
    MeasureFlow flow_used;
};

CoupledSystems simulate_coupled(const Model& model, const MeasureFlow& flow,
                                std::span<const double> init, const NoiseBundle& noise,
                                Scheme scheme);

/// Pathwise coupling gaps: per particle the sup over grid nodes of the
/// squared distance between the two ensembles, and the max over particles.
struct PocGap {
    std::vector<double> per_particle;
    double max_over_particles = 0.0;
};

PocGap poc_gap(const ParticlePaths& ips, const ParticlePaths& non_ips);

} // namespace mvsde
