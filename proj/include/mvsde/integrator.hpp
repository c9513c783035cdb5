#pragma once

#include "mvsde/measure.hpp"
#include "mvsde/model.hpp"
#include "mvsde/noise.hpp"
#include "mvsde/paths.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mvsde {

std::string scheme_name(Scheme scheme);
Scheme parse_scheme(const std::string& name);

/// Taming keeps one-sided-Lipschitz drifts stable, so it is the default
/// there; plain Euler-Maruyama otherwise.  An explicit scheme choice is
/// honored either way (running the plain scheme on a stiff drift is how
/// divergence detection gets exercised).
Scheme default_scheme(const Model& model);

/// One update of state x over [t, t+dt] with increment dW (m components):
///   EulerMaruyama:       x + b dt + sigma dW
///   TamedEulerMaruyama:  x + b dt / (1 + dt |b|) + sigma dW
/// Throws DivergenceError if the result is not finite.
std::vector<double> step(const Model& model, Scheme scheme, double t, std::span<const double> x,
                         const EmpiricalMeasure& mu, double dt, std::span<const double> dW);

/// Deterministic drift perturbation of one particle's increments:
/// Delta W_k -> Delta W_k + epsilon * h_k * dt, with h given per cell
/// (flat n x m).  This is the probe direction of the finite-difference
/// derivative checks.
struct WienerShift {
    std::span<const double> h;
    double epsilon = 0.0;
};

/// Simulates P decoupled particles against a frozen measure flow; the
/// coefficients read the flow, never the particle ensemble, so particle p
/// touches only stream p and particles can run fully in parallel.
ParticlePaths simulate_frozen_flow(const Model& model, const MeasureFlow& flow,
                                   std::span<const double> init, const NoiseBundle& noise,
                                   Scheme scheme);

/// Single-particle version; `particle` selects the noise stream and the
/// optional shift tilts that stream.  Returns the path flat (n+1) x d.
std::vector<double> simulate_frozen_path(const Model& model, const MeasureFlow& flow,
                                         std::span<const double> x0, const NoiseBundle& noise,
                                         long particle, Scheme scheme,
                                         const std::optional<WienerShift>& shift = std::nullopt);

/// Empirical measures of the particle states at every node, as a flow.
MeasureFlow flow_from_paths(const ParticlePaths& paths);

} // namespace mvsde
