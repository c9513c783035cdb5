#pragma once

#include "mvsde/integrator.hpp"

#include <cstdint>
#include <vector>

namespace mvsde {

struct PicardOptions {
    long samples = 512;      ///< ensemble size M backing each flow iterate
    double tol = 0.0;        ///< 0 selects 1e-2 * (1 + sqrt(E|xi|^2 estimate))
    int max_iterations = 25;
    std::uint64_t seed = 42;
};

struct PicardResult {
    MeasureFlow flow;                ///< last computed iterate
    std::vector<double> residuals;   ///< sup-over-nodes W2 between consecutive iterates
    int iterations = 0;              ///< simulation sweeps performed
    bool converged = false;          ///< residual reached tol before max_iterations
    double tol_used = 0.0;
};

/// Fixed-point construction of the measure flow of
///   dZ_t = b(t, Z_t, mu_t) dt + sigma(t, Z_t, mu_t) dW_t,  mu_t = Law(Z_t).
///
/// Iterate 0 is the constant-in-time empirical law of M draws of the
/// initial condition.  Sweep n simulates M paths against the frozen
/// iterate n (fresh noise per sweep, derived from (seed, sweep); the same
/// M initial draws throughout) and takes their node measures as iterate
/// n+1.  Stops when the sup-over-nodes W2 residual falls below tol.
///
/// The residual cannot drop below the Monte Carlo resampling floor of
/// order M^{-1/2}; a tol below that floor shows up as converged=false
/// after max_iterations, which is a diagnosis, not an error.
PicardResult picard_solve(const Model& model, const InitSpec& init, const TimeGrid& grid,
                          const PicardOptions& options, Scheme scheme);

} // namespace mvsde
