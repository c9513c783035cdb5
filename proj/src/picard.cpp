#include "mvsde/picard.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace mvsde {

PicardResult picard_solve(const Model& model, const InitSpec& init, const TimeGrid& grid,
                          const PicardOptions& options, Scheme scheme) {
    if (options.samples <= 0) throw InvalidInputError("picard_solve: samples must be positive");
    if (options.max_iterations <= 0) throw InvalidInputError("picard_solve: max_iterations must be positive");
    if (options.tol < 0.0) throw InvalidInputError("picard_solve: tol must be nonnegative");

    const long M = options.samples;
    const int d = model.dim_state;

    std::vector<double> xi = sample_initial_states(init, M, d, options.seed);
    MeasureFlow current = MeasureFlow::constant(grid, EmpiricalMeasure(xi, d));

    PicardResult result;
    result.tol_used = options.tol > 0.0
                          ? options.tol
                          : 1e-2 * (1.0 + std::sqrt(current.at(0).second_moment()));

    for (int sweep = 0; sweep < options.max_iterations; ++sweep) {
        NoiseBundle noise(derive_seed(options.seed, StreamPurpose::PicardIteration,
                                      static_cast<std::uint64_t>(sweep)),
                          grid, M, model.dim_noise);
        ParticlePaths paths = simulate_frozen_flow(model, current, xi, noise, scheme);
        MeasureFlow next = flow_from_paths(paths);

        double residual = 0.0;
        for (long k = 0; k <= grid.n; ++k)
            residual = std::max(residual, wasserstein2(current.at(k), next.at(k)).value);

        result.residuals.push_back(residual);
        result.iterations = sweep + 1;
        current = std::move(next);

        if (residual <= result.tol_used) {
            result.converged = true;
            break;
        }
    }

    result.flow = std::move(current);
    return result;
}

} // namespace mvsde
