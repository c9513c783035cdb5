#include "mvsde/particle.hpp"

#include "step_detail.hpp"

#include <algorithm>
#include <cmath>

namespace mvsde {

ParticlePaths simulate_ips(const Model& model, std::span<const double> init,
                           const NoiseBundle& noise, Scheme scheme,
                           const std::optional<IpsShift>& shift) {
    const TimeGrid& grid = noise.grid();
    const long N = noise.particles();
    const int d = model.dim_state;
    const int m = model.dim_noise;
    if (static_cast<long>(init.size()) != N * d)
        throw InvalidInputError("simulate_ips: init must be N x d for the bundle's particle count");
    if (noise.dim_noise() != m)
        throw InvalidInputError("simulate_ips: noise dimension mismatch");
    if (shift) {
        if (shift->particle < 0 || shift->particle >= N)
            throw InvalidInputError("simulate_ips: shifted particle out of range");
        if (static_cast<long>(shift->h.size()) != grid.n * m)
            throw InvalidInputError("simulate_ips: shift direction must have one value per cell and component");
    }

    ParticlePaths paths(grid, N, d, scheme);
    std::vector<double> states(init.begin(), init.end());
    for (long p = 0; p < N; ++p)
        std::copy(init.begin() + p * d, init.begin() + (p + 1) * d, paths.state_mut(p, 0).begin());

    std::vector<double> b(static_cast<std::size_t>(d));
    std::vector<double> sig(static_cast<std::size_t>(d) * m);
    std::vector<double> dw(static_cast<std::size_t>(m));

    for (long k = 0; k < grid.n; ++k) {
        // The ensemble measure is frozen at the node before anyone moves.
        EmpiricalMeasure mu(states, d);
        const double t = grid.node(k);
        for (long p = 0; p < N; ++p) {
            std::span<double> x{states.data() + static_cast<std::size_t>(p) * d, static_cast<std::size_t>(d)};
            auto base = noise.increment(p, k);
            if (shift && p == shift->particle) {
                for (int l = 0; l < m; ++l)
                    dw[static_cast<std::size_t>(l)] = base[static_cast<std::size_t>(l)]
                        + shift->epsilon * shift->h[static_cast<std::size_t>(k) * m + l] * grid.dt;
                detail::step_inplace(model, scheme, t, x, mu, grid.dt, dw, b, sig, p, k);
            } else {
                detail::step_inplace(model, scheme, t, x, mu, grid.dt, base, b, sig, p, k);
            }
            std::copy(x.begin(), x.end(), paths.state_mut(p, k + 1).begin());
        }
    }
    return paths;
}

ParticlePaths simulate_non_ips(const Model& model, const MeasureFlow& flow,
                               std::span<const double> init, const NoiseBundle& noise,
                               Scheme scheme) {
    return simulate_frozen_flow(model, flow, init, noise, scheme);
}

CoupledSystems simulate_coupled(const Model& model, const MeasureFlow& flow,
                                std::span<const double> init, const NoiseBundle& noise,
                                Scheme scheme) {
    CoupledSystems out{simulate_ips(model, init, noise, scheme),
                       simulate_non_ips(model, flow, init, noise, scheme), flow};
    return out;
}

PocGap poc_gap(const ParticlePaths& ips, const ParticlePaths& non_ips) {
    if (!ips.grid().same_as(non_ips.grid()) || ips.particles() != non_ips.particles()
        || ips.dim() != non_ips.dim())
        throw InvalidInputError("poc_gap: ensembles have different shapes");

    const long N = ips.particles();
    const long n = ips.grid().n;
    const int d = ips.dim();

    PocGap gap;
    gap.per_particle.assign(static_cast<std::size_t>(N), 0.0);
    for (long p = 0; p < N; ++p) {
        double worst = 0.0;
        for (long k = 0; k <= n; ++k) {
            auto x = ips.state(p, k);
            auto z = non_ips.state(p, k);
            double sq = 0.0;
            for (int c = 0; c < d; ++c) {
                double diff = x[static_cast<std::size_t>(c)] - z[static_cast<std::size_t>(c)];
                sq += diff * diff;
            }
            worst = std::max(worst, sq);
        }
        gap.per_particle[static_cast<std::size_t>(p)] = worst;
        gap.max_over_particles = std::max(gap.max_over_particles, worst);
    }
    return gap;
}

} // namespace mvsde
