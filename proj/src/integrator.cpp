#include "mvsde/integrator.hpp"

#include "mvsde/parallel.hpp"
#include "step_detail.hpp"

#include <cmath>
#include <string>

namespace mvsde {

std::string scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::EulerMaruyama: return "euler";
        case Scheme::TamedEulerMaruyama: return "tamed";
    }
    return "euler";
}

Scheme parse_scheme(const std::string& name) {
    if (name == "euler") return Scheme::EulerMaruyama;
    if (name == "tamed") return Scheme::TamedEulerMaruyama;
    if (name == "auto") throw InvalidInputError("parse_scheme: 'auto' must be resolved against a model");
    throw InvalidInputError("unknown scheme '" + name + "'; valid schemes: euler tamed auto");
}

Scheme default_scheme(const Model& model) {
    return model.regularity == Regularity::OneSidedLipschitz ? Scheme::TamedEulerMaruyama
                                                             : Scheme::EulerMaruyama;
}

namespace detail {

/// The state is advanced first, then checked for finiteness.
void step_inplace(const Model& model, Scheme scheme, double t, std::span<double> x,
                  const EmpiricalMeasure& mu, double dt, std::span<const double> dW,
                  std::span<double> b, std::span<double> sig,
                  long particle, long step_index) {
    const int d = model.dim_state;
    const int m = model.dim_noise;

    model.drift(t, x, mu, b);
    model.diffusion(t, x, mu, sig);

    double drift_scale = dt;
    if (scheme == Scheme::TamedEulerMaruyama) {
        double norm2 = 0.0;
        for (int i = 0; i < d; ++i) norm2 += b[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
        drift_scale = dt / (1.0 + dt * std::sqrt(norm2));
    }

    for (int i = 0; i < d; ++i) {
        double acc = x[static_cast<std::size_t>(i)] + drift_scale * b[static_cast<std::size_t>(i)];
        const double* row = sig.data() + static_cast<std::size_t>(i) * m;
        for (int l = 0; l < m; ++l) acc += row[l] * dW[static_cast<std::size_t>(l)];
        x[static_cast<std::size_t>(i)] = acc;
    }

    for (int i = 0; i < d; ++i) {
        if (!std::isfinite(x[static_cast<std::size_t>(i)])) {
            throw DivergenceError("state diverged at t=" + std::to_string(t + dt) + " (particle "
                                      + std::to_string(particle) + ", step " + std::to_string(step_index) + ")",
                                  t + dt, particle, step_index);
        }
    }
}

} // namespace detail

std::vector<double> step(const Model& model, Scheme scheme, double t, std::span<const double> x,
                         const EmpiricalMeasure& mu, double dt, std::span<const double> dW) {
    if (static_cast<int>(x.size()) != model.dim_state)
        throw InvalidInputError("step: state dimension mismatch");
    if (static_cast<int>(dW.size()) != model.dim_noise)
        throw InvalidInputError("step: increment dimension mismatch");
    if (mu.dim() != model.dim_state)
        throw InvalidInputError("step: measure dimension mismatch");
    if (!(dt > 0.0)) throw InvalidInputError("step: dt must be positive");

    std::vector<double> out(x.begin(), x.end());
    std::vector<double> b(static_cast<std::size_t>(model.dim_state));
    std::vector<double> sig(static_cast<std::size_t>(model.dim_state * model.dim_noise));
    detail::step_inplace(model, scheme, t, out, mu, dt, dW, b, sig, -1, -1);
    return out;
}

std::vector<double> simulate_frozen_path(const Model& model, const MeasureFlow& flow,
                                         std::span<const double> x0, const NoiseBundle& noise,
                                         long particle, Scheme scheme,
                                         const std::optional<WienerShift>& shift) {
    const TimeGrid& grid = flow.grid();
    if (!grid.same_as(noise.grid()))
        throw InvalidInputError("simulate_frozen_path: flow and noise grids differ");
    if (static_cast<int>(x0.size()) != model.dim_state)
        throw InvalidInputError("simulate_frozen_path: initial state dimension mismatch");
    if (noise.dim_noise() != model.dim_noise)
        throw InvalidInputError("simulate_frozen_path: noise dimension mismatch");
    if (particle < 0 || particle >= noise.particles())
        throw InvalidInputError("simulate_frozen_path: particle index out of range");
    if (shift && static_cast<long>(shift->h.size()) != grid.n * model.dim_noise)
        throw InvalidInputError("simulate_frozen_path: shift direction must have one value per cell and component");

    const int d = model.dim_state;
    const int m = model.dim_noise;
    std::vector<double> path(static_cast<std::size_t>(grid.n + 1) * d);
    std::copy(x0.begin(), x0.end(), path.begin());

    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> b(static_cast<std::size_t>(d));
    std::vector<double> sig(static_cast<std::size_t>(d) * m);
    std::vector<double> dw(static_cast<std::size_t>(m));

    for (long k = 0; k < grid.n; ++k) {
        auto base = noise.increment(particle, k);
        for (int l = 0; l < m; ++l) {
            dw[static_cast<std::size_t>(l)] = base[static_cast<std::size_t>(l)];
            if (shift)
                dw[static_cast<std::size_t>(l)] +=
                    shift->epsilon * shift->h[static_cast<std::size_t>(k) * m + l] * grid.dt;
        }
        detail::step_inplace(model, scheme, grid.node(k), x, flow.at(k), grid.dt, dw, b, sig, particle, k);
        std::copy(x.begin(), x.end(), path.begin() + static_cast<std::size_t>(k + 1) * d);
    }
    return path;
}

ParticlePaths simulate_frozen_flow(const Model& model, const MeasureFlow& flow,
                                   std::span<const double> init, const NoiseBundle& noise,
                                   Scheme scheme) {
    const TimeGrid& grid = flow.grid();
    const long P = noise.particles();
    if (static_cast<long>(init.size()) != P * model.dim_state)
        throw InvalidInputError("simulate_frozen_flow: init must be P x d for the bundle's particle count");
    if (flow.at(0).dim() != model.dim_state)
        throw InvalidInputError("simulate_frozen_flow: flow dimension mismatch");

    ParticlePaths paths(grid, P, model.dim_state, scheme);
    const int d = model.dim_state;
    parallel_for(static_cast<std::size_t>(P), [&](std::size_t p) {
        std::span<const double> x0{init.data() + p * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
        std::vector<double> one = simulate_frozen_path(model, flow, x0, noise, static_cast<long>(p), scheme);
        std::copy(one.begin(), one.end(), paths.path_mut(static_cast<long>(p)).begin());
    });
    return paths;
}

MeasureFlow flow_from_paths(const ParticlePaths& paths) {
    const TimeGrid& grid = paths.grid();
    const long P = paths.particles();
    const int d = paths.dim();
    std::vector<EmpiricalMeasure> nodes;
    nodes.reserve(static_cast<std::size_t>(grid.n + 1));
    for (long k = 0; k <= grid.n; ++k) {
        std::vector<double> pts(static_cast<std::size_t>(P) * d);
        for (long p = 0; p < P; ++p) {
            auto s = paths.state(p, k);
            std::copy(s.begin(), s.end(), pts.begin() + static_cast<std::size_t>(p) * d);
        }
        nodes.emplace_back(std::move(pts), d);
    }
    return MeasureFlow(grid, std::move(nodes));
}

} // namespace mvsde
