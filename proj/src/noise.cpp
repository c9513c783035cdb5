#include "mvsde/noise.hpp"

#include "mvsde/parallel.hpp"

#include <cmath>
#include <random>

namespace mvsde {

NoiseBundle::NoiseBundle(std::uint64_t seed, TimeGrid grid, long particles, int dim_noise)
    : seed_(seed), grid_(grid), particles_(particles), m_(dim_noise) {
    if (particles <= 0) throw InvalidInputError("NoiseBundle: particle count must be positive");
    if (dim_noise <= 0) throw InvalidInputError("NoiseBundle: noise dimension must be positive");

    const std::size_t per_particle = static_cast<std::size_t>(grid_.n) * m_;
    data_.resize(static_cast<std::size_t>(particles_) * per_particle);
    const double scale = std::sqrt(grid_.dt);

    parallel_for(static_cast<std::size_t>(particles_), [&](std::size_t p) {
        std::mt19937_64 engine(derive_seed(seed_, StreamPurpose::Noise, p));
        std::normal_distribution<double> normal(0.0, 1.0);
        double* out = data_.data() + p * per_particle;
        for (std::size_t k = 0; k < per_particle; ++k) out[k] = scale * normal(engine);
    });
}

NoiseBundle sample_noise(std::uint64_t seed, const TimeGrid& grid, long particles, int dim_noise) {
    return NoiseBundle(seed, grid, particles, dim_noise);
}

double InitSpec::second_moment(int dim) const {
    double per_coord = 0.0;
    switch (kind) {
        case Kind::Constant: per_coord = p1 * p1; break;
        case Kind::Gaussian: per_coord = p1 * p1 + p2 * p2; break;
        case Kind::Uniform: per_coord = (p1 * p1 + p1 * p2 + p2 * p2) / 3.0; break;
    }
    return per_coord * static_cast<double>(dim);
}

std::vector<double> sample_initial_states(const InitSpec& spec, long particles, int dim,
                                          std::uint64_t seed) {
    if (particles <= 0) throw InvalidInputError("sample_initial_states: particle count must be positive");
    if (dim <= 0) throw InvalidInputError("sample_initial_states: dimension must be positive");
    if (spec.kind == InitSpec::Kind::Gaussian && spec.p2 < 0.0)
        throw InvalidInputError("sample_initial_states: negative standard deviation");
    if (spec.kind == InitSpec::Kind::Uniform && spec.p2 < spec.p1)
        throw InvalidInputError("sample_initial_states: uniform bounds out of order");

    std::vector<double> out(static_cast<std::size_t>(particles) * dim);
    parallel_for(static_cast<std::size_t>(particles), [&](std::size_t p) {
        std::mt19937_64 engine(derive_seed(seed, StreamPurpose::InitialState, p));
        double* x = out.data() + p * static_cast<std::size_t>(dim);
        switch (spec.kind) {
            case InitSpec::Kind::Constant:
                for (int c = 0; c < dim; ++c) x[c] = spec.p1;
                break;
            case InitSpec::Kind::Gaussian: {
                std::normal_distribution<double> normal(spec.p1, spec.p2);
                for (int c = 0; c < dim; ++c) x[c] = spec.p2 == 0.0 ? spec.p1 : normal(engine);
                break;
            }
            case InitSpec::Kind::Uniform: {
                std::uniform_real_distribution<double> unif(spec.p1, spec.p2);
                for (int c = 0; c < dim; ++c) x[c] = unif(engine);
                break;
            }
        }
    });
    return out;
}

} // namespace mvsde
