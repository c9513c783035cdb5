#include "mvsde/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace mvsde {

namespace {

/// Tangent of the scheme's drift increment, applied to a d x m block U:
///   Euler-Maruyama:  U
///   tamed:           U / (1 + dt|b|) - dt b (b^T U) / (|b| (1 + dt|b|)^2)
/// (the exact derivative of b dt / (1 + dt|b|); in scalar form
/// U / (1 + dt|b|)^2).  Multiplying by dt afterwards gives the increment.
void apply_drift_tangent(Scheme scheme, std::span<const double> b, double dt, int d, int m,
                         std::span<double> U) {
    if (scheme == Scheme::EulerMaruyama) return;

    double norm2 = 0.0;
    for (int i = 0; i < d; ++i) norm2 += b[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
    double norm = std::sqrt(norm2);
    double denom = 1.0 + dt * norm;
    double lead = 1.0 / denom;

    if (norm < 1e-300) {
        for (int i = 0; i < d * m; ++i) U[static_cast<std::size_t>(i)] *= lead;
        return;
    }

    double corr = dt / (norm * denom * denom);
    for (int l = 0; l < m; ++l) {
        double btu = 0.0;
        for (int i = 0; i < d; ++i)
            btu += b[static_cast<std::size_t>(i)] * U[static_cast<std::size_t>(i) * m + l];
        for (int i = 0; i < d; ++i) {
            std::size_t idx = static_cast<std::size_t>(i) * m + l;
            U[idx] = U[idx] * lead - corr * b[static_cast<std::size_t>(i)] * btu;
        }
    }
}

/// out += A (d x d) times Y (d x m).
void add_mat_block(std::span<const double> A, std::span<const double> Y, int d, int m,
                   std::span<double> out) {
    for (int i = 0; i < d; ++i) {
        for (int l = 0; l < m; ++l) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j)
                acc += A[static_cast<std::size_t>(i) * d + j] * Y[static_cast<std::size_t>(j) * m + l];
            out[static_cast<std::size_t>(i) * m + l] += acc;
        }
    }
}

void require_source_index(const TimeGrid& grid, long s_index, const char* where) {
    if (s_index < 0 || s_index > grid.n)
        throw InvalidInputError(std::string(where) + ": source index out of range");
}

std::vector<double> ensemble_points(const ParticlePaths& paths, long k) {
    const long N = paths.particles();
    const int d = paths.dim();
    std::vector<double> pts(static_cast<std::size_t>(N) * d);
    for (long p = 0; p < N; ++p) {
        auto s = paths.state(p, k);
        std::copy(s.begin(), s.end(), pts.begin() + static_cast<std::size_t>(p) * d);
    }
    return pts;
}

} // namespace

std::vector<long> source_subgrid(const TimeGrid& grid, int count) {
    if (count <= 0) throw InvalidInputError("source_subgrid: count must be positive");
    if (count > grid.n) throw InvalidInputError("source_subgrid: more source nodes than grid cells");
    std::vector<long> nodes(static_cast<std::size_t>(count));
    for (int q = 0; q < count; ++q)
        nodes[static_cast<std::size_t>(q)] = (grid.n * q) / count;
    return nodes;
}

MalliavinLimitField malliavin_limit_from(const Model& model, const ParticlePaths& paths, long particle,
                                         const MeasureFlow& flow, long s_index,
                                         std::span<const double> source_value,
                                         const NoiseBundle& noise) {
    const TimeGrid& grid = paths.grid();
    require_source_index(grid, s_index, "malliavin_limit");
    if (!grid.same_as(flow.grid()) || !grid.same_as(noise.grid()))
        throw InvalidInputError("malliavin_limit: paths, flow and noise grids differ");
    if (particle < 0 || particle >= paths.particles() || particle >= noise.particles())
        throw InvalidInputError("malliavin_limit: particle index out of range");
    if (paths.dim() != model.dim_state || noise.dim_noise() != model.dim_noise)
        throw InvalidInputError("malliavin_limit: model dimensions do not match the inputs");

    const int d = model.dim_state;
    const int m = model.dim_noise;
    if (static_cast<int>(source_value.size()) != d * m)
        throw InvalidInputError("malliavin_limit: source value must be d x m");

    const Scheme scheme = paths.scheme();
    MalliavinLimitField field(grid, s_index, d, m);
    std::copy(source_value.begin(), source_value.end(), field.value_at_mut(s_index).begin());
    if (s_index == grid.n) return field;

    // The perturbed increment enters the state with the source coefficient;
    // growth starts on the following step.
    std::copy(source_value.begin(), source_value.end(), field.value_at_mut(s_index + 1).begin());

    std::vector<double> b(static_cast<std::size_t>(d));
    std::vector<double> grad_b(static_cast<std::size_t>(d) * d);
    std::vector<double> grad_sig(static_cast<std::size_t>(m) * d * d);
    std::vector<double> U(static_cast<std::size_t>(d) * m);
    std::vector<double> V(static_cast<std::size_t>(d) * m);

    for (long k = s_index + 1; k < grid.n; ++k) {
        const double t = grid.node(k);
        auto x = paths.state(particle, k);
        const EmpiricalMeasure& mu = flow.at(k);
        auto cur = field.value_at(k);
        auto next = field.value_at_mut(k + 1);

        model.grad_x_drift(t, x, mu, grad_b);
        model.grad_x_diffusion(t, x, mu, grad_sig);
        if (scheme == Scheme::TamedEulerMaruyama) model.drift(t, x, mu, b);

        std::fill(U.begin(), U.end(), 0.0);
        add_mat_block(grad_b, cur, d, m, U);
        apply_drift_tangent(scheme, b, grid.dt, d, m, U);

        auto dW = noise.increment(particle, k);
        for (int i = 0; i < d * m; ++i)
            next[static_cast<std::size_t>(i)] = cur[static_cast<std::size_t>(i)]
                                                + grid.dt * U[static_cast<std::size_t>(i)];
        for (int l = 0; l < m; ++l) {
            std::fill(V.begin(), V.end(), 0.0);
            std::span<const double> gsl{grad_sig.data() + static_cast<std::size_t>(l) * d * d,
                                        static_cast<std::size_t>(d) * d};
            add_mat_block(gsl, cur, d, m, V);
            for (int i = 0; i < d * m; ++i)
                next[static_cast<std::size_t>(i)] += V[static_cast<std::size_t>(i)] * dW[static_cast<std::size_t>(l)];
        }
    }
    return field;
}

MalliavinLimitField malliavin_limit(const Model& model, const ParticlePaths& paths, long particle,
                                    const MeasureFlow& flow, long s_index, const NoiseBundle& noise) {
    require_source_index(paths.grid(), s_index, "malliavin_limit");
    const int d = model.dim_state;
    const int m = model.dim_noise;
    std::vector<double> sig(static_cast<std::size_t>(d) * m);
    model.diffusion(paths.grid().node(s_index), paths.state(particle, s_index), flow.at(s_index), sig);
    return malliavin_limit_from(model, paths, particle, flow, s_index, sig, noise);
}

MalliavinIpsField malliavin_ips_from(const Model& model, const ParticlePaths& ips_paths, long s_index,
                                     long source_particle, std::span<const double> source_values,
                                     const NoiseBundle& noise, bool force_pairwise_sums) {
    const TimeGrid& grid = ips_paths.grid();
    require_source_index(grid, s_index, "malliavin_ips");
    if (!grid.same_as(noise.grid()))
        throw InvalidInputError("malliavin_ips: paths and noise grids differ");
    const long N = ips_paths.particles();
    if (noise.particles() != N)
        throw InvalidInputError("malliavin_ips: noise bundle and ensemble sizes differ");
    if (source_particle < 0 || source_particle >= N)
        throw InvalidInputError("malliavin_ips: source particle out of range");
    if (ips_paths.dim() != model.dim_state || noise.dim_noise() != model.dim_noise)
        throw InvalidInputError("malliavin_ips: model dimensions do not match the inputs");

    const int d = model.dim_state;
    const int m = model.dim_noise;
    const int dm = d * m;
    if (static_cast<long>(source_values.size()) != N * dm)
        throw InvalidInputError("malliavin_ips: source values must be N x d x m");

    const Scheme scheme = ips_paths.scheme();
    const bool fast = model.lions_constant_in_v && !force_pairwise_sums;

    MalliavinIpsField field(grid, s_index, source_particle, N, d, m);
    for (long i = 0; i < N; ++i) {
        auto src = source_values.subspan(static_cast<std::size_t>(i) * dm, static_cast<std::size_t>(dm));
        std::copy(src.begin(), src.end(), field.value_at_mut(i, s_index).begin());
        if (s_index < grid.n)
            std::copy(src.begin(), src.end(), field.value_at_mut(i, s_index + 1).begin());
    }
    if (s_index >= grid.n) return field;

    std::vector<double> b(static_cast<std::size_t>(d));
    std::vector<double> grad_b(static_cast<std::size_t>(d) * d);
    std::vector<double> grad_sig(static_cast<std::size_t>(m) * d * d);
    std::vector<double> lions_b(static_cast<std::size_t>(d) * d);
    std::vector<double> lions_sig(static_cast<std::size_t>(m) * d * d);
    std::vector<double> U(static_cast<std::size_t>(dm));
    std::vector<double> V(static_cast<std::size_t>(dm));
    std::vector<double> mean_tangent(static_cast<std::size_t>(dm));
    std::vector<double> interaction_b(static_cast<std::size_t>(dm));
    std::vector<double> interaction_sig(static_cast<std::size_t>(m) * dm);

    for (long k = s_index + 1; k < grid.n; ++k) {
        const double t = grid.node(k);
        EmpiricalMeasure mu(ensemble_points(ips_paths, k), d);

        if (fast) {
            std::fill(mean_tangent.begin(), mean_tangent.end(), 0.0);
            for (long p = 0; p < N; ++p) {
                auto y = field.value_at(p, k);
                for (int c = 0; c < dm; ++c)
                    mean_tangent[static_cast<std::size_t>(c)] += y[static_cast<std::size_t>(c)];
            }
            for (int c = 0; c < dm; ++c)
                mean_tangent[static_cast<std::size_t>(c)] /= static_cast<double>(N);
        }

        for (long i = 0; i < N; ++i) {
            auto x = ips_paths.state(i, k);
            auto cur = field.value_at(i, k);
            auto next = field.value_at_mut(i, k + 1);

            model.grad_x_drift(t, x, mu, grad_b);
            model.grad_x_diffusion(t, x, mu, grad_sig);
            if (scheme == Scheme::TamedEulerMaruyama) model.drift(t, x, mu, b);

            // Interaction averages: (1/N) sum_p lions(x, mu)(X^p) Y^p.
            std::fill(interaction_b.begin(), interaction_b.end(), 0.0);
            std::fill(interaction_sig.begin(), interaction_sig.end(), 0.0);
            if (fast) {
                model.lions_drift(t, x, mu, x, lions_b);
                model.lions_diffusion(t, x, mu, x, lions_sig);
                add_mat_block(lions_b, mean_tangent, d, m, interaction_b);
                for (int l = 0; l < m; ++l) {
                    std::span<const double> Ll{lions_sig.data() + static_cast<std::size_t>(l) * d * d,
                                               static_cast<std::size_t>(d) * d};
                    std::span<double> out{interaction_sig.data() + static_cast<std::size_t>(l) * dm,
                                          static_cast<std::size_t>(dm)};
                    add_mat_block(Ll, mean_tangent, d, m, out);
                }
            } else {
                for (long p = 0; p < N; ++p) {
                    auto xp = ips_paths.state(p, k);
                    auto yp = field.value_at(p, k);
                    model.lions_drift(t, x, mu, xp, lions_b);
                    model.lions_diffusion(t, x, mu, xp, lions_sig);
                    add_mat_block(lions_b, yp, d, m, interaction_b);
                    for (int l = 0; l < m; ++l) {
                        std::span<const double> Ll{lions_sig.data() + static_cast<std::size_t>(l) * d * d,
                                                   static_cast<std::size_t>(d) * d};
                        std::span<double> out{interaction_sig.data() + static_cast<std::size_t>(l) * dm,
                                              static_cast<std::size_t>(dm)};
                        add_mat_block(Ll, yp, d, m, out);
                    }
                }
                double inv = 1.0 / static_cast<double>(N);
                for (double& vv : interaction_b) vv *= inv;
                for (double& vv : interaction_sig) vv *= inv;
            }

            std::copy(interaction_b.begin(), interaction_b.end(), U.begin());
            add_mat_block(grad_b, cur, d, m, U);
            apply_drift_tangent(scheme, b, grid.dt, d, m, U);

            auto dW = noise.increment(i, k);
            for (int c = 0; c < dm; ++c)
                next[static_cast<std::size_t>(c)] = cur[static_cast<std::size_t>(c)]
                                                    + grid.dt * U[static_cast<std::size_t>(c)];
            for (int l = 0; l < m; ++l) {
                std::copy(interaction_sig.begin() + static_cast<std::size_t>(l) * dm,
                          interaction_sig.begin() + static_cast<std::size_t>(l + 1) * dm, V.begin());
                std::span<const double> gsl{grad_sig.data() + static_cast<std::size_t>(l) * d * d,
                                            static_cast<std::size_t>(d) * d};
                add_mat_block(gsl, cur, d, m, V);
                for (int c = 0; c < dm; ++c)
                    next[static_cast<std::size_t>(c)] += V[static_cast<std::size_t>(c)] * dW[static_cast<std::size_t>(l)];
            }
        }
    }
    return field;
}

MalliavinIpsField malliavin_ips(const Model& model, const ParticlePaths& ips_paths, long s_index,
                                long source_particle, const NoiseBundle& noise,
                                bool force_pairwise_sums) {
    const TimeGrid& grid = ips_paths.grid();
    require_source_index(grid, s_index, "malliavin_ips");
    const long N = ips_paths.particles();
    const int d = model.dim_state;
    const int m = model.dim_noise;
    if (source_particle < 0 || source_particle >= N)
        throw InvalidInputError("malliavin_ips: source particle out of range");

    std::vector<double> source(static_cast<std::size_t>(N) * d * m, 0.0);
    EmpiricalMeasure mu(ensemble_points(ips_paths, s_index), d);
    std::span<double> sig{source.data() + static_cast<std::size_t>(source_particle) * d * m,
                          static_cast<std::size_t>(d) * m};
    model.diffusion(grid.node(s_index), ips_paths.state(source_particle, s_index), mu, sig);
    return malliavin_ips_from(model, ips_paths, s_index, source_particle, source, noise,
                              force_pairwise_sums);
}

namespace {

template <class FieldT>
void check_family(std::span<const FieldT> fields, std::span<const double> h, const TimeGrid*& grid,
                  int& d, int& m) {
    if (fields.empty()) throw InvalidInputError("directional_derivative: empty field family");
    grid = &fields[0].grid();
    d = fields[0].dim_state();
    m = fields[0].dim_noise();
    if (static_cast<long>(h.size()) != grid->n * m)
        throw InvalidInputError("directional_derivative: direction must have one value per cell and component");

    std::vector<char> covered(static_cast<std::size_t>(grid->n), 0);
    for (const auto& f : fields) {
        if (!f.grid().same_as(*grid) || f.dim_state() != d || f.dim_noise() != m)
            throw InvalidInputError("directional_derivative: fields disagree on grid or dimensions");
        long s = f.source_index();
        if (s >= grid->n) continue;
        if (covered[static_cast<std::size_t>(s)])
            throw InvalidInputError("directional_derivative: two fields share source cell " + std::to_string(s));
        covered[static_cast<std::size_t>(s)] = 1;
    }
    for (long c = 0; c < grid->n; ++c) {
        bool nonzero = false;
        for (int l = 0; l < m; ++l)
            if (h[static_cast<std::size_t>(c) * m + l] != 0.0) nonzero = true;
        if (nonzero && !covered[static_cast<std::size_t>(c)])
            throw InvalidInputError("directional_derivative: direction is nonzero on cell "
                                    + std::to_string(c) + " but no field has that source");
    }
}

} // namespace

std::vector<double> directional_derivative(std::span<const MalliavinLimitField> fields,
                                           std::span<const double> h) {
    const TimeGrid* grid = nullptr;
    int d = 0, m = 0;
    check_family(fields, h, grid, d, m);

    std::vector<double> out(static_cast<std::size_t>(grid->n + 1) * d, 0.0);
    for (const auto& f : fields) {
        long s = f.source_index();
        if (s >= grid->n) continue;
        for (long k = s + 1; k <= grid->n; ++k) {
            auto D = f.value_at(k);
            for (int i = 0; i < d; ++i) {
                double acc = 0.0;
                for (int l = 0; l < m; ++l)
                    acc += D[static_cast<std::size_t>(i) * m + l] * h[static_cast<std::size_t>(s) * m + l];
                out[static_cast<std::size_t>(k) * d + i] += acc * grid->dt;
            }
        }
    }
    return out;
}

std::vector<double> directional_derivative(std::span<const MalliavinIpsField> fields, long particle,
                                           std::span<const double> h) {
    const TimeGrid* grid = nullptr;
    int d = 0, m = 0;
    check_family(fields, h, grid, d, m);
    for (const auto& f : fields) {
        if (f.source_particle() != fields[0].source_particle())
            throw InvalidInputError("directional_derivative: fields disagree on the source particle");
        if (particle < 0 || particle >= f.particles())
            throw InvalidInputError("directional_derivative: particle index out of range");
    }

    std::vector<double> out(static_cast<std::size_t>(grid->n + 1) * d, 0.0);
    for (const auto& f : fields) {
        long s = f.source_index();
        if (s >= grid->n) continue;
        for (long k = s + 1; k <= grid->n; ++k) {
            auto D = f.value_at(particle, k);
            for (int i = 0; i < d; ++i) {
                double acc = 0.0;
                for (int l = 0; l < m; ++l)
                    acc += D[static_cast<std::size_t>(i) * m + l] * h[static_cast<std::size_t>(s) * m + l];
                out[static_cast<std::size_t>(k) * d + i] += acc * grid->dt;
            }
        }
    }
    return out;
}

std::vector<double> finite_difference_oracle(const Model& model, const MeasureFlow& flow,
                                             std::span<const double> x0, const NoiseBundle& noise,
                                             long particle, Scheme scheme, std::span<const double> h,
                                             double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidInputError("finite_difference_oracle: epsilon must be positive");
    WienerShift plus{h, epsilon};
    WienerShift minus{h, -epsilon};
    std::vector<double> up = simulate_frozen_path(model, flow, x0, noise, particle, scheme, plus);
    std::vector<double> dn = simulate_frozen_path(model, flow, x0, noise, particle, scheme, minus);
    std::vector<double> out(up.size());
    const double inv = 1.0 / (2.0 * epsilon);
    for (std::size_t i = 0; i < up.size(); ++i) out[i] = (up[i] - dn[i]) * inv;
    return out;
}

std::vector<double> finite_difference_oracle_ips(const Model& model, std::span<const double> init,
                                                 const NoiseBundle& noise, Scheme scheme, long j,
                                                 std::span<const double> h, double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidInputError("finite_difference_oracle_ips: epsilon must be positive");
    ParticlePaths up = simulate_ips(model, init, noise, scheme, IpsShift{j, h, epsilon});
    ParticlePaths dn = simulate_ips(model, init, noise, scheme, IpsShift{j, h, -epsilon});
    const long N = up.particles();
    std::vector<double> out(static_cast<std::size_t>(N) * (up.grid().n + 1) * up.dim());
    const double inv = 1.0 / (2.0 * epsilon);
    std::size_t idx = 0;
    for (long p = 0; p < N; ++p) {
        auto a = up.path(p);
        auto b = dn.path(p);
        for (std::size_t i = 0; i < a.size(); ++i) out[idx++] = (a[i] - b[i]) * inv;
    }
    return out;
}

std::vector<double> finite_difference_oracle_non_ips(const Model& model, const MeasureFlow& flow,
                                                     std::span<const double> init,
                                                     const NoiseBundle& noise, Scheme scheme, long j,
                                                     std::span<const double> h, double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidInputError("finite_difference_oracle_non_ips: epsilon must be positive");
    const long N = noise.particles();
    const int d = model.dim_state;
    if (j < 0 || j >= N) throw InvalidInputError("finite_difference_oracle_non_ips: stream index out of range");
    if (static_cast<long>(init.size()) != N * d)
        throw InvalidInputError("finite_difference_oracle_non_ips: init must be N x d");

    const long rows = flow.grid().n + 1;
    std::vector<double> out(static_cast<std::size_t>(N) * rows * d);
    const double inv = 1.0 / (2.0 * epsilon);
    for (long p = 0; p < N; ++p) {
        std::span<const double> x0{init.data() + static_cast<std::size_t>(p) * d, static_cast<std::size_t>(d)};
        std::optional<WienerShift> plus, minus;
        if (p == j) {
            plus = WienerShift{h, epsilon};
            minus = WienerShift{h, -epsilon};
        }
        std::vector<double> a = simulate_frozen_path(model, flow, x0, noise, p, scheme, plus);
        std::vector<double> b = simulate_frozen_path(model, flow, x0, noise, p, scheme, minus);
        for (long r = 0; r < rows * d; ++r)
            out[static_cast<std::size_t>(p) * rows * d + r] =
                (a[static_cast<std::size_t>(r)] - b[static_cast<std::size_t>(r)]) * inv;
    }
    return out;
}

} // namespace mvsde
