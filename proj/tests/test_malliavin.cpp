#include <doctest.h>

#include "mvsde/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace mvsde;

namespace {

struct LimitSetup {
    Model model;
    TimeGrid grid;
    MeasureFlow flow;
    std::vector<double> init;
    NoiseBundle noise;
    ParticlePaths paths;

    LimitSetup(Model m, double T, long steps, long particles, std::uint64_t seed)
        : model(std::move(m)), grid(T, steps),
          flow(MeasureFlow::constant(grid, EmpiricalMeasure({1.0}, 1))),
          init(sample_initial_states(InitSpec::gaussian(1.0, 0.5), particles, 1, seed)),
          noise(seed + 1, grid, particles, 1),
          paths(simulate_frozen_flow(model, flow, init, noise, default_scheme(model))) {}
};

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

} // namespace

TEST_CASE("derivative fields vanish identically before the source time") {
    LimitSetup su(make_mean_field_ou(1.0, 0.5, 0.3), 1.0, 100, 2, 7);
    const long s = 40;
    MalliavinLimitField lim = malliavin_limit(su.model, su.paths, 0, su.flow, s, su.noise);
    for (long k = 0; k < s; ++k) CHECK(lim.value_at(k)[0] == 0.0);

    auto ips_init = sample_initial_states(InitSpec::gaussian(1.0, 0.5), 4, 1, 8);
    NoiseBundle ips_noise(9, su.grid, 4, 1);
    ParticlePaths ips = simulate_ips(su.model, ips_init, ips_noise, Scheme::EulerMaruyama);
    MalliavinIpsField f = malliavin_ips(su.model, ips, s, 1, ips_noise);
    for (long i = 0; i < 4; ++i)
        for (long k = 0; k < s; ++k) CHECK(f.value_at(i, k)[0] == 0.0);
}

TEST_CASE("the source block carries the diffusion coefficient") {
    // State-dependent diffusion: the boundary value must be sigma evaluated
    // on the path at the source time, not a constant.
    LimitSetup su(make_scalar_state_diffusion(1.0, 0.5, 0.2, 0.1), 0.5, 50, 3, 11);
    const long s = 20;
    for (long p = 0; p < 3; ++p) {
        MalliavinLimitField lim = malliavin_limit(su.model, su.paths, p, su.flow, s, su.noise);
        double sigma = 0.2 + 0.1 * std::tanh(su.paths.state(p, s)[0]);
        CHECK(lim.value_at(s)[0] == doctest::Approx(sigma).epsilon(1e-14));
    }

    auto ips_init = sample_initial_states(InitSpec::gaussian(1.0, 0.5), 5, 1, 12);
    NoiseBundle ips_noise(13, su.grid, 5, 1);
    ParticlePaths ips = simulate_ips(su.model, ips_init, ips_noise, Scheme::EulerMaruyama);
    MalliavinIpsField f = malliavin_ips(su.model, ips, s, 2, ips_noise);
    double sigma_j = 0.2 + 0.1 * std::tanh(ips.state(2, s)[0]);
    CHECK(f.value_at(2, s)[0] == doctest::Approx(sigma_j).epsilon(1e-14));
    for (long i = 0; i < 5; ++i)
        if (i != 2) CHECK(f.value_at(i, s)[0] == 0.0);
}

TEST_CASE("limit derivative matches the exponential closed form") {
    // For the linear model the tangent is deterministic:
    // D_s Z_t = sigma0 exp(-a (t - s)) up to the scheme's O(dt) error.
    LimitSetup su(make_mean_field_ou(1.0, 0.5, 0.3), 1.0, 1000, 1, 17);
    for (long s : {0L, 200L, 600L}) {
        MalliavinLimitField lim = malliavin_limit(su.model, su.paths, 0, su.flow, s, su.noise);
        double worst = 0.0;
        for (long k = s; k <= 1000; ++k) {
            double u = su.grid.node(k) - su.grid.node(s);
            worst = std::max(worst, std::abs(lim.value_at(k)[0] - 0.3 * std::exp(-u)));
        }
        CHECK(worst <= 1e-3);
    }
}

TEST_CASE("switching the interaction off keeps cross rows exactly zero") {
    Model m = make_mean_field_ou(1.0, 0.0, 0.3);
    TimeGrid grid(0.5, 60);
    auto init = sample_initial_states(InitSpec::gaussian(1.0, 0.5), 5, 1, 21);
    NoiseBundle noise(22, grid, 5, 1);
    ParticlePaths ips = simulate_ips(m, init, noise, Scheme::EulerMaruyama);
    MalliavinIpsField f = malliavin_ips(m, ips, 10, 2, noise);
    for (long i = 0; i < 5; ++i) {
        if (i == 2) continue;
        for (long k = 0; k <= 60; ++k) CHECK(f.value_at(i, k)[0] == 0.0);
    }
    CHECK(f.value_at(2, 60)[0] != 0.0);
}

TEST_CASE("tangent recursions are linear in their source value") {
    LimitSetup su(make_double_well(0.5, 0.3), 0.5, 100, 1, 23);
    const long s = 30;
    std::vector<double> u{0.4}, cu{1.2};
    MalliavinLimitField base = malliavin_limit_from(su.model, su.paths, 0, su.flow, s, u, su.noise);
    MalliavinLimitField scaled = malliavin_limit_from(su.model, su.paths, 0, su.flow, s, cu, su.noise);
    for (long k = s; k <= 100; k += 10)
        CHECK(scaled.value_at(k)[0] == doctest::Approx(3.0 * base.value_at(k)[0]).epsilon(1e-12));

    // The canonical field is the propagation of the sigma boundary block.
    auto ips_init = sample_initial_states(InitSpec::gaussian(1.0, 0.5), 4, 1, 24);
    NoiseBundle ips_noise(25, su.grid, 4, 1);
    ParticlePaths ips = simulate_ips(su.model, ips_init, ips_noise, Scheme::TamedEulerMaruyama);
    MalliavinIpsField canon = malliavin_ips(su.model, ips, s, 1, ips_noise);
    std::vector<double> seeds(4, 0.0);
    seeds[1] = canon.value_at(1, s)[0];
    MalliavinIpsField rebuilt = malliavin_ips_from(su.model, ips, s, 1, seeds, ips_noise);
    for (long i = 0; i < 4; ++i)
        for (long k = 0; k <= 100; k += 20) CHECK(rebuilt.value_at(i, k)[0] == canon.value_at(i, k)[0]);

    std::vector<double> scaled_seeds(4, 0.0);
    scaled_seeds[1] = 3.0 * seeds[1];
    MalliavinIpsField ips_scaled = malliavin_ips_from(su.model, ips, s, 1, scaled_seeds, ips_noise);
    for (long i = 0; i < 4; ++i)
        for (long k = s; k <= 100; k += 20)
            CHECK(ips_scaled.value_at(i, k)[0] ==
                  doctest::Approx(3.0 * canon.value_at(i, k)[0]).epsilon(1e-12));
}

TEST_CASE("directional derivative quadrature covers cells exactly once") {
    LimitSetup su(make_mean_field_ou(1.0, 0.5, 0.3), 0.5, 50, 1, 31);
    const long s = 20;
    MalliavinLimitField lim = malliavin_limit(su.model, su.paths, 0, su.flow, s, su.noise);
    std::vector<MalliavinLimitField> fields{lim};

    std::vector<double> h(50, 0.0);
    h[20] = 2.0;
    auto dd = directional_derivative(fields, h);
    // The boundary value at t = s is excluded: the increment on cell s only
    // reaches nodes strictly after s.
    for (long k = 0; k <= s; ++k) CHECK(dd[static_cast<std::size_t>(k)] == 0.0);
    for (long k = s + 1; k <= 50; ++k)
        CHECK(dd[static_cast<std::size_t>(k)] ==
              doctest::Approx(lim.value_at(k)[0] * 2.0 * su.grid.dt).epsilon(1e-15));

    std::vector<double> zero(50, 0.0);
    auto dd0 = directional_derivative(fields, zero);
    for (double v : dd0) CHECK(v == 0.0);

    std::vector<double> uncovered(50, 0.0);
    uncovered[3] = 1.0;
    CHECK_THROWS_WITH_AS(directional_derivative(fields, uncovered), doctest::Contains("cell 3"),
                         InvalidInputError);

    std::vector<MalliavinLimitField> dup{lim, lim};
    CHECK_THROWS_WITH_AS(directional_derivative(dup, h), doctest::Contains("share source cell"),
                         InvalidInputError);

    std::vector<double> short_h(49, 0.0);
    CHECK_THROWS_AS(directional_derivative(fields, short_h), InvalidInputError);
    CHECK_THROWS_AS(directional_derivative(std::span<const MalliavinLimitField>{}, h),
                    InvalidInputError);
}

TEST_CASE("directional derivative matches the wiener-shift oracle on an affine model") {
    // Affine coefficients make the simulated map linear in the increments,
    // so the central difference is exact up to roundoff.
    LimitSetup su(make_mean_field_ou(1.0, 0.5, 0.3), 1.0, 200, 1, 37);
    auto sources = source_subgrid(su.grid, 4);
    std::vector<double> h(200, 0.0);
    std::vector<MalliavinLimitField> fields;
    for (long s : sources) {
        h[static_cast<std::size_t>(s)] = 1.0;
        fields.push_back(malliavin_limit(su.model, su.paths, 0, su.flow, s, su.noise));
    }
    auto dd = directional_derivative(fields, h);
    auto fd = finite_difference_oracle(su.model, su.flow, su.paths.state(0, 0), su.noise, 0,
                                       Scheme::EulerMaruyama, h);
    // Limited only by central-difference roundoff (state roundoff amplified
    // by 1 / (2 epsilon), a few 1e-9 here).
    for (long k = 0; k <= 200; k += 25) {
        CHECK(rel_gap(dd[static_cast<std::size_t>(k)], fd[static_cast<std::size_t>(k)]) <= 1e-8);
    }
}

TEST_CASE("directional derivative matches the oracle on the superlinear model") {
    LimitSetup su(make_double_well(0.5, 0.3), 0.5, 500, 5, 41);
    auto sources = source_subgrid(su.grid, 4);
    std::vector<double> h(500, 0.0);
    for (long s : sources) h[static_cast<std::size_t>(s)] = 1.0;
    for (long p = 0; p < 5; ++p) {
        std::vector<MalliavinLimitField> fields;
        for (long s : sources)
            fields.push_back(malliavin_limit(su.model, su.paths, p, su.flow, s, su.noise));
        auto dd = directional_derivative(fields, h);
        auto fd = finite_difference_oracle(su.model, su.flow, su.paths.state(p, 0), su.noise, p,
                                           Scheme::TamedEulerMaruyama, h);
        CHECK(rel_gap(dd[500], fd[500]) <= 1e-6);
    }
}

TEST_CASE("central difference error shrinks quadratically in epsilon") {
    // The tangent is the exact derivative of the scheme, so against a
    // strongly nonlinear drift the oracle's deviation from it must scale
    // like epsilon^2; a large direction amplitude keeps the deviation well
    // above roundoff at both epsilons.
    LimitSetup su(make_double_well(0.5, 0.3), 0.2, 200, 1, 43);
    std::vector<double> h(200, 0.0);
    h[0] = 5.0 / su.grid.dt;
    std::vector<MalliavinLimitField> fields{
        malliavin_limit(su.model, su.paths, 0, su.flow, 0, su.noise)};
    auto dd = directional_derivative(fields, h);
    auto fd_coarse = finite_difference_oracle(su.model, su.flow, su.paths.state(0, 0), su.noise, 0,
                                              Scheme::TamedEulerMaruyama, h, 4e-2);
    auto fd_fine = finite_difference_oracle(su.model, su.flow, su.paths.state(0, 0), su.noise, 0,
                                            Scheme::TamedEulerMaruyama, h, 4e-3);
    double err_coarse = std::abs(fd_coarse[200] - dd[200]);
    double err_fine = std::abs(fd_fine[200] - dd[200]);
    CHECK(err_coarse > 0.0);
    CHECK(err_fine > 0.0);
    CHECK(err_coarse / err_fine > 20.0); // ~100 for a clean epsilon^2 law
}

TEST_CASE("stream tilts never reach decoupled neighbours") {
    Model m = make_mean_field_ou(1.0, 0.5, 0.3);
    TimeGrid grid(0.5, 80);
    MeasureFlow flow = MeasureFlow::constant(grid, EmpiricalMeasure({1.0}, 1));
    auto init = sample_initial_states(InitSpec::gaussian(1.0, 0.5), 6, 1, 47);
    NoiseBundle noise(48, grid, 6, 1);
    std::vector<double> h(80, 1.0);
    auto diff = finite_difference_oracle_non_ips(m, flow, init, noise, Scheme::EulerMaruyama, 2, h);
    REQUIRE(diff.size() == 6u * 81u);
    for (long i = 0; i < 6; ++i) {
        bool any = false;
        for (long k = 0; k <= 80; ++k) {
            double v = diff[static_cast<std::size_t>(i) * 81 + k];
            if (i != 2) CHECK(v == 0.0);
            any = any || v != 0.0;
        }
        if (i == 2) CHECK(any);
    }
}

TEST_CASE("running-mean fast path agrees with the literal pairwise sums") {
    Model m = make_mean_field_ou(1.0, 0.5, 0.3);
    TimeGrid grid(0.5, 60);
    auto init = sample_initial_states(InitSpec::gaussian(1.0, 0.5), 8, 1, 53);
    NoiseBundle noise(54, grid, 8, 1);
    ParticlePaths ips = simulate_ips(m, init, noise, Scheme::EulerMaruyama);
    MalliavinIpsField fast = malliavin_ips(m, ips, 10, 0, noise, false);
    MalliavinIpsField slow = malliavin_ips(m, ips, 10, 0, noise, true);
    for (long i = 0; i < 8; ++i)
        for (long k = 0; k <= 60; k += 6) {
            double a = fast.value_at(i, k)[0], b = slow.value_at(i, k)[0];
            CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b)));
        }
}

TEST_CASE("diagonal derivative stays level across ensemble sizes") {
    // The own-stream response has an N-independent leading term; growing the
    // ensemble must not inflate or wash out the diagonal.
    Model m = make_mean_field_ou(1.0, 0.5, 0.3);
    TimeGrid grid(1.0, 100);
    std::vector<double> sups;
    for (long n : {4L, 16L, 64L}) {
        auto init = sample_initial_states(InitSpec::gaussian(1.0, 0.5), n, 1, 59);
        NoiseBundle noise(60, grid, n, 1);
        ParticlePaths ips = simulate_ips(m, init, noise, Scheme::EulerMaruyama);
        MalliavinIpsField f = malliavin_ips(m, ips, 0, 0, noise);
        double sup = 0.0;
        for (long k = 0; k <= 100; ++k) sup = std::max(sup, std::abs(f.value_at(0, k)[0]));
        sups.push_back(sup);
    }
    double lo = *std::min_element(sups.begin(), sups.end());
    double hi = *std::max_element(sups.begin(), sups.end());
    CHECK(hi / lo <= 2.0);
}

TEST_CASE("interacting tangent matches the ensemble oracle") {
    // Cross-particle propagation through the 1/N interaction terms is the
    // delicate part; the ensemble-wide central difference checks every row.
    Model m = make_mean_field_ou(1.0, 0.5, 0.3);
    TimeGrid grid(0.5, 100);
    const long N = 8, j = 3;
    auto init = sample_initial_states(InitSpec::gaussian(1.0, 0.5), N, 1, 61);
    NoiseBundle noise(62, grid, N, 1);
    ParticlePaths ips = simulate_ips(m, init, noise, Scheme::EulerMaruyama);
    auto sources = source_subgrid(grid, 3);
    std::vector<double> h(100, 0.0);
    std::vector<MalliavinIpsField> fields;
    for (long s : sources) {
        h[static_cast<std::size_t>(s)] = 1.0;
        fields.push_back(malliavin_ips(m, ips, s, j, noise));
    }
    auto fd = finite_difference_oracle_ips(m, init, noise, Scheme::EulerMaruyama, j, h);
    // Cross responses are O(1/N) small, so the oracle's roundoff (state
    // noise amplified by 1 / (2 epsilon)) costs a few digits of relative
    // agreement; 1e-6 still pins the interaction propagation decisively.
    for (long i = 0; i < N; ++i) {
        auto dd = directional_derivative(fields, i, h);
        for (long k = 25; k <= 100; k += 25) {
            double want = fd[(static_cast<std::size_t>(i) * 101 + k)];
            CHECK(rel_gap(dd[static_cast<std::size_t>(k)], want) <= 1e-6);
        }
    }
}

TEST_CASE("source subgrid starts at zero and avoids the right endpoint") {
    TimeGrid grid(1.0, 100);
    auto s4 = source_subgrid(grid, 4);
    REQUIRE(s4.size() == 4);
    CHECK(s4[0] == 0);
    for (std::size_t i = 1; i < s4.size(); ++i) CHECK(s4[i] > s4[i - 1]);
    CHECK(s4.back() < 100);
    auto s1 = source_subgrid(grid, 1);
    REQUIRE(s1.size() == 1);
    CHECK(s1[0] == 0);
    CHECK_THROWS_AS(source_subgrid(grid, 0), InvalidInputError);
    CHECK_THROWS_AS(source_subgrid(grid, 101), InvalidInputError);
}
