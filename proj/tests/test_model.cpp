#include <doctest.h>

#include "mvsde/model.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace mvsde;

namespace {

EmpiricalMeasure atoms(std::vector<double> pts) { return EmpiricalMeasure(std::move(pts), 1); }

// Central difference in the state coordinate.
double fd_drift_dx(const Model& m, double t, double x, const EmpiricalMeasure& mu, double h = 1e-6) {
    double xp = x + h, xm = x - h;
    auto bp = eval_drift(m, t, std::span<const double>(&xp, 1), mu);
    auto bm = eval_drift(m, t, std::span<const double>(&xm, 1), mu);
    return (bp[0] - bm[0]) / (2.0 * h);
}

// Central difference in one atom of the empirical measure, scaled by N:
// the empirical projection has atom derivatives (1/N) times the measure
// derivative at that atom.
double fd_drift_datom(const Model& m, double t, double x, std::vector<double> pts, long j,
                      double h = 1e-6) {
    std::vector<double> up = pts, down = pts;
    up[static_cast<std::size_t>(j)] += h;
    down[static_cast<std::size_t>(j)] -= h;
    double n = static_cast<double>(pts.size());
    auto bp = eval_drift(m, t, std::span<const double>(&x, 1), atoms(up));
    auto bm = eval_drift(m, t, std::span<const double>(&x, 1), atoms(down));
    return n * (bp[0] - bm[0]) / (2.0 * h);
}

} // namespace

TEST_CASE("mean field ou coefficients at pinned points") {
    Model m = make_mean_field_ou(1.0, 0.5, 0.3);
    CHECK(m.regularity == Regularity::GloballyLipschitz);
    CHECK(m.lions_constant_in_v);

    double x = 1.0;
    EmpiricalMeasure mu = atoms({1.0, 3.0}); // mean 2
    auto b = eval_drift(m, 0.0, std::span<const double>(&x, 1), mu);
    CHECK(b[0] == doctest::Approx(0.0)); // -1 + 0.5 * 2
    auto sig = eval_diffusion(m, 0.0, std::span<const double>(&x, 1), mu);
    CHECK(sig[0] == doctest::Approx(0.3));
    auto gb = eval_grad_x_drift(m, 0.0, std::span<const double>(&x, 1), mu);
    CHECK(gb[0] == doctest::Approx(-1.0));
    double v = 7.0;
    auto lb = eval_lions_drift(m, 0.0, std::span<const double>(&x, 1), mu, std::span<const double>(&v, 1));
    CHECK(lb[0] == doctest::Approx(0.5));
    auto ls = eval_lions_diffusion(m, 0.0, std::span<const double>(&x, 1), mu, std::span<const double>(&v, 1));
    CHECK(ls[0] == doctest::Approx(0.0));
}

TEST_CASE("double well coefficients at pinned points") {
    Model m = make_double_well(0.5, 0.3);
    CHECK(m.regularity == Regularity::OneSidedLipschitz);

    double x = 2.0;
    EmpiricalMeasure mu = atoms({0.0});
    auto b = eval_drift(m, 0.0, std::span<const double>(&x, 1), mu);
    CHECK(b[0] == doctest::Approx(-7.0)); // 2 - 8 + 0.5 * (0 - 2)

    double x1 = 1.0;
    auto gb = eval_grad_x_drift(m, 0.0, std::span<const double>(&x1, 1), mu);
    CHECK(gb[0] == doctest::Approx(-2.5)); // 1 - 3 - 0.5
}

TEST_CASE("scalar state diffusion coefficients at pinned points") {
    Model m = make_scalar_state_diffusion(1.0, 0.5, 0.2, 0.1);
    EmpiricalMeasure mu = atoms({0.0});

    double x0 = 0.0;
    auto s0 = eval_diffusion(m, 0.0, std::span<const double>(&x0, 1), mu);
    CHECK(s0[0] == doctest::Approx(0.2));
    auto g0 = eval_grad_x_diffusion(m, 0.0, std::span<const double>(&x0, 1), mu);
    CHECK(g0[0] == doctest::Approx(0.1)); // sigma2 * (1 - tanh^2 0)

    double x20 = 20.0;
    auto s20 = eval_diffusion(m, 0.0, std::span<const double>(&x20, 1), mu);
    CHECK(std::abs(s20[0] - 0.3) <= 1e-12); // tanh saturates
}

TEST_CASE("state gradients match central finite differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-3.0, 3.0);
    for (const char* name : {"MeanFieldOU", "DoubleWell", "ScalarStateDiffusion"}) {
        Model m = make_model(name, {});
        for (int probe = 0; probe < 100; ++probe) {
            double x = ux(rng);
            EmpiricalMeasure mu = atoms({ux(rng), ux(rng), ux(rng)});
            auto gb = eval_grad_x_drift(m, 0.0, std::span<const double>(&x, 1), mu);
            double scale = 1.0 + std::abs(gb[0]);
            CHECK(std::abs(gb[0] - fd_drift_dx(m, 0.0, x, mu)) <= 1e-5 * scale);

            auto gs = eval_grad_x_diffusion(m, 0.0, std::span<const double>(&x, 1), mu);
            double h = 1e-6;
            double xp = x + h, xm = x - h;
            auto sp = eval_diffusion(m, 0.0, std::span<const double>(&xp, 1), mu);
            auto sm = eval_diffusion(m, 0.0, std::span<const double>(&xm, 1), mu);
            CHECK(std::abs(gs[0] - (sp[0] - sm[0]) / (2.0 * h)) <= 1e-5);
        }
    }
}

TEST_CASE("measure derivatives match atom-wise finite differences") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ux(-3.0, 3.0);
    for (const char* name : {"MeanFieldOU", "DoubleWell", "ScalarStateDiffusion"}) {
        Model m = make_model(name, {});
        for (int probe = 0; probe < 100; ++probe) {
            double x = ux(rng);
            std::vector<double> pts = {ux(rng), ux(rng), ux(rng), ux(rng)};
            long j = static_cast<long>(rng() % pts.size());
            EmpiricalMeasure mu = atoms(pts);
            auto v = mu.atom(j);
            auto lb = eval_lions_drift(m, 0.0, std::span<const double>(&x, 1), mu, v);
            CHECK(std::abs(lb[0] - fd_drift_datom(m, 0.0, x, pts, j)) <= 1e-5);
        }
    }
}

TEST_CASE("double well drift is one-sided lipschitz on a box") {
    Model m = make_double_well(0.5, 0.3);
    EmpiricalMeasure mu = atoms({0.5, -0.5});
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ux(-10.0, 10.0);
    const double L = 1.01;
    for (int pair = 0; pair < 10000; ++pair) {
        double x = ux(rng), y = ux(rng);
        auto bx = eval_drift(m, 0.0, std::span<const double>(&x, 1), mu);
        auto by = eval_drift(m, 0.0, std::span<const double>(&y, 1), mu);
        CHECK((x - y) * (bx[0] - by[0]) <= L * (x - y) * (x - y) + 1e-12);
    }
}

TEST_CASE("evaluators reject dimension mismatches") {
    Model m = make_mean_field_ou(1.0, 0.5, 0.3);
    std::vector<double> x2 = {1.0, 2.0};
    EmpiricalMeasure mu = atoms({0.0});
    CHECK_THROWS_AS(eval_drift(m, 0.0, x2, mu), InvalidInputError);
    EmpiricalMeasure mu2({0.0, 0.0}, 2);
    double x = 1.0;
    CHECK_THROWS_AS(eval_drift(m, 0.0, std::span<const double>(&x, 1), mu2), InvalidInputError);
}

TEST_CASE("model registry resolves names, defaults and overrides") {
    auto names = model_names();
    CHECK(std::find(names.begin(), names.end(), "MeanFieldOU") != names.end());
    CHECK(std::find(names.begin(), names.end(), "DoubleWell") != names.end());
    CHECK(std::find(names.begin(), names.end(), "ScalarStateDiffusion") != names.end());

    Model m = make_model("MeanFieldOU", {{"kappa", 2.0}});
    double x = 0.0;
    EmpiricalMeasure mu = atoms({1.0});
    auto b = eval_drift(m, 0.0, std::span<const double>(&x, 1), mu);
    CHECK(b[0] == doctest::Approx(2.0)); // kappa overridden, a default 1

    auto defaults = model_default_params("DoubleWell");
    CHECK(defaults.at("kappa") == doctest::Approx(0.5));
    CHECK(defaults.at("sigma0") == doctest::Approx(0.3));

    CHECK_THROWS_WITH_AS(make_model("NoSuchModel", {}),
                         doctest::Contains("MeanFieldOU"), InvalidInputError);
    CHECK_THROWS_WITH_AS(make_model("MeanFieldOU", {{"bogus", 1.0}}),
                         doctest::Contains("bogus"), InvalidInputError);
}
