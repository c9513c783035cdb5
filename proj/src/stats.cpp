#include "mvsde/stats.hpp"

#include "mvsde/errors.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mvsde {

double sample_mean(std::span<const double> xs) {
    if (xs.empty()) throw InvalidInputError("sample_mean: empty sample");
    double acc = 0.0;
    for (double v : xs) acc += v;
    return acc / static_cast<double>(xs.size());
}

double sample_stderr(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    double mean = sample_mean(xs);
    double ss = 0.0;
    for (double v : xs) ss += (v - mean) * (v - mean);
    double var = ss / static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
}

namespace {

/// Two-sided 97.5% Student t quantiles for 1..30 dof, then the normal limit.
double t_quantile_975(int dof) {
    static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                   2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                   2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                   2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
    if (dof < 1) return std::numeric_limits<double>::infinity();
    if (dof <= 30) return table[dof - 1];
    return 1.96;
}

} // namespace

SlopeFit fit_linear(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidInputError("fit_linear: size mismatch");
    const int n = static_cast<int>(x.size());
    if (n < 2) throw InvalidInputError("fit_linear: need at least two points");

    double mx = sample_mean(x);
    double my = sample_mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        double dx = x[static_cast<std::size_t>(i)] - mx;
        sxx += dx * dx;
        sxy += dx * (y[static_cast<std::size_t>(i)] - my);
    }
    if (sxx <= 0.0) throw InvalidInputError("fit_linear: abscissae are all equal");

    SlopeFit fit;
    fit.points = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;

    if (n <= 2) {
        fit.ci_halfwidth = std::numeric_limits<double>::infinity();
        return fit;
    }
    double rss = 0.0;
    for (int i = 0; i < n; ++i) {
        double r = y[static_cast<std::size_t>(i)] - fit.intercept - fit.slope * x[static_cast<std::size_t>(i)];
        rss += r * r;
    }
    double se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    fit.ci_halfwidth = t_quantile_975(n - 2) * se;
    return fit;
}

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidInputError("fit_loglog: size mismatch");
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw InvalidInputError("fit_loglog: inputs must be positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_linear(lx, ly);
}

} // namespace mvsde
