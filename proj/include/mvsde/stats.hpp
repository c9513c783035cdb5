#pragma once

#include <span>

namespace mvsde {

double sample_mean(std::span<const double> xs);

/// Standard error of the sample mean (unbiased variance / sqrt(count)).
/// Zero for fewer than two points.
double sample_stderr(std::span<const double> xs);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Half-width of the 95% confidence interval of the slope, from the
    /// residual variance of the fit (Student t with points - 2 dof).
    /// Infinite when the fit has no residual degrees of freedom.
    double ci_halfwidth = 0.0;
    int points = 0;
};

/// Ordinary least squares y ~ intercept + slope * x.
SlopeFit fit_linear(std::span<const double> x, std::span<const double> y);

/// Least squares of log(y) against log(x); inputs must be positive.
SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y);

} // namespace mvsde
