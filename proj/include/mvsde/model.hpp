#pragma once

#include "mvsde/measure.hpp"

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mvsde {

enum class Regularity { GloballyLipschitz, OneSidedLipschitz };

/// Coefficient set of a measure-dependent SDE
///
///   dX_t = b(t, X_t, mu_t) dt + sigma(t, X_t, mu_t) dW_t,   X_t in R^d, W_t in R^m,
///
/// together with the state gradients and the measure derivatives that the
/// first-variation (tangent) equations consume.  All evaluators must be
/// pure functions of their arguments and safe to call concurrently.
///
/// Layouts of the output spans:
///   drift            d            b_i
///   diffusion        d*m          sigma(i,l) at i*m + l
///   grad_x_drift     d*d          d b_i / d x_j at i*d + j
///   grad_x_diffusion m*d*d        d sigma(i,l) / d x_j at (l*d + i)*d + j
///   lions_drift      d*d          (measure derivative of b at v)_ij at i*d + j
///   lions_diffusion  m*d*d        as grad_x_diffusion, derivative at v
struct Model {
    using DriftFn = std::function<void(double, std::span<const double>, const EmpiricalMeasure&, std::span<double>)>;
    using LionsFn = std::function<void(double, std::span<const double>, const EmpiricalMeasure&, std::span<const double>, std::span<double>)>;

    std::string name;
    int dim_state = 1;
    int dim_noise = 1;
    Regularity regularity = Regularity::GloballyLipschitz;

    /// True when the measure derivatives do not depend on the probe point v.
    /// Lets the coupled tangent equations collapse their interaction sums to
    /// a running mean, O(N) per step instead of O(N^2).
    bool lions_constant_in_v = false;

    DriftFn drift;
    DriftFn diffusion;
    DriftFn grad_x_drift;
    DriftFn grad_x_diffusion;
    LionsFn lions_drift;
    LionsFn lions_diffusion;
};

/// Validated single-point evaluators.  They check dimensions, allocate the
/// result, and are the intended entry points outside of inner loops.
std::vector<double> eval_drift(const Model& model, double t, std::span<const double> x, const EmpiricalMeasure& mu);
std::vector<double> eval_diffusion(const Model& model, double t, std::span<const double> x, const EmpiricalMeasure& mu);
std::vector<double> eval_grad_x_drift(const Model& model, double t, std::span<const double> x, const EmpiricalMeasure& mu);
std::vector<double> eval_grad_x_diffusion(const Model& model, double t, std::span<const double> x, const EmpiricalMeasure& mu);
std::vector<double> eval_lions_drift(const Model& model, double t, std::span<const double> x, const EmpiricalMeasure& mu, std::span<const double> v);
std::vector<double> eval_lions_diffusion(const Model& model, double t, std::span<const double> x, const EmpiricalMeasure& mu, std::span<const double> v);

/// Scalar mean-reverting model with mean-field attraction:
///   b(x, mu) = -a x + kappa * mean(mu),  sigma = sigma0  (additive noise).
/// Globally Lipschitz; closed forms exist for the mean and the tangent flow.
Model make_mean_field_ou(double a, double kappa, double sigma0);

/// Scalar double-well model with attraction to the barycenter:
///   b(x, mu) = x - x^3 + kappa (mean(mu) - x),  sigma = sigma0.
/// One-sided Lipschitz drift; pairs with the tamed scheme.
Model make_double_well(double kappa, double sigma0);

/// Scalar model with state-dependent, bounded, smooth diffusion:
///   b(x, mu) = -a x + kappa * mean(mu),  sigma(x) = sigma1 + sigma2 * tanh(x).
Model make_scalar_state_diffusion(double a, double kappa, double sigma1, double sigma2);

/// Builds a registered model by name.  Unspecified parameters take the
/// model's documented defaults; unknown names or parameters are rejected
/// with the list of valid choices in the message.
Model make_model(const std::string& name, const std::map<std::string, double>& params = {});

/// Registered model names, sorted.
std::vector<std::string> model_names();

/// Default parameter set of a registered model.
std::map<std::string, double> model_default_params(const std::string& name);

} // namespace mvsde
