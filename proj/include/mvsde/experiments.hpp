#pragma once

#include "mvsde/malliavin.hpp"
#include "mvsde/picard.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mvsde {

/// Shared configuration of the convergence studies.  Everything a study
/// computes is a pure function of this struct: repetition r of any study
/// draws its initial states and noise from (seed, r) with per-particle
/// substreams, so the same repetition is coupled across ensemble sizes
/// (common random numbers) and results are identical for any thread count.
struct StudyConfig {
    std::string model_name = "MeanFieldOU";
    std::map<std::string, double> model_params; ///< overrides on the registry defaults

    std::vector<long> n_list = {32, 64, 128, 256, 512};
    int repetitions = 16;
    double T = 1.0;
    long steps = 1000;
    int source_nodes = 4;      ///< derivative source times per study
    std::uint64_t seed = 42;
    std::string scheme = "auto";
    /// Wide initial spread keeps E|xi|^2 well above 1, so the moment
    /// study's growth fit runs where the xi^2 term dominates the affine
    /// offset instead of measuring the offset itself.
    InitSpec init = InitSpec::gaussian(1.0, 2.0);

    long reference_samples = 0; ///< ensemble behind the reference flow; 0 = 8 * max(n_list)
    long particles = 512;       ///< ensemble size of the moment study
    std::vector<double> variance_factors = {1.0, 2.0, 4.0};

    /// Pass/fail thresholds.  The slope window encodes "decay rate about
    /// 1/N" with Monte Carlo slack; fits must stay inside it including
    /// their confidence half-width.
    double slope_window_lo = -1.4;
    double slope_window_hi = -0.6;
    double diag_ratio_max = 2.0;
    double growth_exponent_max = 1.2;
    double monotone_fraction_min = 0.95;
};

struct StudyCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct StudyResult {
    std::string study;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, double> metrics; ///< named scalars (slopes, ratios, ...)
    std::vector<StudyCheck> checks;
    bool pass = true; ///< conjunction of checks, false when aborted
    std::vector<std::string> notes;
    /// Nonempty when the study aborted on a runtime failure (divergence);
    /// rows computed before the abort are kept so partial results can be
    /// written out.
    std::string error;
};

/// Coupling gap between the interacting ensemble and the decoupled
/// ensemble driven by a fixed-point reference flow, on shared noise:
/// rows of E max_i sup_t |X^i_t - Z^i_t|^2 against N.  Checks: means
/// strictly decreasing, log-log slope inside the window.
StudyResult run_poc_study(const StudyConfig& config);

/// Decay of the cross-particle derivative: rows of
/// max_s sup_t E |D^0_s X^1_t|^2 against N, with the diagonal statistic
/// E |D^0_s X^0_t|^2 alongside.  Checks: off-diagonal slope inside the
/// window, diagonal max/min ratio over N bounded.
StudyResult run_cross_decay_study(const StudyConfig& config);

/// Ensemble-averaged derivative mass: rows of
/// max_{s,t} (1/N) sum_k E |D^0_s X^k_t|^2 against N, with the Jensen
/// companion E[((1/N) sum_k |D^0_s X^k_t|)^2].  Checks: slope inside the
/// window, Jensen statistic dominated on every row.
StudyResult run_mean_field_psi_study(const StudyConfig& config);

/// Transfer of the derivative to the decoupled limit on shared noise:
/// rows of E max_s sup_t |D^0_s X^0_t - D^0_s Z^0_t|^2 against N.
/// Checks: means strictly decreasing; also reports the fraction of
/// repetitions whose own sequence decreases (repetitions are coupled
/// across N, so this fraction is meaningful), and the slope for
/// information only.
StudyResult run_diagonal_convergence_study(const StudyConfig& config);

/// Growth of sup-moments in the initial condition: scales the initial
/// variance by the configured factors and fits
/// log E sup_t |Z_t|^2 and log max_s E sup_t |D_s Z_t|^2 against
/// log(1 + E|xi|^2).  Checks: both growth exponents at most the bound
/// (affine growth in 1 + E|xi|^2 means exponent about 1).
StudyResult run_moment_bound_study(const StudyConfig& config);

/// Writes results.csv, results.dat (gnuplot) and meta.json under dir.
/// File contents are a pure function of (config, result); wall-clock
/// stamps and host details stay out so reruns compare byte for byte.
void write_study_outputs(const StudyResult& result, const StudyConfig& config,
                         const std::string& dir);

/// meta.json payload as a string (exposed for tests).
std::string study_meta_json(const StudyResult& result, const StudyConfig& config);

/// The model named by the config with its parameter overrides applied.
Model study_model(const StudyConfig& config);

/// Resolves "auto" against the model's regularity.
Scheme study_scheme(const StudyConfig& config, const Model& model);

} // namespace mvsde
