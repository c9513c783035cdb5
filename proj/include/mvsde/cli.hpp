#pragma once

#include "mvsde/experiments.hpp"

#include <optional>
#include <string>

namespace mvsde {

/// Fully resolved batch-run description: one command plus everything the
/// simulators and studies read.  Defaults are chosen here; a JSON config
/// overrides them and command-line flags override the file.
struct CliConfig {
    std::string command;
    StudyConfig study; ///< model, grid, ensemble sizes, seed, scheme, init, windows

    std::string outdir = "out";
    unsigned threads = 0;  ///< 0 = all cores; never changes results
    std::string run_label; ///< replaces the timestamp in the run directory name

    long samples = 512;      ///< fixed-point flow ensemble (picard, malliavin-check)
    double tol = 0.0;        ///< fixed-point residual tolerance; 0 picks the default
    int max_iterations = 25; ///< fixed-point sweep cap
    double epsilon = 1e-4;   ///< oracle probe size (malliavin-check)
    long check_paths = 100;  ///< oracle ensemble size (malliavin-check)

    /// Source sub-grid size; unset picks 4 for studies, 8 for the
    /// derivative oracle check.
    std::optional<int> source_nodes;

    bool write_paths = false; ///< simulate: also dump every path
    bool write_flow = false;  ///< picard: also dump the flow atoms
};

/// Applies the JSON document in `text` on top of `base`.  Unknown keys
/// are rejected by name; every value is type- and range-checked.  The
/// grid accepts either "steps" or "dt" (converted against "T"), not both.
CliConfig parse_config_json(const std::string& text, const CliConfig& base);

/// JSON echo of the effective configuration, written into every run
/// directory.  Execution-only knobs (threads, outdir, run_label) are
/// omitted: they never influence file contents.
std::string config_to_json(const CliConfig& cfg);

/// Executes a validated config: creates <outdir>/<command>-<stamp>/,
/// writes config.json, results and meta.json there.  Returns the process
/// exit code: 0 success, 1 the run finished but a check failed, 2 runtime
/// failure (divergence; partial artifacts are still written).
int run_command(const CliConfig& cfg);

/// argv entry point (flag parsing + run_command); same exit codes, with
/// 2 also covering usage and validation errors.
int cli_main(int argc, const char* const* argv);

} // namespace mvsde
