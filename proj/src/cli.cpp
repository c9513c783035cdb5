#include "mvsde/cli.hpp"

#include "mvsde/io.hpp"
#include "mvsde/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace mvsde {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Pinned agreement bound of the derivative oracle check.
constexpr double kOracleTol = 1e-3;

const std::set<std::string>& command_names() {
    static const std::set<std::string> names = {"simulate",        "picard", "poc",
                                                "malliavin-check", "cross-decay", "psi",
                                                "diagonal",        "moments"};
    return names;
}

const std::set<std::string>& config_keys() {
    // "command" is accepted so an emitted config.json can be fed back via
    // --config unchanged; the subcommand itself always comes from argv.
    static const std::set<std::string> keys = {
        "command",
        "seed",          "outdir",           "threads",
        "run_label",     "model",            "params",
        "scheme",        "T",                "steps",
        "dt",            "N_list",           "reps",
        "source_nodes",  "init",             "particles",
        "samples",       "reference_samples","tol",
        "max_iterations","epsilon",          "check_paths",
        "variance_factors",                  "slope_window",
        "diag_ratio_max","growth_exponent_max",
        "monotone_fraction_min",             "write_paths",
        "write_flow"};
    return keys;
}

double as_number(const json& v, const std::string& key) {
    if (!v.is_number()) throw InvalidInputError(key + ": expected a number");
    return v.get<double>();
}

long as_integer(const json& v, const std::string& key) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw InvalidInputError(key + ": expected an integer");
    return v.get<long>();
}

std::uint64_t as_seed(const json& v, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0)
        return static_cast<std::uint64_t>(v.get<long long>());
    throw InvalidInputError(key + ": expected a nonnegative integer");
}

std::string as_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw InvalidInputError(key + ": expected a string");
    return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& key) {
    if (!v.is_boolean()) throw InvalidInputError(key + ": expected a boolean");
    return v.get<bool>();
}

long positive_integer(const json& v, const std::string& key) {
    long n = as_integer(v, key);
    if (n < 1) throw InvalidInputError(key + ": must be at least 1");
    return n;
}

InitSpec parse_init(const json& v) {
    if (!v.is_object() || !v.contains("type"))
        throw InvalidInputError("init: expected an object with a \"type\" field");
    std::string type = as_string(v.at("type"), "init.type");
    auto require = [&](const char* key) -> double {
        if (!v.contains(key))
            throw InvalidInputError("init: type \"" + type + "\" needs key \"" + key + "\"");
        return as_number(v.at(key), std::string("init.") + key);
    };
    auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [key, value] : v.items()) {
            (void)value;
            if (key == "type") continue;
            if (std::find_if(allowed.begin(), allowed.end(),
                             [&](const char* a) { return key == a; }) == allowed.end())
                throw InvalidInputError("unknown config key \"init." + key + "\"");
        }
    };
    if (type == "constant") {
        reject_unknown({"value"});
        return InitSpec::constant(require("value"));
    }
    if (type == "gaussian") {
        reject_unknown({"mean", "std"});
        double mean = require("mean"), std_dev = require("std");
        if (std_dev < 0.0) throw InvalidInputError("init.std: must be nonnegative");
        return InitSpec::gaussian(mean, std_dev);
    }
    if (type == "uniform") {
        reject_unknown({"lo", "hi"});
        double lo = require("lo"), hi = require("hi");
        if (!(lo < hi)) throw InvalidInputError("init.lo: must be below init.hi");
        return InitSpec::uniform(lo, hi);
    }
    throw InvalidInputError("init.type: unknown type \"" + type +
                            "\" (constant, gaussian, uniform)");
}

long steps_from_dt(double T, double dt, const std::string& key) {
    if (!(dt > 0.0)) throw InvalidInputError(key + ": must be positive");
    long steps = std::lround(T / dt);
    if (steps < 1) throw InvalidInputError(key + ": exceeds the horizon T");
    return steps;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("config: cannot read \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ordered_json init_echo(const InitSpec& init) {
    ordered_json j;
    switch (init.kind) {
    case InitSpec::Kind::Constant:
        j["type"] = "constant";
        j["value"] = init.p1;
        break;
    case InitSpec::Kind::Gaussian:
        j["type"] = "gaussian";
        j["mean"] = init.p1;
        j["std"] = init.p2;
        break;
    case InitSpec::Kind::Uniform:
        j["type"] = "uniform";
        j["lo"] = init.p1;
        j["hi"] = init.p2;
        break;
    }
    return j;
}

bool is_study_command(const std::string& command) {
    return command == "poc" || command == "cross-decay" || command == "psi" ||
           command == "diagonal" || command == "moments";
}

std::string timestamp_now() {
    using namespace std::chrono;
    auto now = system_clock::now();
    std::time_t secs = system_clock::to_time_t(now);
    std::tm tm{};
#if defined(_WIN32)
    localtime_s(&tm, &secs);
#else
    localtime_r(&secs, &tm);
#endif
    auto ms = duration_cast<milliseconds>(now.time_since_epoch()) % 1000;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%04d%02d%02d-%02d%02d%02d%03d", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                  static_cast<int>(ms.count()));
    return buf;
}

std::string run_directory(const CliConfig& cfg) {
    std::string stamp = cfg.run_label.empty() ? timestamp_now() : cfg.run_label;
    return cfg.outdir + "/" + cfg.command + "-" + stamp;
}

double norm_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

int run_study(const CliConfig& cfg, const std::string& dir) {
    StudyConfig study = cfg.study;
    study.source_nodes = cfg.source_nodes.value_or(4);
    StudyResult res;
    if (cfg.command == "poc")
        res = run_poc_study(study);
    else if (cfg.command == "cross-decay")
        res = run_cross_decay_study(study);
    else if (cfg.command == "psi")
        res = run_mean_field_psi_study(study);
    else if (cfg.command == "diagonal")
        res = run_diagonal_convergence_study(study);
    else
        res = run_moment_bound_study(study);
    write_study_outputs(res, study, dir);
    if (!res.error.empty()) {
        std::cerr << "mvsde: " << cfg.command << " aborted: " << res.error << "\n";
        return 2;
    }
    if (!res.pass) {
        std::cerr << "mvsde: " << cfg.command << " finished with failing checks:\n";
        for (const auto& c : res.checks)
            if (!c.pass) std::cerr << "  " << c.name << ": " << c.detail << "\n";
        return 1;
    }
    return 0;
}

int run_simulate(const CliConfig& cfg, const std::string& dir) {
    Model model = study_model(cfg.study);
    Scheme scheme = study_scheme(cfg.study, model);
    TimeGrid grid(cfg.study.T, cfg.study.steps);
    const long N = cfg.study.particles;
    const int d = model.dim_state;

    std::uint64_t seed = derive_seed(cfg.study.seed, StreamPurpose::Repetition, 0);
    auto init = sample_initial_states(cfg.study.init, N, d, seed);
    NoiseBundle noise(seed, grid, N, model.dim_noise);
    ParticlePaths paths = simulate_ips(model, init, noise, scheme);

    std::vector<std::string> columns = {"node", "time"};
    for (int c = 0; c < d; ++c) columns.push_back("mean_x" + std::to_string(c));
    columns.push_back("second_moment");
    std::vector<std::vector<double>> rows;
    for (long k = 0; k <= grid.n; ++k) {
        std::vector<double> row = {static_cast<double>(k), grid.node(k)};
        std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
        double sq = 0.0;
        for (long p = 0; p < N; ++p) {
            auto x = paths.state(p, k);
            for (int c = 0; c < d; ++c) mean[c] += x[c];
            for (int c = 0; c < d; ++c) sq += x[c] * x[c];
        }
        for (int c = 0; c < d; ++c) row.push_back(mean[c] / static_cast<double>(N));
        row.push_back(sq / static_cast<double>(N));
        rows.push_back(std::move(row));
    }
    write_text_file(dir + "/results.csv", render_csv(columns, rows));
    write_text_file(dir + "/results.dat", render_gnuplot(columns, rows));
    if (cfg.write_paths) write_text_file(dir + "/paths.csv", paths_to_csv(paths));

    ordered_json meta;
    meta["command"] = "simulate";
    meta["pass"] = true;
    meta["model"] = model.name;
    meta["scheme"] = scheme_name(scheme);
    meta["particles"] = N;
    meta["final_second_moment"] = rows.back().back();
    write_text_file(dir + "/meta.json", meta.dump(2) + "\n");
    return 0;
}

int run_picard(const CliConfig& cfg, const std::string& dir) {
    Model model = study_model(cfg.study);
    Scheme scheme = study_scheme(cfg.study, model);
    TimeGrid grid(cfg.study.T, cfg.study.steps);

    PicardOptions opt;
    opt.samples = cfg.samples;
    opt.tol = cfg.tol;
    opt.max_iterations = cfg.max_iterations;
    opt.seed = cfg.study.seed;
    PicardResult res = picard_solve(model, cfg.study.init, grid, opt, scheme);

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < res.residuals.size(); ++i)
        rows.push_back({static_cast<double>(i + 1), res.residuals[i]});
    const std::vector<std::string> columns = {"iteration", "residual"};
    write_text_file(dir + "/results.csv", render_csv(columns, rows));
    write_text_file(dir + "/results.dat", render_gnuplot(columns, rows));
    if (cfg.write_flow) write_text_file(dir + "/flow.csv", flow_to_csv(res.flow));

    ordered_json meta;
    meta["command"] = "picard";
    meta["pass"] = res.converged;
    meta["model"] = model.name;
    meta["scheme"] = scheme_name(scheme);
    meta["samples"] = opt.samples;
    meta["iterations"] = res.iterations;
    meta["converged"] = res.converged;
    meta["tol_used"] = res.tol_used;
    if (!res.residuals.empty()) meta["final_residual"] = res.residuals.back();
    write_text_file(dir + "/meta.json", meta.dump(2) + "\n");

    if (!res.converged) {
        std::cerr << "mvsde: picard stopped above tolerance (residual "
                  << (res.residuals.empty() ? 0.0 : res.residuals.back()) << ", tol "
                  << res.tol_used << "); likely the Monte Carlo floor of " << opt.samples
                  << " samples\n";
        return 1;
    }
    return 0;
}

int run_malliavin_check(const CliConfig& cfg, const std::string& dir) {
    Model model = study_model(cfg.study);
    Scheme scheme = study_scheme(cfg.study, model);
    TimeGrid grid(cfg.study.T, cfg.study.steps);
    const int d = model.dim_state;
    const int m = model.dim_noise;
    const int s_count = cfg.source_nodes.value_or(8);
    if (s_count < 1 || s_count > cfg.study.steps)
        throw InvalidInputError("source_nodes: must lie in [1, steps]");
    if (!(cfg.epsilon > 0.0)) throw InvalidInputError("epsilon: must be positive");

    PicardOptions opt;
    opt.samples = cfg.samples;
    opt.tol = cfg.tol;
    opt.max_iterations = cfg.max_iterations;
    opt.seed = derive_seed(cfg.study.seed, StreamPurpose::ReferenceFlow, 0);
    PicardResult ref = picard_solve(model, cfg.study.init, grid, opt, scheme);

    const long P = cfg.check_paths;
    std::uint64_t seed = derive_seed(cfg.study.seed, StreamPurpose::Repetition, 0);
    auto init = sample_initial_states(cfg.study.init, P, d, seed);
    NoiseBundle noise(seed, grid, P, m);
    ParticlePaths paths = simulate_frozen_flow(model, ref.flow, init, noise, scheme);

    auto sources = source_subgrid(grid, s_count);
    std::vector<double> h(static_cast<std::size_t>(grid.n) * m, 0.0);
    for (long s : sources)
        for (int l = 0; l < m; ++l) h[static_cast<std::size_t>(s) * m + l] = 1.0;

    std::vector<std::vector<double>> rows(static_cast<std::size_t>(P));
    parallel_for(static_cast<std::size_t>(P), [&](std::size_t p) {
        std::vector<MalliavinLimitField> fields;
        fields.reserve(sources.size());
        for (long s : sources)
            fields.push_back(malliavin_limit(model, paths, static_cast<long>(p), ref.flow, s, noise));
        std::vector<double> dd = directional_derivative(fields, h);
        std::vector<double> fd =
            finite_difference_oracle(model, ref.flow, paths.state(p, 0), noise,
                                     static_cast<long>(p), scheme, h, cfg.epsilon);
        std::span<const double> dT(dd.data() + static_cast<std::size_t>(grid.n) * d,
                                   static_cast<std::size_t>(d));
        std::span<const double> fT(fd.data() + static_cast<std::size_t>(grid.n) * d,
                                   static_cast<std::size_t>(d));
        double diff = 0.0;
        for (int c = 0; c < d; ++c) diff += (dT[c] - fT[c]) * (dT[c] - fT[c]);
        double rel = std::sqrt(diff) / std::max(norm_of(fT), 1e-12);
        rows[p] = {static_cast<double>(p), norm_of(dT), norm_of(fT), rel};
    });

    const std::vector<std::string> columns = {"path", "deriv_norm", "oracle_norm", "rel_error"};
    write_text_file(dir + "/results.csv", render_csv(columns, rows));
    write_text_file(dir + "/results.dat", render_gnuplot(columns, rows));

    double max_rel = 0.0;
    for (const auto& row : rows) max_rel = std::max(max_rel, row[3]);
    bool pass = max_rel <= kOracleTol;

    ordered_json meta;
    meta["command"] = "malliavin-check";
    meta["pass"] = pass;
    meta["model"] = model.name;
    meta["scheme"] = scheme_name(scheme);
    meta["paths"] = P;
    meta["epsilon"] = cfg.epsilon;
    meta["tolerance"] = kOracleTol;
    meta["max_rel_error"] = max_rel;
    meta["flow_converged"] = ref.converged;
    write_text_file(dir + "/meta.json", meta.dump(2) + "\n");

    if (!pass) {
        std::cerr << "mvsde: derivative/oracle disagreement " << max_rel << " exceeds "
                  << kOracleTol << "\n";
        return 1;
    }
    return 0;
}

} // namespace

CliConfig parse_config_json(const std::string& text, const CliConfig& base) {
    CliConfig cfg = base;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInputError(std::string("config parse error: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidInputError("config: top level must be a JSON object");

    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (config_keys().find(key) == config_keys().end())
            throw InvalidInputError("unknown config key \"" + key + "\"");
    }

    if (doc.contains("seed")) cfg.study.seed = as_seed(doc["seed"], "seed");
    if (doc.contains("outdir")) cfg.outdir = as_string(doc["outdir"], "outdir");
    if (doc.contains("run_label")) cfg.run_label = as_string(doc["run_label"], "run_label");
    if (doc.contains("threads")) {
        long t = as_integer(doc["threads"], "threads");
        if (t < 0) throw InvalidInputError("threads: must be nonnegative");
        cfg.threads = static_cast<unsigned>(t);
    }

    if (doc.contains("model")) cfg.study.model_name = as_string(doc["model"], "model");
    if (doc.contains("params")) {
        if (!doc["params"].is_object())
            throw InvalidInputError("params: expected an object of numbers");
        cfg.study.model_params.clear();
        for (const auto& [key, value] : doc["params"].items())
            cfg.study.model_params[key] = as_number(value, "params." + key);
    }
    if (doc.contains("scheme")) {
        cfg.study.scheme = as_string(doc["scheme"], "scheme");
        if (cfg.study.scheme != "auto") parse_scheme(cfg.study.scheme);
    }

    if (doc.contains("T")) {
        double T = as_number(doc["T"], "T");
        if (!(T > 0.0)) throw InvalidInputError("T: must be positive");
        cfg.study.T = T;
    }
    if (doc.contains("steps") && doc.contains("dt"))
        throw InvalidInputError("steps: give either steps or dt, not both");
    if (doc.contains("steps")) {
        long steps = as_integer(doc["steps"], "steps");
        if (steps < 1) throw InvalidInputError("steps: must be at least 1");
        cfg.study.steps = steps;
    }
    if (doc.contains("dt")) cfg.study.steps = steps_from_dt(cfg.study.T, as_number(doc["dt"], "dt"), "dt");

    if (doc.contains("N_list")) {
        if (!doc["N_list"].is_array() || doc["N_list"].empty())
            throw InvalidInputError("N_list: expected a nonempty array of integers");
        cfg.study.n_list.clear();
        for (const auto& v : doc["N_list"]) cfg.study.n_list.push_back(positive_integer(v, "N_list"));
    }
    if (doc.contains("reps")) cfg.study.repetitions = static_cast<int>(positive_integer(doc["reps"], "reps"));
    if (doc.contains("source_nodes"))
        cfg.source_nodes = static_cast<int>(positive_integer(doc["source_nodes"], "source_nodes"));
    if (doc.contains("init")) cfg.study.init = parse_init(doc["init"]);
    if (doc.contains("particles")) cfg.study.particles = positive_integer(doc["particles"], "particles");
    if (doc.contains("samples")) cfg.samples = positive_integer(doc["samples"], "samples");
    if (doc.contains("reference_samples")) {
        long n = as_integer(doc["reference_samples"], "reference_samples");
        if (n < 0) throw InvalidInputError("reference_samples: must be nonnegative (0 = default)");
        cfg.study.reference_samples = n;
    }
    if (doc.contains("tol")) {
        double tol = as_number(doc["tol"], "tol");
        if (tol < 0.0) throw InvalidInputError("tol: must be nonnegative");
        cfg.tol = tol;
    }
    if (doc.contains("max_iterations"))
        cfg.max_iterations = static_cast<int>(positive_integer(doc["max_iterations"], "max_iterations"));
    if (doc.contains("epsilon")) {
        double eps = as_number(doc["epsilon"], "epsilon");
        if (!(eps > 0.0)) throw InvalidInputError("epsilon: must be positive");
        cfg.epsilon = eps;
    }
    if (doc.contains("check_paths")) cfg.check_paths = positive_integer(doc["check_paths"], "check_paths");
    if (doc.contains("variance_factors")) {
        if (!doc["variance_factors"].is_array() || doc["variance_factors"].empty())
            throw InvalidInputError("variance_factors: expected a nonempty array of numbers");
        cfg.study.variance_factors.clear();
        for (const auto& v : doc["variance_factors"])
            cfg.study.variance_factors.push_back(as_number(v, "variance_factors"));
    }
    if (doc.contains("slope_window")) {
        const auto& w = doc["slope_window"];
        if (!w.is_array() || w.size() != 2)
            throw InvalidInputError("slope_window: expected [low, high]");
        cfg.study.slope_window_lo = as_number(w[0], "slope_window");
        cfg.study.slope_window_hi = as_number(w[1], "slope_window");
        if (!(cfg.study.slope_window_lo < cfg.study.slope_window_hi))
            throw InvalidInputError("slope_window: low edge must be below high edge");
    }
    if (doc.contains("diag_ratio_max")) {
        double r = as_number(doc["diag_ratio_max"], "diag_ratio_max");
        if (!(r >= 1.0)) throw InvalidInputError("diag_ratio_max: must be at least 1");
        cfg.study.diag_ratio_max = r;
    }
    if (doc.contains("growth_exponent_max"))
        cfg.study.growth_exponent_max = as_number(doc["growth_exponent_max"], "growth_exponent_max");
    if (doc.contains("monotone_fraction_min")) {
        double f = as_number(doc["monotone_fraction_min"], "monotone_fraction_min");
        if (f < 0.0 || f > 1.0)
            throw InvalidInputError("monotone_fraction_min: must lie in [0, 1]");
        cfg.study.monotone_fraction_min = f;
    }
    if (doc.contains("write_paths")) cfg.write_paths = as_bool(doc["write_paths"], "write_paths");
    if (doc.contains("write_flow")) cfg.write_flow = as_bool(doc["write_flow"], "write_flow");
    return cfg;
}

std::string config_to_json(const CliConfig& cfg) {
    ordered_json j;
    j["command"] = cfg.command;
    j["seed"] = cfg.study.seed;
    j["model"] = cfg.study.model_name;
    j["params"] = ordered_json::object();
    for (const auto& [k, v] : cfg.study.model_params) j["params"][k] = v;
    j["scheme"] = cfg.study.scheme;
    j["T"] = cfg.study.T;
    j["steps"] = cfg.study.steps;
    j["N_list"] = cfg.study.n_list;
    j["reps"] = cfg.study.repetitions;
    j["source_nodes"] = cfg.source_nodes.value_or(is_study_command(cfg.command) ? 4 : 8);
    j["init"] = init_echo(cfg.study.init);
    j["particles"] = cfg.study.particles;
    j["samples"] = cfg.samples;
    long ref = cfg.study.reference_samples > 0 ? cfg.study.reference_samples
                                               : 8 * cfg.study.n_list.back();
    j["reference_samples"] = ref;
    j["tol"] = cfg.tol;
    j["max_iterations"] = cfg.max_iterations;
    j["epsilon"] = cfg.epsilon;
    j["check_paths"] = cfg.check_paths;
    j["variance_factors"] = cfg.study.variance_factors;
    j["slope_window"] = {cfg.study.slope_window_lo, cfg.study.slope_window_hi};
    j["diag_ratio_max"] = cfg.study.diag_ratio_max;
    j["growth_exponent_max"] = cfg.study.growth_exponent_max;
    j["monotone_fraction_min"] = cfg.study.monotone_fraction_min;
    j["write_paths"] = cfg.write_paths;
    j["write_flow"] = cfg.write_flow;
    return j.dump(2) + "\n";
}

int run_command(const CliConfig& cfg) {
    if (command_names().find(cfg.command) == command_names().end())
        throw InvalidInputError("unknown command \"" + cfg.command + "\"");
    set_max_threads(cfg.threads);
    // Surfaces unknown models/parameters before any directory is created.
    make_model(cfg.study.model_name, cfg.study.model_params);

    std::string dir = run_directory(cfg);
    write_text_file(dir + "/config.json", config_to_json(cfg));
    try {
        if (is_study_command(cfg.command)) return run_study(cfg, dir);
        if (cfg.command == "simulate") return run_simulate(cfg, dir);
        if (cfg.command == "picard") return run_picard(cfg, dir);
        return run_malliavin_check(cfg, dir);
    } catch (const DivergenceError& e) {
        ordered_json meta;
        meta["command"] = cfg.command;
        meta["pass"] = false;
        meta["error"] = e.what();
        meta["divergence"] = {{"time", e.time}, {"particle", e.particle}, {"step", e.step}};
        write_text_file(dir + "/meta.json", meta.dump(2) + "\n");
        std::cerr << "mvsde: " << e.what() << "\n";
        return 2;
    }
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Mean-field SDE simulation and derivative-propagation studies"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path, n_list_text, model_name, scheme_name_arg, label;
    std::uint64_t seed = 0;
    std::string outdir;
    long threads = -1, reps = 0, steps = 0;
    double dt = 0.0, horizon = 0.0;

    auto* config_opt = app.add_option("--config", config_path, "JSON config file");
    auto* seed_opt = app.add_option("--seed", seed, "base seed of every stream");
    auto* outdir_opt = app.add_option("--outdir", outdir, "output root directory");
    auto* threads_opt = app.add_option("--threads", threads, "worker cap; 0 = all cores");
    auto* nlist_opt = app.add_option("--N-list", n_list_text, "comma-separated ensemble sizes");
    auto* dt_opt = app.add_option("--dt", dt, "grid spacing (converted to steps)");
    auto* t_opt = app.add_option("--T", horizon, "time horizon");
    auto* steps_opt = app.add_option("--steps", steps, "grid step count");
    auto* reps_opt = app.add_option("--reps", reps, "study repetitions");
    auto* model_opt = app.add_option("--model", model_name, "model name");
    auto* scheme_opt = app.add_option("--scheme", scheme_name_arg, "euler | tamed | auto");
    auto* label_opt = app.add_option("--label", label, "run directory label instead of a timestamp");

    app.add_subcommand("simulate", "interacting ensemble run with per-node summaries");
    app.add_subcommand("picard", "fixed-point construction of the measure flow");
    app.add_subcommand("poc", "coupling gap of interacting vs decoupled ensembles");
    app.add_subcommand("malliavin-check", "derivative fields vs finite-difference oracle");
    app.add_subcommand("cross-decay", "cross-particle derivative decay in N");
    app.add_subcommand("psi", "ensemble-averaged derivative mass decay in N");
    app.add_subcommand("diagonal", "derivative transfer to the decoupled limit");
    app.add_subcommand("moments", "sup-moment growth in the initial condition");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CliConfig cfg;
        cfg.command = app.get_subcommands().front()->get_name();
        if (config_opt->count() > 0) cfg = parse_config_json(read_file(config_path), cfg);
        cfg.command = app.get_subcommands().front()->get_name();

        if (seed_opt->count() > 0) cfg.study.seed = seed;
        if (outdir_opt->count() > 0) cfg.outdir = outdir;
        if (threads_opt->count() > 0) {
            if (threads < 0) throw InvalidInputError("threads: must be nonnegative");
            cfg.threads = static_cast<unsigned>(threads);
        }
        if (model_opt->count() > 0) cfg.study.model_name = model_name;
        if (scheme_opt->count() > 0) {
            if (scheme_name_arg != "auto") parse_scheme(scheme_name_arg);
            cfg.study.scheme = scheme_name_arg;
        }
        if (label_opt->count() > 0) cfg.run_label = label;
        if (reps_opt->count() > 0) {
            if (reps < 1) throw InvalidInputError("reps: must be at least 1");
            cfg.study.repetitions = static_cast<int>(reps);
        }
        if (t_opt->count() > 0) {
            if (!(horizon > 0.0)) throw InvalidInputError("T: must be positive");
            cfg.study.T = horizon;
        }
        if (steps_opt->count() > 0 && dt_opt->count() > 0)
            throw InvalidInputError("steps: give either --steps or --dt, not both");
        if (steps_opt->count() > 0) {
            if (steps < 1) throw InvalidInputError("steps: must be at least 1");
            cfg.study.steps = steps;
        }
        if (dt_opt->count() > 0) cfg.study.steps = steps_from_dt(cfg.study.T, dt, "dt");
        if (nlist_opt->count() > 0) {
            std::vector<long> ns;
            std::stringstream ss(n_list_text);
            std::string item;
            while (std::getline(ss, item, ',')) {
                try {
                    std::size_t pos = 0;
                    long v = std::stol(item, &pos);
                    if (pos != item.size() || v < 1) throw std::invalid_argument(item);
                    ns.push_back(v);
                } catch (const std::exception&) {
                    throw InvalidInputError("N_list: cannot parse \"" + item + "\"");
                }
            }
            if (ns.empty()) throw InvalidInputError("N_list: expected comma-separated integers");
            cfg.study.n_list = ns;
        }
        return run_command(cfg);
    } catch (const InvalidInputError& e) {
        std::cerr << "mvsde: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "mvsde: " << e.what() << "\n";
        return 2;
    }
}

} // namespace mvsde
