#include <doctest.h>

#include "mvsde/cli.hpp"
#include "mvsde/io.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace mvsde;
namespace fs = std::filesystem;

namespace {

int run_argv(std::vector<std::string> args) {
    std::vector<const char*> argv;
    argv.push_back("mvsde");
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path fresh_dir(const char* name) {
    fs::path dir = fs::temp_directory_path() / "mvsde_cli_test" / name;
    fs::remove_all(dir);
    return dir;
}

// Arguments shared by the tiny end-to-end runs: small grid, few particles.
// Three ensemble sizes keep the slope fits well-posed.
std::vector<std::string> tiny_study_args(const std::string& command, const fs::path& out,
                                         const std::string& label) {
    return {command, "--outdir", out.string(), "--label",  label, "--N-list", "4,8,16",
            "--reps", "4",        "--steps",   "20",       "--T", "0.25"};
}

} // namespace

TEST_CASE("json config preserves defaults and applies overrides") {
    CliConfig base;
    base.command = "psi";
    CliConfig cfg = parse_config_json(R"({
        "seed": 99,
        "model": "DoubleWell",
        "params": {"kappa": 0.25},
        "N_list": [8, 16],
        "reps": 6,
        "T": 0.5,
        "steps": 50,
        "scheme": "tamed",
        "init": {"type": "uniform", "lo": -1.0, "hi": 1.0},
        "particles": 32,
        "variance_factors": [1.0, 3.0],
        "slope_window": [-1.5, -0.5],
        "tol": 0.01,
        "samples": 128,
        "write_flow": true
    })",
                                      base);
    CHECK(cfg.study.seed == 99);
    CHECK(cfg.study.model_name == "DoubleWell");
    CHECK(cfg.study.model_params.at("kappa") == 0.25);
    REQUIRE(cfg.study.n_list.size() == 2);
    CHECK(cfg.study.n_list[1] == 16);
    CHECK(cfg.study.repetitions == 6);
    CHECK(cfg.study.T == 0.5);
    CHECK(cfg.study.steps == 50);
    CHECK(cfg.study.scheme == "tamed");
    CHECK(cfg.study.init.kind == InitSpec::Kind::Uniform);
    CHECK(cfg.study.init.p1 == -1.0);
    CHECK(cfg.study.particles == 32);
    CHECK(cfg.study.variance_factors[1] == 3.0);
    CHECK(cfg.study.slope_window_lo == -1.5);
    CHECK(cfg.tol == 0.01);
    CHECK(cfg.samples == 128);
    CHECK(cfg.write_flow);
    // Untouched keys keep their defaults.
    CHECK(!cfg.source_nodes.has_value());
    CHECK(cfg.check_paths == 100);
    CHECK(cfg.command == "psi");
}

TEST_CASE("json config rejects malformed input by name") {
    CliConfig base;
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"sede": 1})", base),
                         doctest::Contains("sede"), InvalidInputError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"steps": 10, "dt": 0.1})", base),
                         doctest::Contains("either steps or dt"), InvalidInputError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"steps": 0})", base), doctest::Contains("steps"),
                         InvalidInputError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"dt": 99.0, "T": 1.0})", base),
                         doctest::Contains("exceeds the horizon"), InvalidInputError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"init": {"type": "gaussian", "mean": 0, "spread": 1}})", base),
                         doctest::Contains("init"), InvalidInputError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"init": {"type": "nope"}})", base),
                         doctest::Contains("init"), InvalidInputError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"slope_window": [1.0]})", base),
                         doctest::Contains("slope_window"), InvalidInputError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"seed": "abc"})", base), doctest::Contains("seed"),
                         InvalidInputError);
    CHECK_THROWS_WITH_AS(parse_config_json("{", base), doctest::Contains("config parse error"),
                         InvalidInputError);
    CHECK_THROWS_WITH_AS(parse_config_json("[1, 2]", base), doctest::Contains("object"),
                         InvalidInputError);
}

TEST_CASE("config echo omits execution-only knobs and round-trips") {
    CliConfig cfg;
    cfg.command = "poc";
    cfg.outdir = "somewhere/else";
    cfg.threads = 7;
    cfg.run_label = "mylabel";
    cfg.study.seed = 1234;
    cfg.study.model_name = "DoubleWell";
    std::string echo = config_to_json(cfg);
    CHECK(echo.find("somewhere") == std::string::npos);
    CHECK(echo.find("threads") == std::string::npos);
    CHECK(echo.find("mylabel") == std::string::npos);
    CHECK(echo.find("DoubleWell") != std::string::npos);
    CHECK(echo.find("1234") != std::string::npos);

    // The echo feeds back through --config; only the command stays with argv.
    CliConfig back = parse_config_json(echo, CliConfig{});
    back.command = cfg.command;
    CHECK(back.study.seed == 1234);
    CHECK(back.study.model_name == "DoubleWell");
    CHECK(back.study.n_list == cfg.study.n_list);
    CHECK(back.study.init.kind == cfg.study.init.kind);
    CHECK(config_to_json(back) == echo);
}

TEST_CASE("psi study runs end to end and writes its artifacts") {
    fs::path out = fresh_dir("psi");
    int code = run_argv(tiny_study_args("psi", out, "t1"));
    CHECK(code == 0);
    fs::path run = out / "psi-t1";
    REQUIRE(fs::exists(run));
    CHECK(fs::exists(run / "config.json"));
    CHECK(fs::exists(run / "results.csv"));
    CHECK(fs::exists(run / "results.dat"));
    CHECK(fs::exists(run / "meta.json"));
    std::string meta = slurp(run / "meta.json");
    CHECK(meta.find("\"pass\": true") != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("results are identical across thread counts") {
    // The diagonal study exercises the full pipeline: fixed-point reference
    // flow, coupled ensembles and both derivative recursions.
    fs::path out = fresh_dir("threads");
    auto args1 = tiny_study_args("diagonal", out, "serial");
    args1.push_back("--threads");
    args1.push_back("1");
    auto args4 = tiny_study_args("diagonal", out, "pool");
    args4.push_back("--threads");
    args4.push_back("4");
    CHECK(run_argv(args1) == 0);
    CHECK(run_argv(args4) == 0);
    CHECK(slurp(out / "diagonal-serial" / "results.csv") ==
          slurp(out / "diagonal-pool" / "results.csv"));
    CHECK(slurp(out / "diagonal-serial" / "meta.json") ==
          slurp(out / "diagonal-pool" / "meta.json"));
    CHECK(slurp(out / "diagonal-serial" / "config.json") ==
          slurp(out / "diagonal-pool" / "config.json"));
    fs::remove_all(out);
}

TEST_CASE("simulate writes summary rows and optional paths") {
    fs::path out = fresh_dir("simulate");
    int code = run_argv({"simulate", "--outdir", out.string(), "--label", "s1", "--steps", "20",
                         "--T", "0.25"});
    CHECK(code == 0);
    fs::path run = out / "simulate-s1";
    CHECK(fs::exists(run / "results.csv"));
    CHECK(!fs::exists(run / "paths.csv"));

    fs::path cfg_file = out / "sim_config.json";
    write_text_file(cfg_file.string(), R"({"write_paths": true, "steps": 10, "particles": 8})");
    int code2 = run_argv({"simulate", "--config", cfg_file.string(), "--outdir", out.string(),
                          "--label", "s2", "--T", "0.25"});
    CHECK(code2 == 0);
    CHECK(fs::exists(out / "simulate-s2" / "paths.csv"));
    fs::remove_all(out);
}

TEST_CASE("malliavin check passes on the stiff model") {
    fs::path out = fresh_dir("mcheck");
    int code = run_argv({"malliavin-check", "--outdir", out.string(), "--label", "m1", "--model",
                         "DoubleWell", "--steps", "50", "--T", "0.1"});
    CHECK(code == 0);
    std::string meta = slurp(out / "malliavin-check-m1" / "meta.json");
    CHECK(meta.find("max_rel_error") != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("picard run reports its residual trail") {
    fs::path out = fresh_dir("picard");
    fs::path cfg_file = out / "p.json";
    // 4096 samples keep the sweep-to-sweep residual floor below the default
    // tolerance for this initial law.
    write_text_file(cfg_file.string(),
                    R"({"steps": 40, "T": 0.5, "samples": 4096, "write_flow": true,
                        "init": {"type": "gaussian", "mean": 1.0, "std": 0.5}})");
    int code = run_argv({"picard", "--config", cfg_file.string(), "--outdir", out.string(),
                         "--label", "p1"});
    CHECK(code == 0);
    fs::path run = out / "picard-p1";
    std::string csv = slurp(run / "results.csv");
    CHECK(csv.find("iteration,residual") == 0);
    CHECK(fs::exists(run / "flow.csv"));
    std::string meta = slurp(run / "meta.json");
    CHECK(meta.find("\"converged\": true") != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("validation failures exit with code 2 before any run directory") {
    fs::path out = fresh_dir("errors");
    CHECK(run_argv({"psi", "--outdir", out.string(), "--label", "bad", "--model", "NoSuchModel"}) ==
          2);
    CHECK(!fs::exists(out / "psi-bad"));

    fs::path cfg_file = out / "bad.json";
    write_text_file(cfg_file.string(), R"({"steps": 0})");
    CHECK(run_argv({"psi", "--config", cfg_file.string(), "--outdir", out.string(), "--label",
                    "bad2"}) == 2);
    CHECK(!fs::exists(out / "psi-bad2"));

    CHECK(run_argv({"frobnicate"}) == 2);
    CHECK(run_argv({}) == 2);
    fs::remove_all(out);
}

TEST_CASE("divergence aborts with exit 2 and a diagnostic record") {
    fs::path out = fresh_dir("diverge");
    fs::path cfg_file = out / "d.json";
    // Plain Euler with dt = 0.1 on the cubic drift from a far-out start.
    write_text_file(cfg_file.string(),
                    R"({"model": "DoubleWell", "scheme": "euler", "steps": 10, "T": 1.0,
                        "particles": 4, "init": {"type": "constant", "value": 9.0}})");
    int code = run_argv({"simulate", "--config", cfg_file.string(), "--outdir", out.string(),
                         "--label", "d1"});
    CHECK(code == 2);
    fs::path run = out / "simulate-d1";
    REQUIRE(fs::exists(run / "meta.json"));
    std::string meta = slurp(run / "meta.json");
    CHECK(meta.find("divergence") != std::string::npos);
    CHECK(meta.find("\"pass\": false") != std::string::npos);
    fs::remove_all(out);
}
