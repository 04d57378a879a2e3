// lorlab experiment runner.
//
//   lorlab <experiment> --config <path> [--out <dir>] [--threads N]
//          [--expect-negative]
//
// Exit codes: 0 all asserted checks pass (or an expected-negative run fails
// as declared), 1 check failure, 2 usage/config error, 3 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lorlab/experiments.hpp"
#include "lorlab/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"lorlab: numerical laboratory for Lorentzian splitting objects"};
    std::string experiment, config_path, out_dir;
    int threads = 0;
    bool expect_negative = false;
    app.add_option("experiment", experiment, "experiment name")->required();
    app.add_option("--config", config_path, "config file path")->required();
    app.add_option("--out", out_dir, "output directory (default: current directory)");
    app.add_option("--threads", threads, "worker cap (default: LORLAB_THREADS or hardware)");
    app.add_flag("--expect-negative", expect_negative,
                 "declare the run an expected negative: exit 0 iff a check fails");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    lorlab::ExperimentConfig cfg;
    try {
        if (!lorlab::known_experiments().count(experiment)) {
            std::cerr << "error: unknown experiment '" << experiment << "'\n";
            return 2;
        }
        std::ifstream is(config_path);
        if (!is) {
            std::cerr << "error: cannot open config '" << config_path << "'\n";
            return 2;
        }
        std::stringstream buf;
        buf << is.rdbuf();
        cfg = lorlab::parse_config(buf.str());
        if (cfg.experiment != experiment) {
            std::cerr << "error: config declares experiment '" << cfg.experiment
                      << "', command line says '" << experiment << "'\n";
            return 2;
        }
    } catch (const lorlab::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (expect_negative) cfg.expect_negative = true;
    if (out_dir.empty()) out_dir = cfg.out_dir.empty() ? "." : cfg.out_dir;

    lorlab::RunReport rep;
    try {
        std::filesystem::create_directories(out_dir);
        rep = lorlab::run_experiment(cfg, out_dir, threads);
    } catch (const std::exception& e) {
        rep.experiment = cfg.experiment;
        rep.config_echo = cfg.echo;
        rep.expect_negative = cfg.expect_negative;
        rep.error = e.what();
        try {
            rep.write((std::filesystem::path(out_dir) / "report.json").string());
        } catch (...) {
        }
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    const std::string report_path = (std::filesystem::path(out_dir) / "report.json").string();
    try {
        rep.write(report_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    for (const lorlab::CheckResult& c : rep.checks)
        std::cout << (c.passed ? "pass" : "FAIL") << "  " << c.name << "  measured="
                  << c.measured << "  tolerance=" << c.tolerance
                  << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
    std::cout << "report: " << report_path << "\n";
    return rep.run_passes() ? 0 : 1;
}
