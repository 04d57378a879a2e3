#pragma once

// Machine-readable run reports.  Reports deliberately carry no timings or
// host details: identical configs and seeds must serialize byte-identically
// regardless of thread count.

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lorlab/config.hpp"
#include "lorlab/version.hpp"

namespace lorlab {

using Json = nlohmann::ordered_json;

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct RunReport {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<CheckResult> checks;
    Json extra = Json::object();          // experiment-specific numbers
    std::vector<std::string> artifacts;   // files written under --out
    bool expect_negative = false;
    std::string error;                    // nonempty on internal failure

    CheckResult& add_check(const std::string& name, double measured, double tolerance,
                           bool passed, const std::string& detail = "") {
        checks.push_back({name, passed, measured, tolerance, detail});
        return checks.back();
    }

    bool all_passed() const {
        for (const CheckResult& c : checks)
            if (!c.passed) return false;
        return true;
    }

    // Exit-code semantics: expected-negative runs invert the verdict.
    bool run_passes() const {
        if (!error.empty()) return false;
        return expect_negative ? !all_passed() : all_passed();
    }

    Json to_json() const {
        Json j;
        j["schema"] = kReportSchema;
        j["version"] = kVersion;
        j["experiment"] = experiment;
        Json echo = Json::array();
        for (const auto& [k, v] : config_echo) echo.push_back(Json::array({k, v}));
        j["config"] = echo;
        j["expect_negative"] = expect_negative;
        Json jc = Json::array();
        for (const CheckResult& c : checks) {
            Json e;
            e["name"] = c.name;
            e["passed"] = c.passed;
            e["measured"] = c.measured;
            e["tolerance"] = c.tolerance;
            if (!c.detail.empty()) e["detail"] = c.detail;
            jc.push_back(e);
        }
        j["checks"] = jc;
        if (!extra.empty()) j["results"] = extra;
        j["artifacts"] = artifacts;
        if (!error.empty()) j["error"] = error;
        j["status"] = !error.empty() ? "error" : (run_passes() ? "pass" : "fail");
        return j;
    }

    void write(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open " + path);
        os << to_json().dump(2) << "\n";
    }
};

}  // namespace lorlab
