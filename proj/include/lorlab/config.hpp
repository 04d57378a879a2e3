#pragma once

// Line-based `key = value` experiment configs with dotted keys and strict
// unknown-key rejection; every diagnostic carries its line number.

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lorlab {

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(int ln, const std::string& what)
        : std::runtime_error("config line " + std::to_string(ln) + ": " + what), line(ln) {}
};

struct ExperimentConfig {
    std::string experiment;
    std::string model_name;
    std::map<std::string, std::string> model_params;
    std::vector<int> grid_shape;
    double p = 0.5;
    std::vector<double> q_list{0.5};
    std::vector<double> r_ladder{5.0, 10.0, 20.0, 40.0};
    uint64_t seed = 1;
    double tolerance = 0.0;  // 0 = module default
    bool expect_negative = false;
    std::vector<double> point_x, point_y;  // timesep endpoints
    double slice_t0 = 1.0;                 // hawking slice
    int stencil_radius = 3;
    std::string out_dir;  // optional; --out overrides

    // Ordered echo of the parsed lines, replayed verbatim into reports.
    std::vector<std::pair<std::string, std::string>> echo;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
    return out;
}

inline double parse_double(const std::string& v, int line) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(line, "expected a number, got '" + v + "'");
    }
}

inline std::vector<double> parse_doubles(const std::string& v, int line) {
    std::vector<double> out;
    for (const std::string& c : split(v, ',')) out.push_back(parse_double(c, line));
    if (out.empty()) throw ConfigError(line, "expected a comma-separated number list");
    return out;
}

inline bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(line, "expected a boolean, got '" + v + "'");
}

}  // namespace config_detail

inline const std::set<std::string>& known_experiments() {
    static const std::set<std::string> names{"timesep",    "busemann", "compare", "bochner",
                                            "split",      "energycond", "hawking", "seccheck"};
    return names;
}

inline ExperimentConfig parse_config(const std::string& text) {
    using namespace config_detail;
    static const std::set<std::string> model_param_keys{
        "dim", "halfwidth", "tmin", "tmax", "radius", "radius1",
        "radius2", "eps", "width", "a", "spatial_dims"};
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    bool p_seen = false;
    int p_line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(line, "empty key");
        if (val.empty()) throw ConfigError(line, "empty value for '" + key + "'");
        cfg.echo.emplace_back(key, val);
        if (key == "experiment") {
            if (!known_experiments().count(val))
                throw ConfigError(line, "unknown experiment '" + val + "'");
            cfg.experiment = val;
        } else if (key == "model.name") {
            cfg.model_name = val;
        } else if (key.rfind("model.", 0) == 0) {
            const std::string param = key.substr(6);
            if (!model_param_keys.count(param))
                throw ConfigError(line, "unknown model parameter '" + param + "'");
            cfg.model_params[param] = val;
        } else if (key == "grid.shape") {
            cfg.grid_shape.clear();
            for (double d : parse_doubles(val, line)) {
                if (d < 2 || d != std::floor(d))
                    throw ConfigError(line, "grid.shape entries must be integers >= 2");
                cfg.grid_shape.push_back(static_cast<int>(d));
            }
        } else if (key == "p") {
            cfg.p = parse_double(val, line);
            p_seen = true;
            p_line = line;
        } else if (key == "q") {
            cfg.q_list = parse_doubles(val, line);
        } else if (key == "r") {
            cfg.r_ladder = parse_doubles(val, line);
        } else if (key == "seed") {
            cfg.seed = static_cast<uint64_t>(parse_double(val, line));
        } else if (key == "tolerance") {
            cfg.tolerance = parse_double(val, line);
        } else if (key == "expect_negative") {
            cfg.expect_negative = parse_bool(val, line);
        } else if (key == "x") {
            cfg.point_x = parse_doubles(val, line);
        } else if (key == "y") {
            cfg.point_y = parse_doubles(val, line);
        } else if (key == "slice_t0") {
            cfg.slice_t0 = parse_double(val, line);
        } else if (key == "stencil_radius") {
            const double d = parse_double(val, line);
            if (d < 1 || d != std::floor(d))
                throw ConfigError(line, "stencil_radius must be a positive integer");
            cfg.stencil_radius = static_cast<int>(d);
        } else if (key == "out") {
            cfg.out_dir = val;
        } else {
            throw ConfigError(line, "unknown key '" + key + "'");
        }
    }
    if (p_seen && (cfg.p >= 1.0 || cfg.p == 0.0))
        throw ConfigError(p_line, "p must be < 1 and nonzero");
    if (cfg.experiment.empty()) throw ConfigError(line, "missing 'experiment'");
    if (cfg.model_name.empty()) throw ConfigError(line, "missing 'model.name'");
    for (double q : cfg.q_list)
        if (q >= 1.0 || q == 0.0) throw ConfigError(line, "q entries must be < 1 and nonzero");
    std::sort(cfg.r_ladder.begin(), cfg.r_ladder.end());
    return cfg;
}

}  // namespace lorlab
