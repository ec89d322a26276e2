#pragma once

// Flat "section.key = value" run configuration.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "radheat/error.hpp"
#include "radheat/solver.hpp"

namespace radheat {

class ConfigError : public error {
public:
    ConfigError(int line, std::string key, const std::string& what)
        : error("ConfigError: " + (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                (key.empty() ? std::string() : "'" + key + "': ") + what),
          line_(line),
          key_(std::move(key)) {}

    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

/// Locale-independent formatting with up to 12 significant digits.
inline std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
    return {buf, res.ptr};
}

struct RunConfig {
    std::string family = "polynomial";
    double beta = 2.0;
    int dimension = 3;
    double curvature = 1.0;
    double blend_inner = 0.5;
    double blend_outer = 1.0;

    double theta = 3.0;
    double c = 1.0;

    std::string weight_family = "auto";
    double weight_gamma = 2.0;

    double T = 1.0;
    double gamma = 1.0;
    /// Unset means min(1e-3, dr).
    std::optional<double> dt;
    double dr = 0.01;
    double R_min = 8.0;
    int R_levels = 4;
    /// Unset means automatic.
    std::optional<double> probe_r;
    std::vector<double> snapshots;
    bool parallel = false;

    double witness_r_max = 64.0;
    int witness_samples = 512;

    double quadrature_tol = 1e-10;

    int probe_max_doublings = 60;
    double probe_decay_ratio = 0.8;
    double probe_tol = 1e-2;

    ExhaustionThresholds thresholds;

    double time_step() const { return dt ? *dt : std::min(1e-3, dr); }
    std::vector<double> R_schedule() const {
        std::vector<double> out;
        for (int j = 0; j < R_levels; ++j) out.push_back(R_min * std::ldexp(1.0, j));
        return out;
    }
    ProbeOptions probe_options() const {
        ProbeOptions p;
        p.max_doublings = probe_max_doublings;
        p.decay_ratio = probe_decay_ratio;
        p.tol = probe_tol;
        return p;
    }
    WarpingFamily warping() const {
        WarpingFamily w;
        if (family == "euclidean") w = WarpingFamily::euclidean();
        else if (family == "hyperbolic") w = WarpingFamily::hyperbolic(curvature);
        else if (family == "exponential") w = WarpingFamily::exponential(beta);
        else w = WarpingFamily::polynomial(beta);
        w.blend_inner = blend_inner;
        w.blend_outer = blend_outer;
        return w;
    }
    ModelManifold manifold() const { return {warping(), dimension}; }
    Density density() const { return Density::power(c, theta); }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& text, int line, const std::string& key) {
    double x = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, x);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(x))
        throw ConfigError(line, key, "expected a real number, got '" + text + "'");
    return x;
}

inline int parse_int(const std::string& text, int line, const std::string& key) {
    int x = 0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, x);
    if (res.ec != std::errc() || res.ptr != end) throw ConfigError(line, key, "expected an integer, got '" + text + "'");
    return x;
}

inline bool parse_bool(const std::string& text, int line, const std::string& key) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError(line, key, "expected true or false, got '" + text + "'");
}

inline std::string parse_choice(const std::string& text, std::initializer_list<const char*> choices, int line,
                                const std::string& key) {
    for (const char* c : choices)
        if (text == c) return text;
    std::string all;
    for (const char* c : choices) all += (all.empty() ? "" : "|") + std::string(c);
    throw ConfigError(line, key, "expected one of " + all + ", got '" + text + "'");
}

}  // namespace detail

struct ConfigKey {
    const char* name;
    const char* description;
    std::function<void(RunConfig&, const std::string&, int)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline const std::vector<ConfigKey>& config_keys() {
    using detail::parse_bool;
    using detail::parse_choice;
    using detail::parse_int;
    using detail::parse_real;
    using cfg = RunConfig;
    using str = const std::string&;
    auto num = [](double x) { return format_number(x); };
    static const std::vector<ConfigKey> keys = {
        {"manifold.family", "euclidean|hyperbolic|exponential|polynomial",
         [](cfg& c, str v, int l) {
             c.family = parse_choice(v, {"euclidean", "hyperbolic", "exponential", "polynomial"}, l, "manifold.family");
         },
         [](const cfg& c) { return c.family; }},
        {"manifold.beta", "growth exponent of the exponential/polynomial families",
         [](cfg& c, str v, int l) { c.beta = parse_real(v, l, "manifold.beta"); },
         [num](const cfg& c) { return num(c.beta); }},
        {"manifold.dimension", "N >= 2",
         [](cfg& c, str v, int l) { c.dimension = parse_int(v, l, "manifold.dimension"); },
         [](const cfg& c) { return std::to_string(c.dimension); }},
        {"manifold.curvature", "c of the hyperbolic family",
         [](cfg& c, str v, int l) { c.curvature = parse_real(v, l, "manifold.curvature"); },
         [num](const cfg& c) { return num(c.curvature); }},
        {"manifold.blend_inner", "f = r below this radius (growth families)",
         [](cfg& c, str v, int l) { c.blend_inner = parse_real(v, l, "manifold.blend_inner"); },
         [num](const cfg& c) { return num(c.blend_inner); }},
        {"manifold.blend_outer", "family formula above this radius (growth families)",
         [](cfg& c, str v, int l) { c.blend_outer = parse_real(v, l, "manifold.blend_outer"); },
         [num](const cfg& c) { return num(c.blend_outer); }},
        {"density.theta", "rho = c (1 + r^2)^(-theta/2), theta >= 0",
         [](cfg& c, str v, int l) { c.theta = parse_real(v, l, "density.theta"); },
         [num](const cfg& c) { return num(c.theta); }},
        {"density.c", "density prefactor, > 0",
         [](cfg& c, str v, int l) { c.c = parse_real(v, l, "density.c"); },
         [num](const cfg& c) { return num(c.c); }},
        {"weight.family", "auto|power|logsquare",
         [](cfg& c, str v, int l) { c.weight_family = parse_choice(v, {"auto", "power", "logsquare"}, l, "weight.family"); },
         [](const cfg& c) { return c.weight_family; }},
        {"weight.gamma", "gamma of the log-square weight, > 1",
         [](cfg& c, str v, int l) { c.weight_gamma = parse_real(v, l, "weight.gamma"); },
         [num](const cfg& c) { return num(c.weight_gamma); }},
        {"run.T", "final time",
         [](cfg& c, str v, int l) { c.T = parse_real(v, l, "run.T"); },
         [num](const cfg& c) { return num(c.T); }},
        {"run.gamma", "boundary value",
         [](cfg& c, str v, int l) { c.gamma = parse_real(v, l, "run.gamma"); },
         [num](const cfg& c) { return num(c.gamma); }},
        {"run.dt", "time step (default min(1e-3, dr))",
         [](cfg& c, str v, int l) { c.dt = parse_real(v, l, "run.dt"); },
         [num](const cfg& c) { return num(c.time_step()); }},
        {"run.dr", "radial step",
         [](cfg& c, str v, int l) { c.dr = parse_real(v, l, "run.dr"); },
         [num](const cfg& c) { return num(c.dr); }},
        {"run.R_min", "smallest ball radius",
         [](cfg& c, str v, int l) { c.R_min = parse_real(v, l, "run.R_min"); },
         [num](const cfg& c) { return num(c.R_min); }},
        {"run.R_levels", "number of balls R_min 2^j",
         [](cfg& c, str v, int l) { c.R_levels = parse_int(v, l, "run.R_levels"); },
         [](const cfg& c) { return std::to_string(c.R_levels); }},
        {"run.probe_r", "probe radius or auto",
         [](cfg& c, str v, int l) {
             if (v == "auto") c.probe_r.reset();
             else c.probe_r = parse_real(v, l, "run.probe_r");
         },
         [num](const cfg& c) { return c.probe_r ? num(*c.probe_r) : std::string("auto"); }},
        {"run.snapshots", "comma-separated snapshot times for solve",
         [](cfg& c, str v, int l) {
             c.snapshots.clear();
             std::stringstream ss(v);
             for (std::string item; std::getline(ss, item, ',');)
                 if (auto t = detail::trim(item); !t.empty()) c.snapshots.push_back(parse_real(t, l, "run.snapshots"));
         },
         [num](const cfg& c) {
             std::string s;
             for (double t : c.snapshots) s += (s.empty() ? "" : ",") + num(t);
             return s;
         }},
        {"run.parallel", "solve the exhaustion levels concurrently",
         [](cfg& c, str v, int l) { c.parallel = parse_bool(v, l, "run.parallel"); },
         [](const cfg& c) { return std::string(c.parallel ? "true" : "false"); }},
        {"witness.r_max", "outer radius of the supersolution table",
         [](cfg& c, str v, int l) { c.witness_r_max = parse_real(v, l, "witness.r_max"); },
         [num](const cfg& c) { return num(c.witness_r_max); }},
        {"witness.samples", "rows of the supersolution CSV",
         [](cfg& c, str v, int l) { c.witness_samples = parse_int(v, l, "witness.samples"); },
         [](const cfg& c) { return std::to_string(c.witness_samples); }},
        {"quadrature.tol", "relative quadrature accuracy",
         [](cfg& c, str v, int l) { c.quadrature_tol = parse_real(v, l, "quadrature.tol"); },
         [num](const cfg& c) { return num(c.quadrature_tol); }},
        {"probe.max_doublings", "doubling panels of the divergence probe",
         [](cfg& c, str v, int l) { c.probe_max_doublings = parse_int(v, l, "probe.max_doublings"); },
         [](const cfg& c) { return std::to_string(c.probe_max_doublings); }},
        {"probe.decay_ratio", "panel ratio accepted as geometric decay",
         [](cfg& c, str v, int l) { c.probe_decay_ratio = parse_real(v, l, "probe.decay_ratio"); },
         [num](const cfg& c) { return num(c.probe_decay_ratio); }},
        {"probe.tol", "relative tail bound for a convergent verdict",
         [](cfg& c, str v, int l) { c.probe_tol = parse_real(v, l, "probe.tol"); },
         [num](const cfg& c) { return num(c.probe_tol); }},
        {"thresholds.nonunique_rel_change", "|v_last - v_prev| / (gamma T) below this",
         [](cfg& c, str v, int l) { c.thresholds.nonunique_rel_change = parse_real(v, l, "thresholds.nonunique_rel_change"); },
         [num](const cfg& c) { return num(c.thresholds.nonunique_rel_change); }},
        {"thresholds.nonunique_min", "v_last / (gamma T) at least this",
         [](cfg& c, str v, int l) { c.thresholds.nonunique_min = parse_real(v, l, "thresholds.nonunique_min"); },
         [num](const cfg& c) { return num(c.thresholds.nonunique_min); }},
        {"thresholds.unique_max", "v_last / (gamma T) at most this",
         [](cfg& c, str v, int l) { c.thresholds.unique_max = parse_real(v, l, "thresholds.unique_max"); },
         [num](const cfg& c) { return num(c.thresholds.unique_max); }},
        {"thresholds.unique_ratio", "every v_{j+1} / v_j at most this",
         [](cfg& c, str v, int l) { c.thresholds.unique_ratio = parse_real(v, l, "thresholds.unique_ratio"); },
         [num](const cfg& c) { return num(c.thresholds.unique_ratio); }},
    };
    return keys;
}

/// Apply one "key = value" assignment; line 0 marks a command-line override.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, int line = 0) {
    const auto& keys = config_keys();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return key == k.name; });
    if (it == keys.end()) throw ConfigError(line, key, "unknown key");
    it->set(cfg, value, line);
}

/// Range checks on a fully assembled configuration.
inline void validate(const RunConfig& c) {
    auto require = [](bool ok, const char* key, const std::string& what) {
        if (!ok) throw ConfigError(0, key, what);
    };
    require(c.dimension >= 2, "manifold.dimension", "dimension must be >= 2");
    require(c.theta >= 0.0, "density.theta", "theta must be >= 0");
    require(c.c > 0.0, "density.c", "c must be > 0");
    require(c.beta > 0.0, "manifold.beta", "beta must be > 0");
    require(c.family != "exponential" || c.beta <= 2.0, "manifold.beta", "exponential family needs beta <= 2");
    require(c.curvature > 0.0, "manifold.curvature", "curvature must be > 0");
    require(c.blend_inner > 0.0 && c.blend_outer > c.blend_inner, "manifold.blend_outer",
            "need 0 < blend_inner < blend_outer");
    require(c.weight_gamma > 1.0, "weight.gamma", "gamma must be > 1");
    require(c.T > 0.0, "run.T", "T must be > 0");
    require(c.gamma >= 0.0, "run.gamma", "gamma must be >= 0");
    require(c.dr > 0.0, "run.dr", "dr must be > 0");
    require(c.time_step() > 0.0, "run.dt", "dt must be > 0");
    require(c.R_min > 0.0, "run.R_min", "R_min must be > 0");
    require(c.R_levels >= 1, "run.R_levels", "R_levels must be >= 1");
    require(!c.probe_r || *c.probe_r > 0.0, "run.probe_r", "probe_r must be > 0");
    require(c.witness_r_max >= 1.0, "witness.r_max", "r_max must be >= 1");
    require(c.witness_samples >= 2, "witness.samples", "samples must be >= 2");
    require(c.quadrature_tol > 0.0, "quadrature.tol", "tol must be > 0");
    require(c.probe_max_doublings >= 1, "probe.max_doublings", "max_doublings must be >= 1");
    require(c.probe_decay_ratio > 0.0 && c.probe_decay_ratio < 1.0, "probe.decay_ratio", "decay_ratio must lie in (0, 1)");
    require(c.probe_tol > 0.0, "probe.tol", "tol must be > 0");
}

/// Parse config text, then apply "key=value" overrides in order.
inline RunConfig parse_config_text(std::string_view text, const std::vector<std::string>& overrides = {}) {
    RunConfig cfg;
    std::istringstream in{std::string(text)};
    int line_no = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line_no, line, "expected 'section.key = value'");
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        if (value.empty()) throw ConfigError(line_no, key, "missing value");
        apply_setting(cfg, key, value, line_no);
    }
    for (const std::string& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError(0, o, "override must be key=value");
        apply_setting(cfg, detail::trim(std::string_view(o).substr(0, eq)), detail::trim(std::string_view(o).substr(eq + 1)));
    }
    validate(cfg);
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path, const std::vector<std::string>& overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), overrides);
}

/// The effective configuration as config text.
inline std::string dump_config(const RunConfig& cfg) {
    std::string out;
    for (const ConfigKey& k : config_keys()) out += std::string(k.name) + " = " + k.get(cfg) + "\n";
    return out;
}

}  // namespace radheat
