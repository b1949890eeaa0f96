#pragma once

/**
 * @file config.hpp
 * @brief Run configuration: a flat JSON object, validated and default-filled.
 *
 * Keys (defaults in brackets):
 *   model            "planewave" | "spherical"                     [required]
 *   a, b, p          plane-wave amplitudes and momentum             [1, 0, 1]
 *   L                box length; planewave [6 pi hbar/p], spherical [40/k]
 *   k, slit_a        spherical wavenumber and source half-separation [5, 0.5]
 *   x_min            spherical sampling box lower x edge             [L/4]
 *   m, hbar                                                          [1, 1]
 *   method           "rk45" | "rk4"                                  [rk45]
 *   step, rel_tol, abs_tol, max_steps                   [1e-3, 1e-9, 1e-11, 1e6]
 *   n, seed          ensemble size and seed                          [1000, 42]
 *   analysis         list (or comma-separated string) of analyses    [trajectories]
 *   out              output directory                                [out]
 *   t_start, t_end, samples   time window and samples per trajectory [0, 3, 31]
 *   x1, x2           plane-wave initial positions                    [0.4, -0.1]
 *   r1, r2           spherical initial positions        [[1,0.3,0], [1,-0.3,0]]
 *   n_trajectories   extra |psi|^2-sampled trajectories written       [4]
 *   n_constraint     trajectories in the constraints audit           [100]
 *   n_oracle         random states in the oracle cross-check         [1000]
 *   grid             root-scan grid points                           [100000]
 *   scan_periods     scan interval +- scan_periods * pi hbar / p      [4]
 *   t_minus_t0       t - t0 for the uniqueness scan                  [0]
 *   marginal         spherical marginal coordinate 0..5              [1 (y1)]
 *   threads          worker threads for ensemble evolution           [1]
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bohm/errors.hpp"
#include "bohm/numerics/ode.hpp"
#include "bohm/planewave_pair.hpp"
#include "bohm/spherical_pair.hpp"
#include "json.hpp"

namespace bohm::config {

using nlohmann::json;

enum class Model { planewave, spherical };

enum class Analysis {
    trajectories,
    constraints,
    uniqueness,
    equivariance,
    global_constraint,
    oracle_crosscheck,
    density_discrepancy,
};

inline constexpr std::array<std::pair<Analysis, std::string_view>, 7> kAnalysisNames{{
    {Analysis::trajectories, "trajectories"},
    {Analysis::constraints, "constraints"},
    {Analysis::uniqueness, "uniqueness"},
    {Analysis::equivariance, "equivariance"},
    {Analysis::global_constraint, "global_constraint"},
    {Analysis::oracle_crosscheck, "oracle_crosscheck"},
    {Analysis::density_discrepancy, "density_discrepancy"},
}};

inline std::string_view to_string(Analysis a) {
    for (const auto& [k, v] : kAnalysisNames)
        if (k == a) return v;
    return "?";
}

inline std::string_view to_string(Model m) { return m == Model::planewave ? "planewave" : "spherical"; }

inline bool planewave_only(Analysis a) {
    return a == Analysis::uniqueness || a == Analysis::global_constraint || a == Analysis::density_discrepancy;
}

struct RunConfig {
    Model model = Model::planewave;
    planewave::Params planewave{};
    spherical::Params spherical{};
    numerics::IntegratorConfig integrator{};
    std::size_t n = 1000;
    std::uint64_t seed = 42;
    std::set<Analysis> analyses{Analysis::trajectories};
    std::string out_dir = "out";
    double t_start = 0.0;
    double t_end = 3.0;
    std::size_t samples = 31;
    std::array<double, 2> x_initial{0.4, -0.1};
    spherical::Vec3 r1{1.0, 0.3, 0.0};
    spherical::Vec3 r2{1.0, -0.3, 0.0};
    std::size_t n_trajectories = 4;
    std::size_t n_constraint = 100;
    std::size_t n_oracle = 1000;
    std::size_t grid = 100'000;
    double scan_periods = 4.0;
    double t_minus_t0 = 0.0;
    std::size_t marginal = 1;
    unsigned threads = 1;

    [[nodiscard]] bool has(Analysis a) const { return analyses.count(a) > 0; }
    [[nodiscard]] std::vector<double> sample_times() const {
        return numerics::linspace_samples(t_start, t_end, samples);
    }

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline double get_real(const json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(key, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
    return d;
}

inline std::uint64_t get_uint(const json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        if (v.get<std::int64_t>() < 0) throw ConfigError(key, "must be a non-negative integer");
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    throw ConfigError(key, "must be a non-negative integer");
}

inline spherical::Vec3 get_vec3(const json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 3) throw ConfigError(key, "must be a list of 3 numbers");
    spherical::Vec3 out{};
    for (std::size_t i = 0; i < 3; ++i) {
        if (!v[i].is_number()) throw ConfigError(key, "must be a list of 3 numbers");
        out[i] = v[i].get<double>();
    }
    return out;
}

inline Analysis parse_analysis(const std::string& name) {
    for (const auto& [k, v] : kAnalysisNames)
        if (v == name) return k;
    throw ConfigError("analysis", "unknown analysis '" + name + "'");
}

inline std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline const std::set<std::string>& common_keys() {
    static const std::set<std::string> keys{
        "model", "m", "hbar", "L", "method", "step", "rel_tol", "abs_tol", "max_steps", "n", "seed",
        "analysis", "out", "t_start", "t_end", "samples", "n_trajectories", "n_constraint", "n_oracle",
        "threads"};
    return keys;
}
inline const std::set<std::string>& planewave_keys() {
    static const std::set<std::string> keys{"a", "b", "p", "x1", "x2", "grid", "scan_periods", "t_minus_t0"};
    return keys;
}
inline const std::set<std::string>& spherical_keys() {
    static const std::set<std::string> keys{"k", "slit_a", "x_min", "r1", "r2", "marginal"};
    return keys;
}

}  // namespace detail

/// Builds a validated, default-filled RunConfig from a parsed JSON object.
inline RunConfig from_json(const json& j) {
    using namespace detail;
    if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    if (!j.contains("model")) throw ConfigError("model", "required");
    if (!j.at("model").is_string()) throw ConfigError("model", "must be \"planewave\" or \"spherical\"");

    RunConfig c;
    const auto model = j.at("model").get<std::string>();
    if (model == "planewave") {
        c.model = Model::planewave;
    } else if (model == "spherical") {
        c.model = Model::spherical;
    } else {
        throw ConfigError("model", "must be \"planewave\" or \"spherical\"");
    }

    const auto& own = c.model == Model::planewave ? planewave_keys() : spherical_keys();
    const auto& other = c.model == Model::planewave ? spherical_keys() : planewave_keys();
    for (const auto& [key, _] : j.items()) {
        if (common_keys().count(key) || own.count(key)) continue;
        if (other.count(key))
            throw ConfigError(key, "not valid for model " + std::string(to_string(c.model)));
        throw ConfigError(key, "unknown key");
    }

    auto has = [&](const char* k) { return j.contains(k); };
    const double m = has("m") ? get_real(j, "m") : 1.0;
    const double hbar = has("hbar") ? get_real(j, "hbar") : 1.0;
    const double L = has("L") ? get_real(j, "L") : 0.0;
    if (has("L") && !(L > 0.0)) throw ConfigError("L", "must be > 0");

    if (c.model == Model::planewave) {
        auto& pw = c.planewave;
        pw.m = m;
        pw.hbar = hbar;
        if (has("a")) pw.a = get_real(j, "a");
        if (has("b")) pw.b = get_real(j, "b");
        if (has("p")) pw.p = get_real(j, "p");
        pw.box_length = L;
        pw.validate();
        pw.box_length = pw.length();
        if (has("x1")) c.x_initial[0] = get_real(j, "x1");
        if (has("x2")) c.x_initial[1] = get_real(j, "x2");
        if (has("grid")) c.grid = get_uint(j, "grid");
        if (c.grid < 2) throw ConfigError("grid", "must be >= 2");
        if (has("scan_periods")) c.scan_periods = get_real(j, "scan_periods");
        if (!(c.scan_periods > 0.0)) throw ConfigError("scan_periods", "must be > 0");
        if (has("t_minus_t0")) c.t_minus_t0 = get_real(j, "t_minus_t0");
    } else {
        auto& sp = c.spherical;
        sp.m = m;
        sp.hbar = hbar;
        if (has("k")) sp.k = get_real(j, "k");
        if (has("slit_a")) sp.slit_a = get_real(j, "slit_a");
        sp.box_length = L;
        if (has("x_min")) {
            sp.x_min = get_real(j, "x_min");
            if (sp.x_min < 0.0) throw ConfigError("x_min", "must be >= 0");
        }
        sp.validate();
        sp.box_length = sp.length();
        sp.x_min = sp.sampling_x_min();
        if (has("r1")) c.r1 = get_vec3(j, "r1");
        if (has("r2")) c.r2 = get_vec3(j, "r2");
        if (c.r1[0] < 0.0) throw ConfigError("r1", "x component must be >= 0");
        if (c.r2[0] < 0.0) throw ConfigError("r2", "x component must be >= 0");
        if (has("marginal")) c.marginal = get_uint(j, "marginal");
        if (c.marginal > 5) throw ConfigError("marginal", "must be in 0..5");
    }

    auto& ic = c.integrator;
    if (has("method")) {
        if (!j.at("method").is_string()) throw ConfigError("method", "must be \"rk45\" or \"rk4\"");
        const auto meth = j.at("method").get<std::string>();
        if (meth == "rk45") {
            ic.method = numerics::Method::rk45_adaptive;
        } else if (meth == "rk4") {
            ic.method = numerics::Method::rk4_fixed;
        } else {
            throw ConfigError("method", "must be \"rk45\" or \"rk4\"");
        }
    }
    if (has("step")) ic.step = get_real(j, "step");
    if (!(ic.step > 0.0)) throw ConfigError("step", "must be > 0");
    if (has("rel_tol")) ic.rel_tol = get_real(j, "rel_tol");
    if (!(ic.rel_tol > 0.0)) throw ConfigError("rel_tol", "must be > 0");
    if (has("abs_tol")) ic.abs_tol = get_real(j, "abs_tol");
    if (!(ic.abs_tol > 0.0)) throw ConfigError("abs_tol", "must be > 0");
    if (has("max_steps")) ic.max_steps = get_uint(j, "max_steps");
    if (ic.max_steps < 1) throw ConfigError("max_steps", "must be >= 1");

    if (has("n")) c.n = get_uint(j, "n");
    if (c.n < 1) throw ConfigError("n", "must be >= 1");
    if (has("seed")) c.seed = get_uint(j, "seed");

    if (has("analysis")) {
        const auto& a = j.at("analysis");
        std::vector<std::string> names;
        if (a.is_string()) {
            names = split_commas(a.get<std::string>());
        } else if (a.is_array()) {
            for (const auto& e : a) {
                if (!e.is_string()) throw ConfigError("analysis", "entries must be strings");
                names.push_back(e.get<std::string>());
            }
        } else {
            throw ConfigError("analysis", "must be a list of analysis names");
        }
        c.analyses.clear();
        for (const auto& nm : names) c.analyses.insert(parse_analysis(nm));
    }
    if (c.model == Model::spherical) {
        for (auto a : c.analyses)
            if (planewave_only(a))
                throw ConfigError("analysis", std::string(to_string(a)) + " requires model planewave");
    }

    if (has("out")) {
        if (!j.at("out").is_string()) throw ConfigError("out", "must be a string");
        c.out_dir = j.at("out").get<std::string>();
    }
    if (has("t_start")) c.t_start = get_real(j, "t_start");
    if (has("t_end")) c.t_end = get_real(j, "t_end");
    if (has("samples")) c.samples = get_uint(j, "samples");
    if (c.samples < 2) throw ConfigError("samples", "must be >= 2");
    if (has("n_trajectories")) c.n_trajectories = get_uint(j, "n_trajectories");
    if (has("n_constraint")) c.n_constraint = get_uint(j, "n_constraint");
    if (c.n_constraint < 1) throw ConfigError("n_constraint", "must be >= 1");
    if (has("n_oracle")) c.n_oracle = get_uint(j, "n_oracle");
    if (c.n_oracle < 1) throw ConfigError("n_oracle", "must be >= 1");
    if (has("threads")) c.threads = static_cast<unsigned>(get_uint(j, "threads"));
    if (c.threads < 1) throw ConfigError("threads", "must be >= 1");
    return c;
}

/// Parses config text and validates it.
inline RunConfig validate_config(std::string_view raw) {
    json j;
    try {
        j = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    return from_json(j);
}

/// Every key with its resolved value; from_json(to_json(c)) == c.
inline json to_json(const RunConfig& c) {
    json j;
    j["model"] = to_string(c.model);
    if (c.model == Model::planewave) {
        const auto& pw = c.planewave;
        j["a"] = pw.a;
        j["b"] = pw.b;
        j["p"] = pw.p;
        j["m"] = pw.m;
        j["hbar"] = pw.hbar;
        j["L"] = pw.box_length;
        j["x1"] = c.x_initial[0];
        j["x2"] = c.x_initial[1];
        j["grid"] = c.grid;
        j["scan_periods"] = c.scan_periods;
        j["t_minus_t0"] = c.t_minus_t0;
    } else {
        const auto& sp = c.spherical;
        j["k"] = sp.k;
        j["slit_a"] = sp.slit_a;
        j["m"] = sp.m;
        j["hbar"] = sp.hbar;
        j["L"] = sp.box_length;
        j["x_min"] = sp.x_min;
        j["r1"] = c.r1;
        j["r2"] = c.r2;
        j["marginal"] = c.marginal;
    }
    j["method"] = std::string(numerics::to_string(c.integrator.method));
    j["step"] = c.integrator.step;
    j["rel_tol"] = c.integrator.rel_tol;
    j["abs_tol"] = c.integrator.abs_tol;
    j["max_steps"] = c.integrator.max_steps;
    j["n"] = c.n;
    j["seed"] = c.seed;
    json names = json::array();
    for (auto a : c.analyses) names.push_back(std::string(to_string(a)));
    j["analysis"] = names;
    j["out"] = c.out_dir;
    j["t_start"] = c.t_start;
    j["t_end"] = c.t_end;
    j["samples"] = c.samples;
    j["n_trajectories"] = c.n_trajectories;
    j["n_constraint"] = c.n_constraint;
    j["n_oracle"] = c.n_oracle;
    j["threads"] = c.threads;
    return j;
}

}  // namespace bohm::config
