#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "fourier.hpp"
#include "lattice.hpp"
#include "rigidity.hpp"

namespace anosov {

using json = nlohmann::json;

struct ModeSpec {
    std::array<int, 2> k{0, 1};
    std::string kind = "sin";  // sin | cos
    Vec2 amplitude{0.0, 0.0};
};

struct Prop1Spec {
    std::string source = "synthetic";  // synthetic | conjugacy
    double slope = 1.0;
    double amplitude = 0.1;
    double frequency = 1.0;
    double y0 = 0.0;
    std::array<double, 2> domain{-0.08, 0.08};
    std::string direction = "unstable";  // conjugacy source only
};

struct ExperimentConfig {
    std::vector<IntMatrix2> generators;
    ActionKind kind = ActionKind::linear;
    std::vector<ModeSpec> modes;
    std::optional<double> derivative_norm;

    int N = 256;
    double solver_tolerance = 1e-9;
    int max_sweeps = 500;
    int field_iterations = 30;
    double leaf_step = 1e-3;
    double leaf_length = 1.0;
    double eps = 0.05;
    int heteroclinic_radius = 1;
    int max_period = 2;
    int holder_samples = 100;
    int jacobian_samples = 20;
    double jacobian_step = 1e-3;
    int cone_grid = 128;
    int cone_iterations = 20;
    double cone_aperture = 0.3;

    Thresholds thresholds;

    std::string name = "run";
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    Vec2 basepoint{0.2, 0.6};
    Prop1Spec prop1;
    std::vector<double> factor_s{0.0, 0.05, 0.1, 1.0};

    json echo;  // resolved document, defaults included

    FourierPerturbation perturbation() const {
        std::vector<FourierMode> ms;
        for (const auto& m : modes)
            ms.push_back(m.kind == "sin" ? FourierPerturbation::sine(m.k, m.amplitude)
                                         : FourierPerturbation::cosine(m.k, m.amplitude));
        FourierPerturbation p(ms);
        if (derivative_norm && !p.is_zero()) p = p.scaled(*derivative_norm / p.derivative_bound());
        return p;
    }

    TeichmullerSetup teichmuller_setup() const {
        TeichmullerSetup s;
        s.gamma1 = generators.at(0);
        s.gamma2 = generators.size() > 1 ? generators[1] : generators[0];
        s.kind = kind;
        s.modes = perturbation();
        s.N = N;
        s.solver_tolerance = solver_tolerance;
        s.field_iterations = field_iterations;
        s.leaf_step = leaf_step;
        s.eps = eps;
        s.heteroclinic_radius = heteroclinic_radius;
        s.max_period = max_period;
        s.basepoint = basepoint;
        s.cones = ConeParams{cone_aperture, {1.0, 0.0}, cone_iterations, cone_grid, std::nullopt};
        s.holder_samples = holder_samples;
        s.jacobian_samples = jacobian_samples;
        s.jacobian_step = jacobian_step;
        s.seed = seed;
        s.thresholds = thresholds;
        return s;
    }
};

inline json default_config_document() {
    return json::parse(R"({
  "group": {"generators": [[2, 1, 1, 1], [1, 1, 1, 2]]},
  "action": {"kind": "linear", "modes": [], "derivative_norm": null},
  "resolution": {
    "N": 256, "solver_tolerance": 1e-9, "max_sweeps": 500, "field_iterations": 30,
    "leaf_step": 0.001, "leaf_length": 1.0, "eps": 0.05, "heteroclinic_radius": 1, "max_period": 2,
    "holder_samples": 100, "jacobian_samples": 20, "jacobian_step": 0.001,
    "cone_grid": 128, "cone_iterations": 20, "cone_aperture": 0.3
  },
  "thresholds": {"transversality": 0.05, "lemma3": 0.001, "prop1": 1e-6, "jacobian": 0.001, "obstruction": 0.0001},
  "experiment": {
    "name": "run", "output_dir": "out", "seed": 1, "basepoint": [0.2, 0.6],
    "prop1": {"source": "synthetic", "slope": 1.0, "amplitude": 0.1, "frequency": 1.0, "y0": 0.0,
              "domain": [-0.08, 0.08], "direction": "unstable"},
    "factorize": {"s": [0.0, 0.05, 0.1, 1.0]}
  }
})");
}

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& msg) {
    throw Error(ErrorCode::ConfigError, path + ": " + msg);
}

/// Recursively overlays `user` on `base`; keys absent from `base` are rejected.
inline void overlay(json& base, const json& user, const std::string& path) {
    if (!user.is_object()) config_fail(path.empty() ? "<root>" : path, "expected an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string p = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) config_fail(p, "unknown key");
        json& slot = base[it.key()];
        if (slot.is_object() && it.value().is_object())
            overlay(slot, it.value(), p);
        else
            slot = it.value();
    }
}

inline double number_at(const json& doc, const std::string& path) {
    const json* j = &doc;
    std::stringstream ss(path);
    for (std::string part; std::getline(ss, part, '.');) j = &(*j)[part];
    if (!j->is_number()) config_fail(path, "expected a number");
    return j->get<double>();
}

inline const json& node_at(const json& doc, const std::string& path) {
    const json* j = &doc;
    std::stringstream ss(path);
    for (std::string part; std::getline(ss, part, '.');) j = &(*j)[part];
    return *j;
}

inline double positive(const json& doc, const std::string& path) {
    const double v = number_at(doc, path);
    if (!(v > 0.0) || !std::isfinite(v)) config_fail(path, "must be strictly positive");
    return v;
}

inline int integer_at(const json& doc, const std::string& path, int lo, int hi) {
    const json& j = node_at(doc, path);
    if (!j.is_number_integer()) config_fail(path, "expected an integer");
    const auto v = j.get<long long>();
    if (v < lo || v > hi) config_fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

inline std::string string_at(const json& doc, const std::string& path, std::initializer_list<const char*> allowed) {
    const json& j = node_at(doc, path);
    if (!j.is_string()) config_fail(path, "expected a string");
    const auto s = j.get<std::string>();
    if (allowed.size() == 0) return s;
    for (const char* a : allowed)
        if (s == a) return s;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    config_fail(path, "must be one of {" + list + "}");
}

inline Vec2 vec2_at(const json& doc, const std::string& path) {
    const json& j = node_at(doc, path);
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        config_fail(path, "expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// Applies `key=value` with a dotted key; the value is read as JSON when it
/// parses, otherwise as a string.
inline void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) detail::config_fail(assignment, "override must look like key=value");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* j = &doc;
    std::stringstream ss(key);
    std::string part, walked;
    while (std::getline(ss, part, '.')) {
        walked += (walked.empty() ? "" : ".") + part;
        if (!j->is_object() || !j->contains(part)) detail::config_fail(walked, "unknown key");
        j = &(*j)[part];
    }
    *j = value;
}

/// Validates a fully resolved document and converts it.
inline ExperimentConfig parse_config(const json& doc) {
    using namespace detail;
    ExperimentConfig c;
    c.echo = doc;

    const json& gens = node_at(doc, "group.generators");
    if (!gens.is_array() || gens.empty()) config_fail("group.generators", "expected a non-empty list of [a, b, c, d]");
    for (std::size_t i = 0; i < gens.size(); ++i) {
        const std::string p = "group.generators[" + std::to_string(i) + "]";
        const json& g = gens[i];
        if (!g.is_array() || g.size() != 4) config_fail(p, "expected [a, b, c, d]");
        std::array<std::int64_t, 4> e{};
        for (std::size_t k = 0; k < 4; ++k) {
            if (!g[k].is_number_integer()) config_fail(p, "entries must be integers");
            e[k] = g[k].get<std::int64_t>();
        }
        if (e[0] * e[3] - e[1] * e[2] != 1) config_fail(p, "determinant must be 1");
        c.generators.emplace_back(e[0], e[1], e[2], e[3]);
    }

    const std::string kind = string_at(doc, "action.kind", {"linear", "conjugated", "perturbed"});
    c.kind = kind == "linear" ? ActionKind::linear : kind == "conjugated" ? ActionKind::conjugated : ActionKind::perturbed;
    const json& modes = node_at(doc, "action.modes");
    if (!modes.is_array()) config_fail("action.modes", "expected a list");
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const std::string p = "action.modes[" + std::to_string(i) + "]";
        const json& m = modes[i];
        if (!m.is_object()) config_fail(p, "expected {k, kind, amplitude}");
        for (auto it = m.begin(); it != m.end(); ++it)
            if (it.key() != "k" && it.key() != "kind" && it.key() != "amplitude") config_fail(p + "." + it.key(), "unknown key");
        ModeSpec ms;
        if (!m.contains("k") || !m["k"].is_array() || m["k"].size() != 2 || !m["k"][0].is_number_integer() ||
            !m["k"][1].is_number_integer())
            config_fail(p + ".k", "expected two integers");
        ms.k = {m["k"][0].get<int>(), m["k"][1].get<int>()};
        if (m.contains("kind")) {
            if (!m["kind"].is_string() || (m["kind"] != "sin" && m["kind"] != "cos"))
                config_fail(p + ".kind", "must be one of {sin, cos}");
            ms.kind = m["kind"].get<std::string>();
        }
        if (!m.contains("amplitude")) config_fail(p + ".amplitude", "missing");
        ms.amplitude = vec2_at(m, "amplitude");
        c.modes.push_back(ms);
    }
    const json& dn = node_at(doc, "action.derivative_norm");
    if (!dn.is_null()) {
        c.derivative_norm = number_at(doc, "action.derivative_norm");
        if (*c.derivative_norm < 0.0) config_fail("action.derivative_norm", "must be non-negative");
    }
    if (c.kind != ActionKind::linear && c.modes.empty() && c.derivative_norm.value_or(0.0) > 0.0)
        config_fail("action.modes", "derivative_norm needs at least one mode");
    if (c.kind == ActionKind::conjugated && c.perturbation().derivative_bound() >= 1.0)
        config_fail("action", "marking displacement must have derivative bound < 1");

    c.N = integer_at(doc, "resolution.N", 64, 1024);
    if ((c.N & (c.N - 1)) != 0) config_fail("resolution.N", "must be a power of two in [64, 1024]");
    c.solver_tolerance = positive(doc, "resolution.solver_tolerance");
    c.max_sweeps = integer_at(doc, "resolution.max_sweeps", 1, 100000);
    c.field_iterations = integer_at(doc, "resolution.field_iterations", 1, 1000);
    c.leaf_step = positive(doc, "resolution.leaf_step");
    c.leaf_length = positive(doc, "resolution.leaf_length");
    c.eps = positive(doc, "resolution.eps");
    c.heteroclinic_radius = integer_at(doc, "resolution.heteroclinic_radius", 1, 3);
    c.max_period = integer_at(doc, "resolution.max_period", 1, 8);
    c.holder_samples = integer_at(doc, "resolution.holder_samples", 1, 100000);
    c.jacobian_samples = integer_at(doc, "resolution.jacobian_samples", 1, 100000);
    c.jacobian_step = positive(doc, "resolution.jacobian_step");
    c.cone_grid = integer_at(doc, "resolution.cone_grid", 1, 4096);
    c.cone_iterations = integer_at(doc, "resolution.cone_iterations", 1, 1000);
    c.cone_aperture = positive(doc, "resolution.cone_aperture");

    c.thresholds.transversality = positive(doc, "thresholds.transversality");
    c.thresholds.lemma3 = positive(doc, "thresholds.lemma3");
    c.thresholds.prop1 = positive(doc, "thresholds.prop1");
    c.thresholds.jacobian = positive(doc, "thresholds.jacobian");
    c.thresholds.obstruction = positive(doc, "thresholds.obstruction");

    c.name = string_at(doc, "experiment.name", {});
    c.output_dir = string_at(doc, "experiment.output_dir", {});
    const json& seed = node_at(doc, "experiment.seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
        config_fail("experiment.seed", "expected a non-negative integer");
    c.seed = seed.get<std::uint64_t>();
    c.basepoint = vec2_at(doc, "experiment.basepoint");

    c.prop1.source = string_at(doc, "experiment.prop1.source", {"synthetic", "conjugacy"});
    c.prop1.slope = number_at(doc, "experiment.prop1.slope");
    c.prop1.amplitude = number_at(doc, "experiment.prop1.amplitude");
    c.prop1.frequency = number_at(doc, "experiment.prop1.frequency");
    c.prop1.y0 = number_at(doc, "experiment.prop1.y0");
    const Vec2 d = vec2_at(doc, "experiment.prop1.domain");
    if (!(d.x < c.prop1.y0 && c.prop1.y0 < d.y)) config_fail("experiment.prop1.domain", "must contain y0 in its interior");
    c.prop1.domain = {d.x, d.y};
    c.prop1.direction = string_at(doc, "experiment.prop1.direction", {"unstable", "stable"});
    if (c.prop1.source == "synthetic" &&
        !SyntheticHomeomorphism{c.prop1.slope, c.prop1.amplitude, c.prop1.frequency}.monotone())
        config_fail("experiment.prop1", "synthetic h must be strictly monotone (|amplitude * frequency| < |slope|)");

    const json& fs = node_at(doc, "experiment.factorize.s");
    if (!fs.is_array()) config_fail("experiment.factorize.s", "expected a list of numbers");
    c.factor_s.clear();
    for (const auto& v : fs) {
        if (!v.is_number()) config_fail("experiment.factorize.s", "expected a list of numbers");
        c.factor_s.push_back(v.get<double>());
    }
    return c;
}

/// Defaults, then the user document, then `--set` overrides.
inline ExperimentConfig resolve_config(const json& user, const std::vector<std::string>& overrides = {}) {
    json doc = default_config_document();
    detail::overlay(doc, user, "");
    for (const auto& o : overrides) apply_override(doc, o);
    return parse_config(doc);
}

inline json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ConfigError, path + ": not valid JSON");
    return j;
}

}  // namespace anosov
