#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "conjugacy.hpp"
#include "foliation.hpp"
#include "lattice.hpp"
#include "report.hpp"
#include "rigidity.hpp"
#include "torus_map.hpp"

namespace anosov {

namespace cli {

inline json to_json(Vec2 v) { return json::array({v.x, v.y}); }
inline json to_json(const IntMatrix2& m) { return json::array({m.a(), m.b(), m.c(), m.d()}); }

/// Records wall time of each named stage into the report's timings.
class Stopwatch {
public:
    explicit Stopwatch(RunReport& r) : report_(r) {}
    template <class F>
    auto operator()(const std::string& stage, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        struct Record {
            RunReport& r;
            std::string name;
            std::chrono::steady_clock::time_point t0;
            ~Record() {
                r.timings.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            }
        } rec{report_, stage, t0};
        return f();
    }

private:
    RunReport& report_;
};

struct BuiltAction {
    std::vector<HyperbolicElement> elements;
    std::vector<MapHandle> maps;  // one per generator; only g1 for a perturbed action
    std::optional<Diffeo> phi;
};

inline BuiltAction build_action(const ExperimentConfig& cfg) {
    BuiltAction a;
    for (const auto& g : cfg.generators) a.elements.push_back(eigen_data(g));
    if (cfg.kind == ActionKind::perturbed) {
        a.maps.push_back(std::make_shared<PerturbedMap>(cfg.generators.front(), cfg.perturbation()));
        return a;
    }
    a.phi = cfg.kind == ActionKind::linear ? Diffeo{} : build_diffeo(cfg.perturbation());
    const MarkedAction action = conjugated_action(*a.phi, cfg.generators);
    for (std::size_t i = 0; i < cfg.generators.size(); ++i) a.maps.push_back(action.map(i));
    return a;
}

inline void require_pair(const BuiltAction& a) {
    if (a.maps.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "needs a marked action with two generators");
}

struct FieldSet {
    LineField u1, s1, u2, s2;
};

inline FieldSet compute_fields(const ExperimentConfig& cfg, const BuiltAction& a) {
    require_pair(a);
    return {compute_line_field(a.maps[0], FieldLabel::unstable, cfg.N, cfg.field_iterations),
            compute_line_field(a.maps[0], FieldLabel::stable, cfg.N, cfg.field_iterations),
            compute_line_field(a.maps[1], FieldLabel::unstable, cfg.N, cfg.field_iterations),
            compute_line_field(a.maps[1], FieldLabel::stable, cfg.N, cfg.field_iterations)};
}

inline int run_eigen(const ExperimentConfig& cfg, RunReport& rep, Stopwatch&) {
    auto& tab = rep.table("eigen", {"generator", "a", "b", "c", "d", "lambda_u", "lambda_s", "v_u_x", "v_u_y", "v_s_x",
                                    "v_s_y", "sign"});
    std::vector<std::optional<HyperbolicElement>> els;
    json elements = json::array();
    for (std::size_t i = 0; i < cfg.generators.size(); ++i) {
        const IntMatrix2& g = cfg.generators[i];
        try {
            const auto e = eigen_data(g);
            elements.push_back({{"matrix", to_json(g)},
                                {"lambda_u", e.lambda_u},
                                {"lambda_s", e.lambda_s},
                                {"v_u", to_json(e.v_u)},
                                {"v_s", to_json(e.v_s)},
                                {"sign", e.sign}});
            tab.add(static_cast<int>(i), static_cast<long long>(g.a()), static_cast<long long>(g.b()),
                    static_cast<long long>(g.c()), static_cast<long long>(g.d()), e.lambda_u, e.lambda_s, e.v_u.x,
                    e.v_u.y, e.v_s.x, e.v_s.y, e.sign);
            els.push_back(e);
        } catch (const Error& err) {
            rep.errors.push_back("generator " + std::to_string(i) + ": " + err.what());
            elements.push_back({{"matrix", to_json(g)}, {"error", err.what()}});
            els.push_back(std::nullopt);
        }
    }
    rep.results["elements"] = elements;
    bool ok = false;
    if (els.size() >= 2 && els[0] && els[1]) {
        const auto cert = check_pair_hypothesis(*els[0], *els[1]);
        rep.results["min_pairwise_sine"] = cert.min_pairwise_sine;
        ok = cert.hypothesis_ok();
    } else {
        rep.results["min_pairwise_sine"] = nullptr;
    }
    rep.results["hypothesis_ok"] = ok;
    return ok ? 0 : 3;
}

inline double sup_distance(const Conjugacy& h, const Diffeo& phi, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double d = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Vec2 x{uni(rng), uni(rng)};
        d = std::max(d, torus_distance(h(x), phi(x)));
    }
    return d;
}

inline int run_conjugacy(const ExperimentConfig& cfg, RunReport& rep, Stopwatch& sw) {
    const BuiltAction a = build_action(cfg);
    ConjugacyOptions co;
    co.max_sweeps = cfg.max_sweeps;
    const Conjugacy h = sw("solve", [&] { return solve_conjugacy(a.elements[0], a.maps[0], cfg.N, cfg.solver_tolerance, co); });
    rep.results["residual"] = h.residual();
    rep.results["sweeps"] = h.sweeps();
    rep.results["grid_sup_norm"] = h.field().sup_norm();
    auto& hist = rep.table("residual_history", {"sweep", "residual"});
    for (std::size_t i = 0; i < h.residual_history().size(); ++i) hist.add(static_cast<int>(i + 1), h.residual_history()[i]);
    if (a.phi) rep.results["sup_distance_to_marking"] = sw("compare", [&] { return sup_distance(h, *a.phi, 200, cfg.seed); });
    HolderOptions ho;
    ho.samples = cfg.holder_samples;
    ho.seed = cfg.seed;
    const auto est = sw("holder", [&] { return estimate_holder_exponent(h, a.elements[0].v_u, ho); });
    rep.results["holder_exponent"] = est.exponent;
    rep.results["holder_stderr"] = est.stderr_;
    return 0;
}

inline int run_foliation(const ExperimentConfig& cfg, RunReport& rep, Stopwatch& sw) {
    const BuiltAction a = build_action(cfg);
    auto& summary = rep.table("line_fields", {"generator", "label", "residual", "sweeps", "invariance_error", "oscillation"});
    auto& angles = rep.table("field_angles", {"generator", "label", "x", "y", "angle"});
    const int stride = std::max(1, cfg.N / 32);
    json fields = json::array();
    std::optional<LineField> u1;
    for (std::size_t i = 0; i < a.maps.size(); ++i) {
        for (FieldLabel label : {FieldLabel::unstable, FieldLabel::stable}) {
            const std::string name = "g" + std::to_string(i + 1) + "." + to_string(label);
            const LineField f = sw("field." + name, [&] { return compute_line_field(a.maps[i], label, cfg.N, cfg.field_iterations); });
            const double inv = field_invariance_error(f), osc = field_oscillation(f);
            fields.push_back({{"generator", i + 1},
                              {"label", to_string(label)},
                              {"residual", f.residual()},
                              {"sweeps", f.sweeps()},
                              {"invariance_error", inv},
                              {"oscillation", osc}});
            summary.add(static_cast<int>(i + 1), to_string(label), f.residual(), f.sweeps(), inv, osc);
            for (int p = 0; p < cfg.N; p += stride)
                for (int q = 0; q < cfg.N; q += stride) {
                    const Vec2 x = f.grid_point(p, q);
                    angles.add(static_cast<int>(i + 1), to_string(label), x.x, x.y, f.angle_at_grid(p, q));
                }
            if (i == 0 && label == FieldLabel::unstable) u1 = f;
        }
    }
    rep.results["fields"] = fields;
    const LeafSegment leaf = sw("leaf", [&] {
        return leaf_segment(*u1, cfg.basepoint, -cfg.leaf_length / 2, cfg.leaf_length / 2, cfg.leaf_step, a.elements[0].v_u);
    });
    auto& lt = rep.table("leaf_g1_unstable", {"s", "x", "y"});
    const auto& ps = leaf.params();
    for (std::size_t k = 0; k < ps.size(); k += 10) lt.add(ps[k], leaf.points()[k].x, leaf.points()[k].y);
    rep.results["leaf"] = {{"basepoint", to_json(cfg.basepoint)}, {"length", leaf.hi() - leaf.lo()}};
    return 0;
}

inline int run_transversality(const ExperimentConfig& cfg, RunReport& rep, Stopwatch& sw) {
    const BuiltAction a = build_action(cfg);
    const FieldSet F = sw("fields", [&] { return compute_fields(cfg, a); });
    const std::array<std::pair<const char*, const LineField*>, 4> fs{
        {{"E1u", &F.u1}, {"E1s", &F.s1}, {"E2u", &F.u2}, {"E2s", &F.s2}}};
    auto& tab = rep.table("transversality", {"field_a", "field_b", "min_angle", "min_angle_degrees", "argmin_x", "argmin_y"});
    double worst = std::numeric_limits<double>::infinity(), e1u_e2s = 0.0;
    json pairs = json::array();
    sw("pairs", [&] {
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j) {
                const auto r = min_transversality_angle(*fs[i].second, *fs[j].second);
                tab.add(fs[i].first, fs[j].first, r.angle, r.angle * 180 / std::numbers::pi, r.argmin.x, r.argmin.y);
                pairs.push_back({{"a", fs[i].first}, {"b", fs[j].first}, {"min_angle", r.angle}, {"argmin", to_json(r.argmin)}});
                worst = std::min(worst, r.angle);
                if (i == 0 && j == 3) e1u_e2s = r.angle;
            }
        return 0;
    });
    rep.results["pairs"] = pairs;
    rep.results["min_angle"] = worst;
    rep.results["e1u_e2s_min_angle"] = e1u_e2s;
    rep.results["e1u_e2s_min_angle_degrees"] = e1u_e2s * 180 / std::numbers::pi;
    rep.results["threshold"] = cfg.thresholds.transversality;
    return worst >= cfg.thresholds.transversality ? 0 : 3;
}

inline int run_prop1(const ExperimentConfig& cfg, RunReport& rep, Stopwatch& sw) {
    const Prop1Spec& p = cfg.prop1;
    TranslationAction S;
    std::optional<double> oracle;
    if (p.source == "synthetic") {
        const SyntheticHomeomorphism hh{p.slope, p.amplitude, p.frequency};
        const double xa = hh.inverse(p.domain[0]), xb = hh.inverse(p.domain[1]);
        S = synthetic_translation_action([hh](double x) { return hh(x); }, [hh](double y) { return hh.inverse(y); },
                                         cfg.eps, std::min(xa, xb) - 1.0, std::max(xa, xb) + 1.0);
        oracle = hh.derivative(hh.inverse(p.y0));
    } else {
        const BuiltAction a = build_action(cfg);
        const Conjugacy h = sw("solve", [&] {
            ConjugacyOptions co;
            co.max_sweeps = cfg.max_sweeps;
            return solve_conjugacy(a.elements[0], a.maps[0], cfg.N, cfg.solver_tolerance, co);
        });
        const Vec2 v = p.direction == "unstable" ? a.elements[0].v_u : a.elements[0].v_s;
        S = sw("action", [&] { return translation_action_from_conjugacy(h, cfg.basepoint, v, cfg.eps); });
    }
    const auto reg = sw("regularity", [&] { return verify_action_regularity(S); });
    rep.results["regularity"] = {{"refinement_stability", reg.refinement_stability},
                                 {"modulus_y", reg.modulus_y},
                                 {"modulus_t", reg.modulus_t},
                                 {"d_min", reg.d_min},
                                 {"d_max", reg.d_max}};
    const auto lin = sw("linearize", [&] { return linearize_translation_action(S, p.y0, p.domain); });
    const double cocycle = sw("cocycle", [&] { return cocycle_residual(lin); });
    rep.results["provenance"] = S.provenance;
    rep.results["alpha"] = lin.alpha;
    rep.results["alpha_oracle"] = oracle ? json(*oracle) : json(nullptr);
    rep.results["affinity_residual"] = lin.affinity_residual;
    rep.results["cocycle_residual"] = cocycle;
    const double a1 = lin.fit_alpha(0.0, S.eps / 2), a2 = lin.fit_alpha(S.eps / 2, S.eps);
    rep.results["alpha_lower_half"] = a1;
    rep.results["alpha_upper_half"] = a2;
    rep.results["threshold"] = cfg.thresholds.prop1;
    auto& gt = rep.table("prop1_g", {"y", "g", "dg"});
    for (std::size_t k = 0; k < lin.g.nodes().size(); ++k)
        gt.add(lin.g.nodes()[k], lin.g.values()[k], lin.g.derivative(lin.g.nodes()[k]));
    return lin.affinity_residual <= cfg.thresholds.prop1 ? 0 : 3;
}

inline int run_factorize(const ExperimentConfig& cfg, RunReport& rep, Stopwatch& sw) {
    const BuiltAction a = build_action(cfg);
    require_pair(a);
    const auto& e1 = a.elements[0];
    const auto& e2 = a.elements[1];
    const FieldSet F = sw("fields", [&] { return compute_fields(cfg, a); });
    std::optional<Conjugacy> h;
    Vec2 anchor = cfg.basepoint;
    if (cfg.kind == ActionKind::conjugated) {
        ConjugacyOptions co;
        co.max_sweeps = cfg.max_sweeps;
        h.emplace(sw("solve", [&] { return solve_conjugacy(e1, a.maps[0], cfg.N, cfg.solver_tolerance, co); }));
        anchor = (*h)(cfg.basepoint);
    }
    auto& tab = rep.table("factorization", {"s", "r_lattice", "t_lattice", "r_unit", "t_unit", "r_numeric", "t_numeric",
                                            "t_predicted", "deviation", "derivative_deviation"});
    json rows = json::array();
    int code = 0;
    for (double s : cfg.factor_s) {
        const auto lat = factor_translation_linear(e1, e2, s, FactorNormalization::lattice);
        const auto uni = factor_translation_linear(e1, e2, s, FactorNormalization::unit);
        json row = {{"s", s}, {"r_lattice", lat.slide_r}, {"t_lattice", lat.translation_t}, {"r_unit", uni.slide_r},
                    {"t_unit", uni.translation_t}};
        try {
            FactorOptions fo;
            fo.step = cfg.leaf_step;
            const auto nf = sw("numeric", [&] {
                return factor_translation_numeric({&F.u1, &F.s1, &F.s2}, e1, e2, anchor, s, h ? &*h : nullptr,
                                                  h ? std::optional<Vec2>(cfg.basepoint) : std::nullopt, fo);
            });
            row["r_numeric"] = nf.result.slide_r;
            row["t_numeric"] = nf.result.translation_t;
            row["t_predicted"] = nf.predicted_t;
            row["deviation"] = nf.result.numeric_deviation;
            row["derivative_deviation"] = nf.derivative_deviation;
            tab.add(s, lat.slide_r, lat.translation_t, uni.slide_r, uni.translation_t, nf.result.slide_r,
                    nf.result.translation_t, nf.predicted_t, nf.result.numeric_deviation, nf.derivative_deviation);
        } catch (const Error& e) {
            row["error"] = e.what();
            rep.errors.push_back("s = " + format_number(s) + ": " + e.what());
            code = 3;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            tab.add(s, lat.slide_r, lat.translation_t, uni.slide_r, uni.translation_t, nan, nan, nan, nan, nan);
        }
        rows.push_back(row);
    }
    rep.results["rows"] = rows;
    return code;
}

inline int run_lemma3(const ExperimentConfig& cfg, RunReport& rep, Stopwatch& sw) {
    const BuiltAction a = build_action(cfg);
    const FieldSet F = sw("fields", [&] { return compute_fields(cfg, a); });
    PropagationOptions po;
    po.eps = cfg.eps;
    po.step = cfg.leaf_step;
    po.refine = cfg.kind != ActionKind::linear;
    const auto table = sw("propagation", [&] {
        return tangency_propagation_check(F.u1, F.s1, F.s2, a.elements[0], cfg.basepoint, cfg.heteroclinic_radius, po);
    });
    auto& tab = rep.table("propagation", {"k1", "k2", "x", "y", "angle", "measured_slope", "predicted_slope", "difference",
                                          "deviation"});
    for (const auto& r : table.rows)
        tab.add(r.k[0], r.k[1], r.point.x, r.point.y, r.angle, r.measured_slope, r.predicted_slope, r.difference, r.deviation);
    for (const auto& f : table.failures) rep.errors.push_back(f);
    const int points = static_cast<int>(table.rows.size()) - 1;
    rep.results["heteroclinic_points"] = points;
    rep.results["max_deviation"] = table.max_deviation;
    rep.results["max_slope_difference"] = table.max_difference;
    rep.results["min_angle"] = table.min_angle;
    rep.results["threshold"] = cfg.thresholds.lemma3;
    return table.max_deviation <= cfg.thresholds.lemma3 && points >= 8 && table.failures.empty() ? 0 : 3;
}

inline int run_periodic(const ExperimentConfig& cfg, RunReport& rep, Stopwatch& sw) {
    const BuiltAction a = build_action(cfg);
    auto& tab = rep.table("periodic_data", {"generator", "period", "x", "y", "mult_u", "mult_s", "mismatch"});
    double worst = 0.0;
    json gens = json::array();
    for (std::size_t i = 0; i < a.maps.size(); ++i) {
        const auto r = sw("g" + std::to_string(i + 1), [&] { return compare_smooth_invariants(*a.maps[i], a.elements[i], cfg.max_period); });
        for (const auto& row : r.rows)
            tab.add(static_cast<int>(i + 1), row.period, row.point.x, row.point.y, row.mult_u, row.mult_s, row.mismatch);
        for (const auto& f : r.failures) rep.errors.push_back("g" + std::to_string(i + 1) + " " + f);
        gens.push_back({{"generator", i + 1}, {"orbits", r.rows.size()}, {"max_mismatch", r.max_mismatch}});
        worst = std::max(worst, r.max_mismatch);
    }
    rep.results["generators"] = gens;
    rep.results["max_mismatch"] = worst;
    rep.results["threshold"] = cfg.thresholds.obstruction;
    if (worst > cfg.thresholds.obstruction) return 2;
    return rep.errors.empty() ? 0 : 3;
}

inline int run_teichmuller(const ExperimentConfig& cfg, RunReport& rep, Stopwatch& sw) {
    const auto v = sw("experiment", [&] { return teichmuller_experiment(cfg.teichmuller_setup()); });
    auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    rep.results["verdict"] = to_string(v.verdict);
    rep.results["transversality_min_angle"] = num(v.transversality_min_angle);
    rep.results["lemma3_deviation"] = num(v.lemma3_deviation);
    rep.results["prop1_affinity_residual"] = num(v.prop1_affinity_residual);
    rep.results["jacobian_consistency"] = num(v.jacobian_consistency);
    rep.results["periodic_mismatch"] = num(v.periodic_mismatch);
    rep.results["jacobian_vs_marking"] = v.jacobian_vs_marking ? json(*v.jacobian_vs_marking) : json(nullptr);
    rep.results["tangency_events"] = v.tangency_events;
    json diags = json::array();
    auto& dt = rep.table("diagnostics", {"name", "value", "threshold", "status", "detail"});
    for (const auto& d : v.diagnostics) {
        diags.push_back({{"name", d.name},
                         {"value", num(d.value)},
                         {"threshold", d.threshold ? json(*d.threshold) : json(nullptr)},
                         {"status", d.status},
                         {"detail", d.detail}});
        dt.add(d.name, d.value, d.threshold.value_or(std::numeric_limits<double>::quiet_NaN()), d.status, d.detail);
        if (d.status == "error") rep.errors.push_back(d.name + ": " + d.detail);
    }
    rep.results["diagnostics"] = diags;
    static const char* pair_names[6][2] = {{"E1u", "E1s"}, {"E1u", "E2u"}, {"E1u", "E2s"},
                                           {"E1s", "E2u"}, {"E1s", "E2s"}, {"E2u", "E2s"}};
    auto& tt = rep.table("transversality", {"field_a", "field_b", "min_angle"});
    for (const auto& p : v.transversality_pairs) {
        const auto i = static_cast<std::size_t>(p[0]);
        tt.add(pair_names[i][0], pair_names[i][1], p[1]);
    }
    auto& pt = rep.table("propagation", {"k1", "k2", "x", "y", "angle", "measured_slope", "predicted_slope", "difference",
                                         "deviation"});
    for (const auto& r : v.propagation.rows)
        pt.add(r.k[0], r.k[1], r.point.x, r.point.y, r.angle, r.measured_slope, r.predicted_slope, r.difference, r.deviation);
    auto& per = rep.table("periodic_data", {"period", "x", "y", "mult_u", "mult_s", "mismatch"});
    for (const auto& r : v.periodic.rows) per.add(r.period, r.point.x, r.point.y, r.mult_u, r.mult_s, r.mismatch);
    switch (v.verdict) {
        case Verdict::smooth: return 0;
        case Verdict::obstructed: return 2;
        case Verdict::inconclusive: return 3;
    }
    return 3;
}

using Handler = std::function<int(const ExperimentConfig&, RunReport&, Stopwatch&)>;

inline const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> h{
        {"eigen", run_eigen},         {"conjugacy", run_conjugacy}, {"foliation", run_foliation},
        {"transversality", run_transversality}, {"prop1", run_prop1}, {"factorize", run_factorize},
        {"lemma3", run_lemma3},       {"periodic-data", run_periodic}, {"teichmuller", run_teichmuller}};
    return h;
}

inline const char* status_for(int code) {
    switch (code) {
        case 0: return "complete";
        case 2: return "obstructed";
        default: return "inconclusive";
    }
}

}  // namespace cli

/// Runs one subcommand; returns the process exit code
/// (0 complete/smooth, 2 obstructed, 3 inconclusive, 1 usage or config error).
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Numerical experiments on smooth rigidity of Anosov Z^2 actions on the 2-torus", "anosov-lab"};
    std::string command, config_path, out_dir;
    std::vector<std::string> overrides;
    std::vector<std::string> names;
    for (const auto& [k, _] : cli::handlers()) names.push_back(k);
    app.add_option("subcommand", command, "experiment to run")->required()->check(CLI::IsMember(names));
    app.add_option("--config", config_path, "JSON config document")->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "override a config key, e.g. --set resolution.N=128");
    app.add_option("--out", out_dir, "output directory (overrides ANOSOV_LAB_OUT and experiment.output_dir)");

    std::vector<std::string> argv_store{"anosov-lab"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return 1;
    }

    ExperimentConfig cfg;
    try {
        cfg = resolve_config(config_path.empty() ? json::object() : read_config_file(config_path), overrides);
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    }

    std::string dir = cfg.output_dir;
    if (const char* env = std::getenv("ANOSOV_LAB_OUT"); env && *env) dir = env;
    if (!out_dir.empty()) dir = out_dir;

    RunReport rep;
    rep.command = command;
    rep.config = cfg.echo;
    cli::Stopwatch sw(rep);
    int code = 3;
    try {
        code = cli::handlers().at(command)(cfg, rep, sw);
    } catch (const Error& e) {
        rep.errors.push_back(e.what());
        code = 3;
    } catch (const std::exception& e) {
        rep.errors.push_back(std::string("internal: ") + e.what());
        code = 3;
    }
    rep.exit_code = code;
    rep.status = cli::status_for(code);
    try {
        emit_report(rep, dir);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 1;
    }
    out << json{{"command", command}, {"status", rep.status}, {"results", rep.results}, {"errors", rep.errors}}.dump(2)
        << "\n";
    return code;
}

}  // namespace anosov
