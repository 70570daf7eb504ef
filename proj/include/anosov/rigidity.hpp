#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "conjugacy.hpp"
#include "error.hpp"
#include "foliation.hpp"
#include "geometry.hpp"
#include "lattice.hpp"
#include "numerics.hpp"
#include "torus_map.hpp"

namespace anosov {

/// Small translations on a transversal, S(t, y), in leaf arc-length parameters.
struct TranslationAction {
    std::function<double(double, double)> S;
    double eps = 0.05;
    /// S(t, y) is defined for y in [y_lo, y_hi] and |t| <= 2 eps.
    double y_lo = 0.0, y_hi = 0.0;
    std::string provenance;

    bool in_domain(double y) const { return y >= y_lo && y <= y_hi; }
    double operator()(double t, double y) const {
        if (!in_domain(y) || std::fabs(t) > 2 * eps + 1e-15)
            throw Error(ErrorCode::ChartOverflow, "translation evaluated outside its chart");
        return S(t, y);
    }
};

/// S(t, y) = h(h^{-1}(y) + t) for a monotone h on [x_lo, x_hi].
inline TranslationAction synthetic_translation_action(std::function<double(double)> h,
                                                      std::function<double(double)> h_inverse, double eps,
                                                      double x_lo, double x_hi) {
    TranslationAction a;
    a.eps = eps;
    a.y_lo = std::min(h(x_lo + 2 * eps), h(x_hi - 2 * eps));
    a.y_hi = std::max(h(x_lo + 2 * eps), h(x_hi - 2 * eps));
    a.S = [h = std::move(h), hi = std::move(h_inverse)](double t, double y) { return h(hi(y) + t); };
    a.provenance = "synthetic";
    return a;
}

/// Scalar homeomorphism h(x) = slope x + amplitude sin(frequency x) and its inverse.
struct SyntheticHomeomorphism {
    double slope = 1.0;
    double amplitude = 0.0;
    double frequency = 1.0;

    double operator()(double x) const { return slope * x + amplitude * std::sin(frequency * x); }
    double derivative(double x) const { return slope + amplitude * frequency * std::cos(frequency * x); }
    double inverse(double y) const {
        double x = y / slope;
        for (int i = 0; i < 100; ++i) {
            const double dx = ((*this)(x) - y) / derivative(x);
            x -= dx;
            if (std::fabs(dx) <= 1e-17 * (1.0 + std::fabs(x))) break;
        }
        return x;
    }
    bool monotone() const { return std::fabs(amplitude * frequency) < std::fabs(slope); }
};

struct ConjugacyActionOptions {
    double half_length = 0.3;
    double step = 1e-3;
};

/// Arc length along h(x0 + sigma v), sampled by Richardson-extrapolated chord sums.
inline SampledFunction conjugacy_arc_length(const Conjugacy& h, Vec2 x0, Vec2 v, const ConjugacyActionOptions& opt) {
    const int half = static_cast<int>(std::ceil(opt.half_length / opt.step / 2.0));
    const int n = 4 * half;  // fine intervals of length step over [-2 half step, 2 half step]
    const double hstep = opt.half_length / (2.0 * half);
    std::vector<Vec2> pts(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) pts[static_cast<std::size_t>(k)] = h(x0 + ((k - 2 * half) * hstep) * v);
    // Coarse nodes every second fine point; chord sums at both resolutions from the centre.
    std::vector<double> sig, ell;
    const int mid = 2 * half;
    std::vector<double> pos(static_cast<std::size_t>(n / 2 + 1));
    for (int c = 0; c <= n / 2; ++c) pos[static_cast<std::size_t>(c)] = 0.0;
    auto fine = [&](int a, int b) { return norm(pts[static_cast<std::size_t>(b)] - pts[static_cast<std::size_t>(a)]); };
    for (int dir : {1, -1}) {
        double acc = 0.0;
        for (int c = 1; c <= half; ++c) {
            const int a = mid + dir * 2 * (c - 1), m = a + dir, b = a + 2 * dir;
            const double f2 = fine(a, m) + fine(m, b);
            const double c1 = fine(a, b);
            acc += (4.0 * f2 - c1) / 3.0;
            pos[static_cast<std::size_t>(half + dir * c)] = dir * acc;
        }
    }
    for (int c = 0; c <= n / 2; ++c) {
        sig.push_back((2 * c - 2 * half) * hstep);
        ell.push_back(pos[static_cast<std::size_t>(c)]);
    }
    return SampledFunction(std::move(sig), std::move(ell));
}

/// S(t, y) = l(l^{-1}(y) + t) where l is arc length along h(x0 + sigma v):
/// the translation by t along the linear leaf, seen through h.
inline TranslationAction translation_action_from_conjugacy(const Conjugacy& h, Vec2 x0, Vec2 v, double eps,
                                                           const ConjugacyActionOptions& opt = {}) {
    if (!(eps > 0.0) || 2 * eps >= opt.half_length)
        throw Error(ErrorCode::ChartOverflow, "translation size does not fit the transversal");
    auto ell = std::make_shared<SampledFunction>(conjugacy_arc_length(h, x0, v, opt));
    if (!ell->strictly_increasing()) throw Error(ErrorCode::NotMonotone, "arc length along h is not increasing");
    TranslationAction a;
    a.eps = eps;
    a.y_lo = (*ell)(ell->lo() + 2 * eps);
    a.y_hi = (*ell)(ell->hi() - 2 * eps);
    a.S = [ell](double t, double y) { return (*ell)(ell->inverse(y) + t); };
    a.provenance = "synthetic-from-h";
    return a;
}

// ---------------------------------------------------------------------------
// Regularity of the translation action.

struct RegularityOptions {
    int t_samples = 11;
    int y_samples = 41;
    double h_y = 1e-5;
    /// y range; defaults to the middle half of the action's domain.
    std::optional<std::array<double, 2>> y_range;
};

struct RegularityReport {
    double refinement_stability = 0.0;  // sup |D(h/2) - D(h)|
    double modulus_y = 0.0;             // largest jump of D between neighbouring y samples
    double modulus_t = 0.0;             // same along t
    double d_min = 0.0, d_max = 0.0;
    double y_spacing = 0.0, t_spacing = 0.0;
};

inline RegularityReport verify_action_regularity(const TranslationAction& S, const RegularityOptions& opt = {}) {
    const double mid = 0.5 * (S.y_lo + S.y_hi), quarter = 0.25 * (S.y_hi - S.y_lo);
    const double ya = opt.y_range ? (*opt.y_range)[0] : mid - quarter;
    const double yb = opt.y_range ? (*opt.y_range)[1] : mid + quarter;
    RegularityReport r;
    r.d_min = std::numeric_limits<double>::infinity();
    r.d_max = -r.d_min;
    r.y_spacing = (yb - ya) / (opt.y_samples - 1);
    r.t_spacing = S.eps / (opt.t_samples - 1);
    std::vector<double> D(static_cast<std::size_t>(opt.t_samples * opt.y_samples));
    for (int i = 0; i < opt.t_samples; ++i) {
        const double t = S.eps * i / (opt.t_samples - 1);
        for (int j = 0; j < opt.y_samples; ++j) {
            const double y = ya + (yb - ya) * j / (opt.y_samples - 1);
            const double h = opt.h_y;
            const double dc = (S(t, y + h) - S(t, y - h)) / (2 * h);
            const double df = (S(t, y + h / 2) - S(t, y - h / 2)) / h;
            r.refinement_stability = std::max(r.refinement_stability, std::fabs(df - dc));
            D[static_cast<std::size_t>(i * opt.y_samples + j)] = df;
            r.d_min = std::min(r.d_min, df);
            r.d_max = std::max(r.d_max, df);
            if (j > 0) r.modulus_y = std::max(r.modulus_y, std::fabs(df - D[static_cast<std::size_t>(i * opt.y_samples + j - 1)]));
            if (i > 0) r.modulus_t = std::max(r.modulus_t, std::fabs(df - D[static_cast<std::size_t>((i - 1) * opt.y_samples + j)]));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Linearization: g(y) = int_{y0}^{y} dS/dy'(t(y'), y') dy' makes L = g S g^{-1}
// a rigid translation z + alpha t.

struct LinearizeOptions {
    double h_y = 1e-5;
    double quad_spacing = 1e-3;
    int t_lattice = 11;
    int z_lattice = 41;
};

struct LinearizationResult {
    double alpha = 0.0;
    double affinity_residual = 0.0;
    double y0 = 0.0;
    SampledFunction g;
    TranslationAction S;
    std::vector<double> lattice_t, lattice_z;

    /// L(t, z) = g(S(t, g^{-1}(z))); nullopt outside the domain.
    std::optional<double> L(double t, double z) const {
        if (z < g.range_lo() || z > g.range_hi()) return std::nullopt;
        const double y = g.inverse(z);
        if (!S.in_domain(y) || std::fabs(t) > 2 * S.eps) return std::nullopt;
        const double w = S.S(t, y);
        if (!g.contains(w)) return std::nullopt;
        return g(w);
    }

    /// Least-squares alpha over lattice points with t in [t_lo, t_hi].
    double fit_alpha(double t_lo, double t_hi) const {
        double num = 0.0, den = 0.0;
        for (double t : lattice_t) {
            if (t < t_lo || t > t_hi || t == 0.0) continue;
            for (double z : lattice_z) {
                if (const auto l = L(t, z)) {
                    num += t * (*l - z);
                    den += t * t;
                }
            }
        }
        if (den == 0.0) throw Error(ErrorCode::DomainMismatch, "no lattice points in the t-range");
        return num / den;
    }
};

inline LinearizationResult linearize_translation_action(const TranslationAction& S, double y0,
                                                        std::array<double, 2> domain,
                                                        const LinearizeOptions& opt = {}) {
    const double a = domain[0], b = domain[1];
    if (!(a < y0 && y0 < b) || a < S.y_lo || b > S.y_hi)
        throw Error(ErrorCode::DomainMismatch, "y0 and the domain must lie inside the action's domain");
    const double h = opt.h_y;
    if (a - h < S.y_lo || b + h > S.y_hi)
        throw Error(ErrorCode::DomainMismatch, "domain leaves no room for the difference step");

    RootOptions ro;
    ro.bisect_until = 1e-6;
    ro.tolerance = 1e-14;
    auto t_of = [&](double y) {
        const auto t = bracketed_root([&](double t) { return S(t, y) - y0; }, -2 * S.eps, 2 * S.eps, ro);
        if (!t) throw Error(ErrorCode::RootBracketFailed, "S(t, y) = y0 has no root with |t| <= 2 eps at y = " + std::to_string(y));
        return *t;
    };
    auto integrand = [&](double y) {
        const double t = t_of(y);
        return (S(t, y + h) - S(t, y - h)) / (2 * h);
    };

    const int nl = std::max(1, static_cast<int>(std::ceil((y0 - a) / opt.quad_spacing - 1e-9)));
    const int nr = std::max(1, static_cast<int>(std::ceil((b - y0) / opt.quad_spacing - 1e-9)));
    std::vector<double> ys;
    for (int k = nl; k >= 1; --k) ys.push_back(k == nl ? a : y0 - (y0 - a) * k / nl);
    ys.push_back(y0);
    for (int k = 1; k <= nr; ++k) ys.push_back(k == nr ? b : y0 + (b - y0) * k / nr);
    const auto n = ys.size();
    std::vector<double> f(n), gv(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) f[k] = integrand(ys[k]);
    const auto i0 = static_cast<std::size_t>(nl);
    for (std::size_t k = i0 + 1; k < n; ++k) {
        const double m = 0.5 * (ys[k - 1] + ys[k]);
        gv[k] = gv[k - 1] + (ys[k] - ys[k - 1]) / 6.0 * (f[k - 1] + 4 * integrand(m) + f[k]);
    }
    for (std::size_t k = i0; k-- > 0;) {
        const double m = 0.5 * (ys[k] + ys[k + 1]);
        gv[k] = gv[k + 1] - (ys[k + 1] - ys[k]) / 6.0 * (f[k] + 4 * integrand(m) + f[k + 1]);
    }

    LinearizationResult res;
    res.y0 = y0;
    res.S = S;
    res.g = SampledFunction(ys, gv, f);
    if (!res.g.strictly_increasing() && !res.g.strictly_decreasing())
        throw Error(ErrorCode::NonMonotoneG, "g is not strictly monotone");

    const double za = res.g.range_lo(), zb = res.g.range_hi();
    for (int i = 0; i < opt.t_lattice; ++i) res.lattice_t.push_back(S.eps * i / (opt.t_lattice - 1));
    for (int j = 0; j < opt.z_lattice; ++j) res.lattice_z.push_back(za + (zb - za) * (j + 0.5) / opt.z_lattice);
    res.alpha = res.fit_alpha(0.0, S.eps);
    int used = 0;
    for (double t : res.lattice_t)
        for (double z : res.lattice_z)
            if (const auto l = res.L(t, z)) {
                res.affinity_residual = std::max(res.affinity_residual, std::fabs(*l - z - res.alpha * t));
                ++used;
            }
    if (used == 0) throw Error(ErrorCode::DomainMismatch, "no lattice point of L is defined");
    return res;
}

/// sup |L(t + s, z) - L(s, L(t, z))| over the lattice where all terms are defined.
inline double cocycle_residual(const LinearizationResult& r) {
    double worst = 0.0;
    for (double t : r.lattice_t)
        for (double s : r.lattice_t) {
            if (t + s > r.S.eps) continue;
            for (double z : r.lattice_z) {
                const auto lt = r.L(t, z);
                if (!lt) continue;
                const auto lhs = r.L(t + s, z);
                const auto rhs = r.L(s, *lt);
                if (lhs && rhs) worst = std::max(worst, std::fabs(*lhs - *rhs));
            }
        }
    return worst;
}

// ---------------------------------------------------------------------------
// Factorization of leaf translations into holonomies.

enum class FactorNormalization { lattice, unit };

struct FactorizationResult {
    double slide_s = 0.0;
    double slide_r = 0.0;
    double translation_t = 0.0;
    double numeric_deviation = 0.0;
};

namespace detail {
inline Vec2 normalize_as(Vec2 v, FactorNormalization n) {
    if (n == FactorNormalization::unit || v.x == 0.0) return normalized(v);
    return v / v.x;
}
}  // namespace detail

/// Solves s v1s + r v2s = t v1u for (r, t). With lattice normalization the
/// eigenvectors have first coordinate 1; with unit normalization they have
/// length 1 and s, r, t are arc lengths.
inline FactorizationResult factor_translation_linear(const HyperbolicElement& e1, const HyperbolicElement& e2, double s,
                                                     FactorNormalization norm_kind = FactorNormalization::lattice) {
    const Vec2 v1s = detail::normalize_as(e1.v_s, norm_kind);
    const Vec2 v2s = detail::normalize_as(e2.v_s, norm_kind);
    const Vec2 v1u = detail::normalize_as(e1.v_u, norm_kind);
    // r v2s - t v1u = -s v1s
    const double det = cross(v2s, -1.0 * v1u);
    if (std::fabs(det) < 1e-12) throw Error(ErrorCode::SingularSystem, "v1u and v2s are dependent");
    const Vec2 rhs = -s * v1s;
    FactorizationResult f;
    f.slide_s = s;
    f.slide_r = cross(rhs, -1.0 * v1u) / det;
    f.translation_t = cross(v2s, rhs) / det;
    f.numeric_deviation = norm(s * v1s + f.slide_r * v2s - f.translation_t * v1u);
    return f;
}

struct FactorFields {
    const LineField* u1 = nullptr;
    const LineField* s1 = nullptr;
    const LineField* s2 = nullptr;
};

struct FactorOptions {
    double transversal_half_length = 0.3;
    double sample_half_width = 0.05;
    int samples = 41;
    double step = 1e-3;
    double budget = 3.0;
};

struct NumericFactorization {
    FactorizationResult result;
    double predicted_t = 0.0;
    double derivative_deviation = 0.0;
    std::vector<double> y, composed, predicted;
};

/// Slides the transversal tau' (unstable leaf through `anchor`) along W1s by
/// leaf length s, then back along W2s; the composed motion is a translation
/// of tau'. With a conjugacy, the prediction is S(t, .) for the t of the
/// linear factorization of h^{-1}(q) - x0.
inline NumericFactorization factor_translation_numeric(const FactorFields& F, const HyperbolicElement& e1,
                                                       const HyperbolicElement& e2, Vec2 anchor, double s,
                                                       const Conjugacy* h = nullptr, std::optional<Vec2> x0 = std::nullopt,
                                                       const FactorOptions& opt = {}) {
    // Size the transversals and leaf budget from the linear model.
    const auto guess = factor_translation_linear(e1, e2, s, FactorNormalization::unit);
    const double half = std::max(opt.transversal_half_length, 1.5 * std::fabs(guess.translation_t) + opt.sample_half_width + 0.1);
    const double budget = std::max(opt.budget, 1.5 * std::max(std::fabs(guess.slide_r), std::fabs(s)) + 0.5);
    const LeafSegment tau = leaf_segment(*F.u1, anchor, -half, half, opt.step, e1.v_u);
    Vec2 q = anchor;
    if (s != 0.0) q = integrate_leaf(*F.s1, anchor, s, opt.step, e1.v_s).at(s);
    const LeafSegment wq = leaf_segment(*F.u1, q, -2 * half, 2 * half, opt.step, e1.v_u);
    HolonomyOptions ho;
    ho.samples = opt.samples;
    ho.step = opt.step;
    ho.budget = budget;
    ho.domain = std::array<double, 2>{-opt.sample_half_width, opt.sample_half_width};
    const HolonomyMap hol1 = holonomy(*F.s1, tau, wq, ho);
    ho.domain = std::array<double, 2>{hol1.range_lo(), hol1.range_hi()};
    const HolonomyMap hol2 = holonomy(*F.s2, wq, tau, ho);

    NumericFactorization out;
    out.result.slide_s = s;
    const Crossing back = leaf_crossing(*F.s2, q, tau, {budget, opt.step, 0.01, std::nullopt});
    out.result.slide_r = dot(back.heading, e2.v_s) >= 0 ? back.leaf_length : -back.leaf_length;
    out.result.translation_t = hol2(hol1(0.0));

    double s_lin = s;
    std::optional<TranslationAction> action;
    if (h) {
        const Vec2 base = x0.value_or(h->inverse(anchor));
        s_lin = dot(h->inverse(q) - base, e1.v_s);
        const double eps = opt.sample_half_width + 0.01 +
                           std::fabs(factor_translation_linear(e1, e2, s_lin, FactorNormalization::unit).translation_t);
        ConjugacyActionOptions co;
        co.half_length = std::max(co.half_length, 2 * eps + opt.sample_half_width + 0.05);
        action = translation_action_from_conjugacy(*h, base, e1.v_u, eps, co);
    }
    out.predicted_t = factor_translation_linear(e1, e2, s_lin, FactorNormalization::unit).translation_t;
    for (std::size_t k = 0; k < hol1.s.size(); ++k) {
        const double y = hol1.s[k];
        const double c = hol2(hol1(y));
        const double p = action ? action->S(out.predicted_t, y) : y + out.predicted_t;
        out.y.push_back(y);
        out.composed.push_back(c);
        out.predicted.push_back(p);
        out.result.numeric_deviation = std::max(out.result.numeric_deviation, std::fabs(c - p));
        const double dc = hol2.map.derivative(hol1(y)) * hol1.map.derivative(y);
        double dp = 1.0;
        if (action) {
            constexpr double hy = 1e-5;
            dp = (action->S(out.predicted_t, y + hy) - action->S(out.predicted_t, y - hy)) / (2 * hy);
        }
        out.derivative_deviation = std::max(out.derivative_deviation, std::fabs(dc - dp));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tangency propagation along heteroclinic points.

struct PropagationRow {
    std::array<int, 2> k{0, 0};
    TorusPoint point;
    double angle = 0.0;  // between E1u and E2s at z'
    double measured_slope = 0.0;
    double predicted_slope = 0.0;
    double difference = 0.0;
    double deviation = 0.0;  // graph transport identity
};

struct PropagationTable {
    std::vector<PropagationRow> rows;
    std::vector<std::string> failures;
    double max_deviation = 0.0;
    double max_difference = 0.0;
    double min_angle = 0.0;
};

struct PropagationOptions {
    double eps = 0.05;
    double step = 1e-3;
    int samples = 41;
    bool refine = true;
};

inline PropagationTable tangency_propagation_check(const LineField& u1, const LineField& s1, const LineField& s2,
                                                   const HyperbolicElement& e1, Vec2 z, int R,
                                                   const PropagationOptions& opt = {}) {
    PropagationTable table;
    GraphOptions go;
    go.samples = opt.samples;
    go.step = opt.step;
    const GraphMap tz = local_graph(z, u1, s1, s2, opt.eps, go);
    PropagationRow self;
    self.point = wrap(z);
    self.angle = line_angle_between(u1.direction(z), s2.direction(z));
    self.measured_slope = self.predicted_slope = tz.slope(0.0);
    table.rows.push_back(self);

    const auto hs = opt.refine ? heteroclinic_points(z, e1, R, HeteroclinicFields{&u1, &s1, opt.step})
                               : heteroclinic_points(z, e1, R);
    table.failures = hs.failures;
    TransportOptions to;
    to.u_domain = {tz.lo(), tz.hi()};
    double s_lo = 0.0, s_hi = 0.0;
    for (double v : tz.values.values()) {
        s_lo = std::min(s_lo, v);
        s_hi = std::max(s_hi, v);
    }
    to.s_domain = {s_lo - 0.01, s_hi + 0.01};
    to.samples = opt.samples;
    to.step = opt.step;
    for (const auto& hp : hs.points) {
        try {
            const GraphMap tzp = local_graph(hp.stable_lift, u1, s1, s2, opt.eps, go);
            const auto tr = heteroclinic_transports(u1, s1, z, hp, to);
            PropagationRow row;
            row.k = hp.k;
            row.point = hp.point;
            row.angle = line_angle_between(u1.direction(hp.point), s2.direction(hp.point));
            row.measured_slope = tzp.slope(0.0);
            const double u0 = tr.u_transport.inverse(0.0);
            row.predicted_slope =
                tr.s_transport.map.derivative(tz(u0)) * tz.slope(u0) / tr.u_transport.map.derivative(u0);
            row.difference = std::fabs(row.measured_slope - row.predicted_slope);
            row.deviation = verify_graph_transport(tz, tzp, tr.u_transport, tr.s_transport);
            table.rows.push_back(row);
        } catch (const Error& e) {
            table.failures.push_back("k = (" + std::to_string(hp.k[0]) + ", " + std::to_string(hp.k[1]) + "): " + e.what());
            if (e.code() == ErrorCode::TangencySuspected) throw;
        }
    }
    table.min_angle = std::numbers::pi;
    for (const auto& row : table.rows) {
        table.max_deviation = std::max(table.max_deviation, row.deviation);
        table.max_difference = std::max(table.max_difference, row.difference);
        table.min_angle = std::min(table.min_angle, row.angle);
    }
    return table;
}

// ---------------------------------------------------------------------------
// End-to-end experiment.

enum class Verdict { smooth, obstructed, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::smooth: return "smooth";
        case Verdict::obstructed: return "obstructed";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

enum class ActionKind { linear, conjugated, perturbed };

inline const char* to_string(ActionKind k) {
    switch (k) {
        case ActionKind::linear: return "linear";
        case ActionKind::conjugated: return "conjugated";
        case ActionKind::perturbed: return "perturbed";
    }
    return "linear";
}

struct Thresholds {
    double transversality = 0.05;
    double lemma3 = 1e-3;
    double prop1 = 1e-6;
    double jacobian = 1e-3;
    double obstruction = 1e-4;
};

struct TeichmullerSetup {
    IntMatrix2 gamma1{2, 1, 1, 1};
    IntMatrix2 gamma2{1, 1, 1, 2};
    ActionKind kind = ActionKind::linear;
    /// Marking displacement q (conjugated) or the perturbation p of gamma1 (perturbed).
    FourierPerturbation modes{{}};
    int N = 256;
    double solver_tolerance = 1e-9;
    int field_iterations = 30;
    double leaf_step = 1e-3;
    double eps = 0.05;
    int heteroclinic_radius = 1;
    int max_period = 2;
    Vec2 basepoint{0.2, 0.6};
    ConeParams cones{0.3, {1.0, 0.0}, 20, 128, std::nullopt};
    int holder_samples = 100;
    int jacobian_samples = 20;
    double jacobian_step = 1e-3;
    std::uint64_t seed = 1;
    Thresholds thresholds;
};

struct Diagnostic {
    std::string name;
    double value = 0.0;
    std::optional<double> threshold;
    /// pass | fail | info | error | skipped
    std::string status;
    std::string detail;
};

struct TeichmullerVerdict {
    double transversality_min_angle = std::numeric_limits<double>::quiet_NaN();
    double lemma3_deviation = std::numeric_limits<double>::quiet_NaN();
    double prop1_affinity_residual = std::numeric_limits<double>::quiet_NaN();
    double jacobian_consistency = std::numeric_limits<double>::quiet_NaN();
    double periodic_mismatch = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> jacobian_vs_marking;
    Verdict verdict = Verdict::inconclusive;
    std::vector<Diagnostic> diagnostics;
    std::vector<std::array<double, 2>> transversality_pairs;  // (pair index, angle)
    PropagationTable propagation;
    SmoothInvariantReport periodic;
    int tangency_events = 0;
    bool hard_failure = false;
};

/// Secant Jacobian of h at x with central differences of half-width delta.
inline Mat2 secant_jacobian(const Conjugacy& h, Vec2 x, double delta) {
    const Vec2 cx = (h(x + Vec2{delta, 0}) - h(x - Vec2{delta, 0})) / (2 * delta);
    const Vec2 cy = (h(x + Vec2{0, delta}) - h(x - Vec2{0, delta})) / (2 * delta);
    return {cx.x, cy.x, cx.y, cy.y};
}

/// Verdict from the diagnostics: obstructed on a periodic-data mismatch,
/// smooth when all four gates pass, inconclusive otherwise.
inline Verdict decide_verdict(const TeichmullerVerdict& v, const Thresholds& t) {
    if (std::isfinite(v.periodic_mismatch) && v.periodic_mismatch > t.obstruction) return Verdict::obstructed;
    if (v.hard_failure || v.tangency_events > 0) return Verdict::inconclusive;
    const bool ok = v.transversality_min_angle >= t.transversality && v.lemma3_deviation <= t.lemma3 &&
                    v.prop1_affinity_residual <= t.prop1 && v.jacobian_consistency <= t.jacobian;
    return ok ? Verdict::smooth : Verdict::inconclusive;
}

inline TeichmullerVerdict teichmuller_experiment(const TeichmullerSetup& cfg) {
    TeichmullerVerdict out;
    auto add = [&](std::string name, double value, std::optional<double> thr, std::string status, std::string detail = {}) {
        out.diagnostics.push_back({std::move(name), value, thr, std::move(status), std::move(detail)});
    };
    auto gate_low = [&](const std::string& name, double value, double thr) {
        add(name, value, thr, value <= thr ? "pass" : "fail");
    };
    auto fail = [&](const std::string& name, const Error& e) {
        out.hard_failure = out.hard_failure || e.code() != ErrorCode::NewtonFailed;
        if (e.code() == ErrorCode::TangencySuspected) ++out.tangency_events;
        add(name, std::numeric_limits<double>::quiet_NaN(), std::nullopt, "error", e.what());
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::optional<HyperbolicElement> e1o, e2o;
    try {
        e1o = eigen_data(cfg.gamma1);
        e2o = eigen_data(cfg.gamma2);
        const auto cert = check_pair_hypothesis(*e1o, *e2o);
        add("pair_hypothesis.min_pairwise_sine", cert.min_pairwise_sine, PairHypothesisCertificate::tolerance,
            cert.hypothesis_ok() ? "pass" : "fail");
        if (!cert.hypothesis_ok()) out.hard_failure = true;
    } catch (const Error& e) {
        fail("pair_hypothesis", e);
        out.verdict = Verdict::inconclusive;
        return out;
    }

    const HyperbolicElement& e1 = *e1o;
    const bool contrast = cfg.kind == ActionKind::perturbed;
    std::optional<Diffeo> phi;
    MapHandle m1, m2;
    try {
        if (cfg.kind == ActionKind::perturbed) {
            m1 = std::make_shared<PerturbedMap>(cfg.gamma1, cfg.modes);
        } else {
            phi = cfg.kind == ActionKind::linear ? Diffeo{} : build_diffeo(cfg.modes);
            const MarkedAction action = conjugated_action(*phi, {cfg.gamma1, cfg.gamma2});
            m1 = action.map(0);
            m2 = action.map(1);
        }
    } catch (const Error& e) {
        fail("action", e);
        out.verdict = Verdict::inconclusive;
        return out;
    }

    try {
        ConeParams cp = cfg.cones;
        cp.direction = e1.v_u;
        const auto cones = verify_anosov_cones(*m1, cp);
        add("anosov_cones.g1.margin", cones.expansion_margin, 1.0, cones.anosov ? "pass" : "fail");
        if (!cones.anosov) out.hard_failure = true;
    } catch (const Error& e) {
        fail("anosov_cones.g1", e);
    }

    std::optional<Conjugacy> h;
    try {
        h.emplace(solve_conjugacy(e1, m1, cfg.N, cfg.solver_tolerance));
        add("conjugacy.residual", h->residual(), cfg.solver_tolerance, "pass");
        add("conjugacy.sweeps", h->sweeps(), std::nullopt, "info");
    } catch (const Error& e) {
        fail("conjugacy", e);
    }

    // Smooth-conjugacy invariants: periodic data of g1.
    try {
        out.periodic = compare_smooth_invariants(*m1, e1, cfg.max_period);
        out.periodic_mismatch = out.periodic.max_mismatch;
        add("periodic_data.max_mismatch", out.periodic_mismatch, cfg.thresholds.obstruction,
            out.periodic_mismatch > cfg.thresholds.obstruction ? "fail" : "pass",
            std::to_string(out.periodic.rows.size()) + " orbits");
    } catch (const Error& e) {
        fail("periodic_data", e);
    }

    // Foliations.
    std::optional<LineField> u1, s1, u2, s2;
    try {
        u1.emplace(compute_line_field(m1, FieldLabel::unstable, cfg.N, cfg.field_iterations));
        s1.emplace(compute_line_field(m1, FieldLabel::stable, cfg.N, cfg.field_iterations));
        if (!contrast) {
            u2.emplace(compute_line_field(m2, FieldLabel::unstable, cfg.N, cfg.field_iterations));
            s2.emplace(compute_line_field(m2, FieldLabel::stable, cfg.N, cfg.field_iterations));
        }
    } catch (const Error& e) {
        fail("line_fields", e);
    }

    // Transversality of the four foliations.
    if (!contrast && u1 && s1 && u2 && s2) {
        const std::array<const LineField*, 4> fs{&*u1, &*s1, &*u2, &*s2};
        double worst = std::numeric_limits<double>::infinity();
        int idx = 0;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j, ++idx) {
                const double a = min_transversality_angle(*fs[i], *fs[j]).angle;
                out.transversality_pairs.push_back({static_cast<double>(idx), a});
                worst = std::min(worst, a);
            }
        out.transversality_min_angle = worst;
        add("transversality.min_angle", worst, cfg.thresholds.transversality,
            worst >= cfg.thresholds.transversality ? "pass" : "fail");
    } else {
        add("transversality.min_angle", nan, cfg.thresholds.transversality, "skipped",
            contrast ? "single generator: no second foliation pair" : "line fields unavailable");
    }

    // Graph transport at heteroclinic points.
    if (!contrast && u1 && s1 && s2) {
        try {
            PropagationOptions po;
            po.eps = cfg.eps;
            po.step = cfg.leaf_step;
            po.refine = cfg.kind != ActionKind::linear;
            out.propagation = tangency_propagation_check(*u1, *s1, *s2, e1, cfg.basepoint, cfg.heteroclinic_radius, po);
            out.lemma3_deviation = out.propagation.max_deviation;
            const bool enough = out.propagation.rows.size() >= 9;
            gate_low("lemma3.max_deviation", out.lemma3_deviation, cfg.thresholds.lemma3);
            add("lemma3.points", static_cast<double>(out.propagation.rows.size() - 1), std::nullopt,
                enough ? "info" : "fail", std::to_string(out.propagation.failures.size()) + " failures");
            if (!enough) out.hard_failure = true;
            add("lemma3.max_slope_difference", out.propagation.max_difference, std::nullopt, "info");
        } catch (const Error& e) {
            fail("lemma3", e);
        }
    } else {
        add("lemma3.max_deviation", nan, cfg.thresholds.lemma3, "skipped",
            contrast ? "single generator: no second stable foliation" : "line fields unavailable");
    }

    // Action regularity and linearization along the unstable and stable directions through the basepoint.
    if (h) {
        double residual = 0.0, stability = 0.0;
        bool ok = true;
        for (const auto& [label, v] : {std::pair<const char*, Vec2>{"unstable", e1.v_u}, {"stable", e1.v_s}}) {
            try {
                const TranslationAction S = translation_action_from_conjugacy(*h, cfg.basepoint, v, cfg.eps);
                const auto reg = verify_action_regularity(S);
                stability = std::max(stability, reg.refinement_stability);
                const double half = std::min(1.5 * cfg.eps, 0.5 * (S.y_hi - S.y_lo) - 0.01);
                const double mid = 0.5 * (S.y_lo + S.y_hi);
                const auto lin = linearize_translation_action(S, mid, {mid - half, mid + half});
                residual = std::max(residual, lin.affinity_residual);
                add(std::string("prop1.alpha.") + label, lin.alpha, std::nullopt, "info");
            } catch (const Error& e) {
                fail(std::string("prop1.") + label, e);
                ok = false;
            }
        }
        add("regularity.refinement_stability", stability, std::nullopt, "info");
        if (ok) {
            out.prop1_affinity_residual = residual;
            gate_low("prop1.affinity_residual", residual, cfg.thresholds.prop1);
        }
    } else {
        add("prop1.affinity_residual", nan, cfg.thresholds.prop1, "skipped", "no conjugacy");
    }

    // Secant Jacobian of h: refinement stability and, with a known marking, agreement with D phi.
    if (h) {
        try {
            std::mt19937_64 rng(cfg.seed);
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            double stab = 0.0, vs = 0.0;
            for (int i = 0; i < cfg.jacobian_samples; ++i) {
                const Vec2 x{uni(rng), uni(rng)};
                const Mat2 J1 = secant_jacobian(*h, x, cfg.jacobian_step);
                const Mat2 J2 = secant_jacobian(*h, x, cfg.jacobian_step / 2);
                stab = std::max(stab, max_abs_entry(J2 - J1));
                if (phi) vs = std::max(vs, max_abs_entry(J2 - phi->jacobian(x)));
            }
            out.jacobian_consistency = stab;
            gate_low("jacobian.refinement_stability", stab, cfg.thresholds.jacobian);
            if (phi) {
                out.jacobian_vs_marking = vs;
                add("jacobian.vs_marking", vs, std::nullopt, "info");
            }
        } catch (const Error& e) {
            fail("jacobian", e);
        }

        try {
            HolderOptions ho;
            ho.samples = cfg.holder_samples;
            ho.seed = cfg.seed;
            const auto est = estimate_holder_exponent(*h, e1.v_u, ho);
            add("holder.exponent.unstable", est.exponent, std::nullopt, "info",
                "stderr " + std::to_string(est.stderr_));
        } catch (const Error& e) {
            fail("holder", e);
        }
    }

    out.verdict = decide_verdict(out, cfg.thresholds);
    return out;
}

}  // namespace anosov
