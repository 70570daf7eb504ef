#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "lattice.hpp"
#include "numerics.hpp"
#include "torus_map.hpp"

namespace anosov {

enum class FieldLabel { stable, unstable };

inline const char* to_string(FieldLabel l) { return l == FieldLabel::stable ? "stable" : "unstable"; }

/// Unoriented direction field on an N x N grid, stored as angles mod pi and
/// interpolated through (cos 2theta, sin 2theta).
class LineField {
public:
    LineField(int n, std::vector<double> angles, FieldLabel label, MapHandle owner, double residual = 0.0,
              int sweeps = 0)
        : n_(n), angles_(std::move(angles)), label_(label), owner_(std::move(owner)), residual_(residual),
          sweeps_(sweeps) {
        std::vector<double> c(angles_.size()), s(angles_.size());
        for (std::size_t k = 0; k < angles_.size(); ++k) {
            c[k] = std::cos(2 * angles_[k]);
            s[k] = std::sin(2 * angles_[k]);
        }
        cos2_ = PeriodicSpline2(static_cast<std::size_t>(n), std::move(c));
        sin2_ = PeriodicSpline2(static_cast<std::size_t>(n), std::move(s));
        const HyperbolicElement e = eigen_data(owner_->linear_part());
        reference_ = label == FieldLabel::unstable ? e.v_u : e.v_s;
    }

    int grid_size() const { return n_; }
    FieldLabel label() const { return label_; }
    const MapHandle& owner() const { return owner_; }
    double residual() const { return residual_; }
    int sweeps() const { return sweeps_; }
    /// Linear eigen-direction of the owner; fixes the default leaf orientation.
    Vec2 reference() const { return reference_; }

    double angle_at_grid(int i, int j) const {
        return angles_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)];
    }
    TorusPoint grid_point(int i, int j) const { return {static_cast<double>(i) / n_, static_cast<double>(j) / n_}; }

    double angle(Vec2 x) const {
        double t = 0.5 * std::atan2(sin2_(x), cos2_(x));
        if (t < 0) t += std::numbers::pi;
        return t;
    }
    Vec2 direction(Vec2 x) const { return direction_from_angle(angle(x)); }

private:
    int n_;
    std::vector<double> angles_;
    FieldLabel label_;
    MapHandle owner_;
    double residual_;
    int sweeps_;
    PeriodicSpline2 cos2_, sin2_;
    Vec2 reference_;
};

/// Graph-transform iteration for E^u (push along g) or E^s (pull back along g^{-1}),
/// started from the linear eigen-direction. Each sweep extends the orbit
/// segment by one step, i.e. after k sweeps the direction at x is
/// Dg(g^{-1}x) ... Dg(g^{-k}x) seed, evaluated through the interpolated field.
inline LineField compute_line_field(MapHandle g, FieldLabel label, int N, int iters = 30) {
    if (N < 4 || iters < 1) throw Error(ErrorCode::InvalidArgument, "grid size and iteration count must be positive");
    const IntMatrix2 A = g->linear_part();
    if (!is_hyperbolic(A)) throw Error(ErrorCode::NotHyperbolic, "line fields need a hyperbolic linear part");
    const HyperbolicElement e = eigen_data(A);
    const auto n = static_cast<std::size_t>(N);
    const double seed = line_angle(label == FieldLabel::unstable ? e.v_u : e.v_s);

    // Where each grid direction is read from, and the matrix carrying it over.
    std::vector<TorusPoint> source(n * n);
    std::vector<Mat2> carry(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const TorusPoint x{static_cast<double>(i) / N, static_cast<double>(j) / N};
            if (label == FieldLabel::unstable) {
                const TorusPoint pre = g->inverse(x);
                source[i * n + j] = pre;
                carry[i * n + j] = g->jacobian(pre);
            } else {
                source[i * n + j] = (*g)(x);
                carry[i * n + j] = g->jacobian(x).inverse();
            }
        }

    std::vector<double> angles(n * n, seed), next(n * n);
    double change = 0.0;
    for (int sweep = 1; sweep <= iters; ++sweep) {
        const LineField current(N, angles, label, g);
        change = 0.0;
        for (std::size_t k = 0; k < n * n; ++k) {
            next[k] = line_angle(carry[k] * current.direction(source[k]));
            change = std::max(change, line_angle_between(direction_from_angle(next[k]), direction_from_angle(angles[k])));
        }
        angles.swap(next);
        if (change < 1e-8) return LineField(N, std::move(angles), label, g, change, sweep);
    }
    throw Error(ErrorCode::NotConverged,
                std::string(to_string(label)) + " field angular change " + std::to_string(change) + " after " +
                    std::to_string(iters) + " sweeps");
}

/// Largest angle between Dg(x) E(x) and E(g(x)) over the grid.
inline double field_invariance_error(const LineField& f) {
    const TorusMap& g = *f.owner();
    double worst = 0.0;
    for (int i = 0; i < f.grid_size(); ++i)
        for (int j = 0; j < f.grid_size(); ++j) {
            const TorusPoint x = f.grid_point(i, j);
            const Vec2 pushed = g.jacobian(x) * direction_from_angle(f.angle_at_grid(i, j));
            worst = std::max(worst, line_angle_between(pushed, f.direction(g(x))));
        }
    return worst;
}

/// Largest angle between directions at neighbouring grid cells.
inline double field_oscillation(const LineField& f) {
    const int n = f.grid_size();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 d = direction_from_angle(f.angle_at_grid(i, j));
            worst = std::max(worst, line_angle_between(d, direction_from_angle(f.angle_at_grid((i + 1) % n, j))));
            worst = std::max(worst, line_angle_between(d, direction_from_angle(f.angle_at_grid(i, (j + 1) % n))));
        }
    return worst;
}

struct TransversalityResult {
    double angle = 0.0;
    TorusPoint argmin;
};

inline TransversalityResult min_transversality_angle(const LineField& f1, const LineField& f2) {
    if (f1.grid_size() != f2.grid_size()) throw Error(ErrorCode::InvalidArgument, "line fields on different grids");
    TransversalityResult r{std::numbers::pi, {0.0, 0.0}};
    for (int i = 0; i < f1.grid_size(); ++i)
        for (int j = 0; j < f1.grid_size(); ++j) {
            const double a = line_angle_between(direction_from_angle(f1.angle_at_grid(i, j)),
                                                direction_from_angle(f2.angle_at_grid(i, j)));
            if (a < r.angle) r = {a, f1.grid_point(i, j)};
        }
    return r;
}

// ---------------------------------------------------------------------------
// Leaves.

/// Arc-length parametrized leaf in the universal cover; params ascend and
/// include 0 at the base point.
class LeafSegment {
public:
    LeafSegment(FieldLabel label, std::vector<double> params, std::vector<Vec2> points, std::vector<Vec2> tangents)
        : label_(label), s_(std::move(params)), p_(std::move(points)), t_(std::move(tangents)) {
        if (s_.size() < 2) throw Error(ErrorCode::InvalidArgument, "leaf segment needs two points");
        constexpr std::size_t chunk = 32;
        for (std::size_t a = 0; a + 1 < p_.size(); a += chunk) {
            const std::size_t b = std::min(p_.size() - 1, a + chunk);
            Box box{a, b, p_[a].x, p_[a].x, p_[a].y, p_[a].y};
            for (std::size_t k = a; k <= b; ++k) {
                box.x0 = std::min(box.x0, p_[k].x);
                box.x1 = std::max(box.x1, p_[k].x);
                box.y0 = std::min(box.y0, p_[k].y);
                box.y1 = std::max(box.y1, p_[k].y);
            }
            boxes_.push_back(box);
        }
    }

    FieldLabel label() const { return label_; }
    double lo() const { return s_.front(); }
    double hi() const { return s_.back(); }
    bool contains(double s) const { return s >= lo() && s <= hi(); }
    const std::vector<double>& params() const { return s_; }
    const std::vector<Vec2>& points() const { return p_; }
    const std::vector<Vec2>& tangents() const { return t_; }

    Vec2 base_lift() const { return at(0.0); }
    TorusPoint base() const { return wrap(base_lift()); }

    Vec2 at(double s) const { return hermite(s, false); }
    Vec2 tangent(double s) const { return normalized(hermite(s, true)); }

    struct Projection {
        double param;
        double signed_distance;  // positive to the left of the tangent
        double distance;
        bool interior;
    };

    /// Nearest point, or nullopt when y is farther than `reach` from every chunk.
    std::optional<Projection> project(Vec2 y, double reach) const {
        std::optional<Projection> best;
        for (const Box& box : boxes_) {
            if (y.x < box.x0 - reach || y.x > box.x1 + reach || y.y < box.y0 - reach || y.y > box.y1 + reach)
                continue;
            for (std::size_t k = box.a; k < box.b; ++k) {
                const Vec2 chord = p_[k + 1] - p_[k];
                double u = std::clamp(dot(y - p_[k], chord) / dot(chord, chord), 0.0, 1.0);
                double s = s_[k] + u * (s_[k + 1] - s_[k]);
                for (int it = 0; it < 4; ++it) {
                    const Vec2 d = hermite(s, true);
                    s = std::clamp(s + dot(y - at(s), d) / dot(d, d), s_[k], s_[k + 1]);
                }
                const Vec2 r = y - at(s);
                const double dist = norm(r);
                if (!best || dist < best->distance) {
                    best = Projection{s, cross(tangent(s), r), dist, s > lo() && s < hi()};
                }
            }
        }
        return best;
    }

private:
    struct Box {
        std::size_t a, b;
        double x0, x1, y0, y1;
    };

    Vec2 hermite(double s, bool deriv) const {
        auto it = std::upper_bound(s_.begin(), s_.end(), s);
        std::size_t k = static_cast<std::size_t>(it - s_.begin());
        k = std::clamp<std::size_t>(k, 1, s_.size() - 1) - 1;
        const double h = s_[k + 1] - s_[k];
        const double u = (s - s_[k]) / h;
        const Vec2 m0 = h * t_[k], m1 = h * t_[k + 1];
        if (!deriv) {
            const double u2 = u * u, u3 = u2 * u;
            return (2 * u3 - 3 * u2 + 1) * p_[k] + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * p_[k + 1] +
                   (u3 - u2) * m1;
        }
        const double u2 = u * u;
        return ((6 * u2 - 6 * u) * p_[k] + (3 * u2 - 4 * u + 1) * m0 + (-6 * u2 + 6 * u) * p_[k + 1] +
                (3 * u2 - 2 * u) * m1) / h;
    }

    FieldLabel label_;
    std::vector<double> s_;
    std::vector<Vec2> p_, t_;
    std::vector<Box> boxes_;
};

namespace detail {

/// Field direction at y with the sign nearest `heading`.
inline Vec2 aligned(const LineField& f, Vec2 y, Vec2 heading) {
    const Vec2 d = f.direction(y);
    const Vec2 a = dot(d, heading) < 0 ? -1.0 * d : d;
    if (line_angle_between(a, heading) > std::numbers::pi / 4 || dot(a, heading) <= 0)
        throw Error(ErrorCode::SignAmbiguity, "field direction turned by more than pi/4 within one step");
    return a;
}

struct LeafStep {
    Vec2 point;
    Vec2 heading;
};

inline LeafStep rk4(const LineField& f, Vec2 y, Vec2 heading, double h) {
    const Vec2 k1 = aligned(f, y, heading);
    const Vec2 k2 = aligned(f, y + 0.5 * h * k1, k1);
    const Vec2 k3 = aligned(f, y + 0.5 * h * k2, k2);
    const Vec2 k4 = aligned(f, y + h * k3, k3);
    const Vec2 next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return {next, aligned(f, next, k4)};
}

inline Vec2 initial_heading(const LineField& f, Vec2 x, std::optional<Vec2> hint) {
    const Vec2 d = f.direction(x);
    const Vec2 ref = hint ? *hint : f.reference();
    return dot(d, ref) < 0 ? -1.0 * d : d;
}

}  // namespace detail

/// Leaf of `field` through x (a lift), parametrized by arc length on [s_lo, s_hi].
/// Positive parameters follow `heading` (default: the owner's linear eigen-direction).
inline LeafSegment leaf_segment(const LineField& field, Vec2 x, double s_lo, double s_hi, double step = 1e-3,
                                std::optional<Vec2> heading = std::nullopt) {
    if (!(s_lo <= 0.0 && s_hi >= 0.0 && s_hi > s_lo) || !(step > 0.0))
        throw Error(ErrorCode::InvalidArgument, "leaf range must contain 0 and the step must be positive");
    const Vec2 h0 = detail::initial_heading(field, x, heading);
    std::vector<double> params;
    std::vector<Vec2> points, tangents;

    const int nb = s_lo < 0 ? static_cast<int>(std::ceil(-s_lo / step - 1e-9)) : 0;
    if (nb > 0) {
        const double h = -s_lo / nb;
        std::vector<Vec2> bp{x}, bt{h0};
        Vec2 y = x, H = -1.0 * h0;
        for (int k = 1; k <= nb; ++k) {
            const auto st = detail::rk4(field, y, H, h);
            y = st.point;
            H = st.heading;
            bp.push_back(y);
            bt.push_back(-1.0 * H);
        }
        for (int k = nb; k >= 1; --k) {
            params.push_back(k == nb ? s_lo : -k * h);
            points.push_back(bp[static_cast<std::size_t>(k)]);
            tangents.push_back(bt[static_cast<std::size_t>(k)]);
        }
    }
    params.push_back(0.0);
    points.push_back(x);
    tangents.push_back(h0);
    const int nf = s_hi > 0 ? static_cast<int>(std::ceil(s_hi / step - 1e-9)) : 0;
    if (nf > 0) {
        const double h = s_hi / nf;
        Vec2 y = x, H = h0;
        for (int k = 1; k <= nf; ++k) {
            const auto st = detail::rk4(field, y, H, h);
            y = st.point;
            H = st.heading;
            params.push_back(k == nf ? s_hi : k * h);
            points.push_back(y);
            tangents.push_back(H);
        }
    }
    return LeafSegment(field.label(), std::move(params), std::move(points), std::move(tangents));
}

/// Leaf from x of signed length L (negative L runs against the heading).
inline LeafSegment integrate_leaf(const LineField& field, Vec2 x, double L, double step = 1e-3,
                                  std::optional<Vec2> heading = std::nullopt) {
    return L >= 0 ? leaf_segment(field, x, 0.0, L, step, heading) : leaf_segment(field, x, L, 0.0, step, heading);
}

// ---------------------------------------------------------------------------
// Crossings and holonomy.

struct CrossingOptions {
    double budget = 2.0;
    double step = 1e-3;
    double min_angle = 0.01;
    /// Preferred direction of travel; tried first, then its opposite.
    std::optional<Vec2> heading;
};

struct Crossing {
    double param = 0.0;        // parameter on the target segment
    Vec2 point;                // lift of the crossing point
    double leaf_length = 0.0;  // signed, relative to the travel direction tried first
    double angle = 0.0;
    Vec2 heading;              // travel direction used at the start
};

/// Slides from `start` along the leaf of `field` until it crosses `to`.
inline Crossing leaf_crossing(const LineField& field, Vec2 start, const LeafSegment& to, const CrossingOptions& opt = {}) {
    const double reach = 4.0 * opt.step;
    if (const auto p0 = to.project(start, reach); p0 && p0->distance < 1e-14) {
        const Vec2 d = field.direction(start);
        return {p0->param, start, 0.0, line_angle_between(d, to.tangent(p0->param)), d};
    }
    Vec2 first;
    if (opt.heading) {
        first = detail::initial_heading(field, start, opt.heading);
    } else {
        // Head towards the nearest point of the target.
        const auto p = to.project(start, 1e9);
        first = detail::initial_heading(field, start, to.at(p->param) - start);
    }

    auto march = [&](Vec2 H) -> std::optional<Crossing> {
        Vec2 y = start;
        double travelled = 0.0;
        auto sd = [&](Vec2 q) { return to.project(q, reach); };
        auto prev = sd(y);
        while (travelled < opt.budget) {
            const double h = std::min(opt.step, opt.budget - travelled);
            const auto st = detail::rk4(field, y, H, h);
            const auto cur = sd(st.point);
            if (prev && cur && prev->interior && cur->interior &&
                (cur->signed_distance == 0.0 || (prev->signed_distance > 0) != (cur->signed_distance > 0))) {
                auto f = [&](double tau) {
                    const auto pr = to.project(detail::rk4(field, y, H, tau).point, reach + h);
                    return pr ? pr->signed_distance : std::numeric_limits<double>::quiet_NaN();
                };
                RootOptions ro;
                ro.bisect_until = 1e-10;
                ro.tolerance = 1e-15;
                const auto tau = bracketed_root(f, 0.0, h, ro);
                if (!tau) return std::nullopt;
                const auto hit = detail::rk4(field, y, H, *tau);
                const auto pr = to.project(hit.point, reach + h);
                Crossing c;
                c.param = pr->param;
                c.point = hit.point;
                c.leaf_length = travelled + *tau;
                c.angle = line_angle_between(hit.heading, to.tangent(pr->param));
                c.heading = H;
                if (c.angle < opt.min_angle)
                    throw Error(ErrorCode::TangencySuspected,
                                "crossing angle " + std::to_string(c.angle) + " rad below threshold");
                return c;
            }
            y = st.point;
            H = st.heading;
            prev = cur;
            travelled += h;
        }
        return std::nullopt;
    };

    if (auto c = march(first)) {
        c->heading = first;
        return *c;
    }
    if (auto c = march(-1.0 * first)) {
        c->leaf_length = -c->leaf_length;
        c->heading = first;
        return *c;
    }
    throw Error(ErrorCode::LeafEscaped, "leaf did not reach the target transversal within the length budget");
}

struct HolonomyOptions {
    int samples = 41;
    double budget = 2.0;
    double step = 1e-3;
    double min_angle = 0.01;
    /// Sub-interval of the source parameters to sample; defaults to the whole segment.
    std::optional<std::array<double, 2>> domain;
};

/// Holonomy between transversals along the leaves of a foliation.
struct HolonomyMap {
    std::vector<double> s, s_prime, leaf_lengths, angles;
    SampledFunction map;

    double operator()(double v) const { return map(v); }
    double inverse(double v) const { return map.inverse(v); }
    double lo() const { return map.lo(); }
    double hi() const { return map.hi(); }
    double range_lo() const { return map.range_lo(); }
    double range_hi() const { return map.range_hi(); }
    bool in_domain(double v) const { return map.contains(v); }
    bool in_range(double v) const { return v >= range_lo() && v <= range_hi(); }
    double min_angle() const { return *std::min_element(angles.begin(), angles.end()); }
};

inline HolonomyMap holonomy(const LineField& field, const LeafSegment& from, const LeafSegment& to,
                            const HolonomyOptions& opt = {}) {
    if (opt.samples < 3) throw Error(ErrorCode::InvalidArgument, "holonomy needs at least 3 samples");
    const double a = opt.domain ? (*opt.domain)[0] : from.lo();
    const double b = opt.domain ? (*opt.domain)[1] : from.hi();
    if (!(a < b) || a < from.lo() || b > from.hi())
        throw Error(ErrorCode::InvalidArgument, "holonomy domain outside the source transversal");
    HolonomyMap out;
    CrossingOptions co{opt.budget, opt.step, opt.min_angle, std::nullopt};
    for (int i = 0; i < opt.samples; ++i) {
        const double s = i == opt.samples - 1 ? b : a + (b - a) * i / (opt.samples - 1);
        const Crossing c = leaf_crossing(field, from.at(s), to, co);
        // Keep later samples travelling the same way as the first one.
        co.heading = c.leaf_length >= 0 ? c.heading : -1.0 * c.heading;
        out.s.push_back(s);
        out.s_prime.push_back(c.param);
        out.leaf_lengths.push_back(c.leaf_length);
        out.angles.push_back(c.angle);
    }
    bool inc = true, dec = true;
    for (std::size_t k = 1; k < out.s_prime.size(); ++k) {
        inc = inc && out.s_prime[k] > out.s_prime[k - 1];
        dec = dec && out.s_prime[k] < out.s_prime[k - 1];
    }
    if (!inc && !dec) throw Error(ErrorCode::NotMonotone, "holonomy samples are not strictly monotone");
    out.map = SampledFunction(out.s, out.s_prime, SlopeRule::monotone);
    return out;
}

// ---------------------------------------------------------------------------
// Local graphs.

/// theta_z: the leaf of a target foliation through z written as s = theta(u)
/// in the chart whose axes are the frame leaves through z.
struct GraphMap {
    Vec2 basepoint;
    SampledFunction values;

    double operator()(double u) const { return values(u); }
    double slope(double u) const { return values.derivative(u); }
    double lo() const { return values.lo(); }
    double hi() const { return values.hi(); }
    bool in_domain(double u) const { return values.contains(u); }
};

struct GraphOptions {
    /// Half-height of the chart along the frame_s axis; defaults to 5 eps.
    std::optional<double> s_extent;
    int samples = 41;
    double step = 1e-3;
};

/// Chart coordinates (u, s) of y: parameters where the frame_s leaf through y
/// meets W_u and where the frame_u leaf through y meets W_s.
inline Vec2 chart_coordinates(const LineField& frame_u, const LineField& frame_s, const LeafSegment& wu,
                              const LeafSegment& ws, Vec2 y, double budget, double step) {
    const CrossingOptions co{budget, step, 0.01, std::nullopt};
    const double u = leaf_crossing(frame_s, y, wu, co).param;
    const double s = leaf_crossing(frame_u, y, ws, co).param;
    return {u, s};
}

inline GraphMap local_graph(Vec2 z, const LineField& frame_u, const LineField& frame_s, const LineField& target,
                            double eps, const GraphOptions& opt = {}) {
    if (!(eps > 0.0) || opt.samples < 5) throw Error(ErrorCode::InvalidArgument, "chart size and sample count");
    const double s_ext = opt.s_extent.value_or(5.0 * eps);
    if (line_angle_between(target.direction(z), frame_s.direction(z)) < 0.05)
        throw Error(ErrorCode::InvalidArgument, "target not transverse to frame_s at the base point");
    const double reach_u = 2.0 * eps, reach_s = 1.5 * s_ext;
    const LeafSegment wu = leaf_segment(frame_u, z, -reach_u, reach_u, opt.step);
    const LeafSegment ws = leaf_segment(frame_s, z, -reach_s, reach_s, opt.step);
    const double radius = std::hypot(eps, s_ext);
    const LeafSegment tl = leaf_segment(target, z, -2.0 * radius, 2.0 * radius, opt.step);
    const double budget = 4.0 * radius;

    auto coords = [&](double sigma) {
        if (!tl.contains(sigma)) throw Error(ErrorCode::ChartOverflow, "target leaf left the chart");
        const Vec2 c = chart_coordinates(frame_u, frame_s, wu, ws, tl.at(sigma), budget, opt.step);
        if (std::fabs(c.y) > s_ext) throw Error(ErrorCode::ChartOverflow, "graph value beyond the chart height");
        return c;
    };
    // Choose the target-leaf step so that about `samples` points cover [-eps, eps].
    const double probe = std::min(1e-2, 0.1 * eps);
    const double rate = std::fabs(coords(probe).x - coords(-probe).x) / (2.0 * probe);
    if (!(rate > 1e-6)) throw Error(ErrorCode::ChartOverflow, "target leaf does not advance along the u axis");
    const int half = (opt.samples - 1) / 2;
    const double dsig = eps / rate / half;

    std::vector<Vec2> pts{{0.0, 0.0}};
    for (int dir : {1, -1}) {
        for (int k = 1;; ++k) {
            if (k > 4 * half) throw Error(ErrorCode::ChartOverflow, "target leaf did not cover the chart domain");
            const Vec2 c = coords(dir * k * dsig);
            pts.push_back(c);
            if (std::fabs(c.x) >= eps) break;
        }
    }
    std::sort(pts.begin(), pts.end(), [](Vec2 p, Vec2 q) { return p.x < q.x; });
    std::vector<double> us, ss;
    for (const Vec2& p : pts) {
        if (!us.empty() && !(p.x > us.back())) throw Error(ErrorCode::NotMonotone, "graph is not single valued");
        us.push_back(p.x);
        ss.push_back(p.y);
    }
    return GraphMap{z, SampledFunction(std::move(us), std::move(ss))};
}

// ---------------------------------------------------------------------------
// Heteroclinic points and graph transport.

struct HeteroclinicPoint {
    std::array<int, 2> k{0, 0};
    double a = 0.0;  // parameter on the unstable leaf of z
    double b = 0.0;  // parameter on the stable leaf of z
    TorusPoint point;
    Vec2 unstable_lift;  // z + a v_u (or its nonlinear counterpart)
    Vec2 stable_lift;    // z + b v_s, differs from unstable_lift by k
};

struct HeteroclinicSearch {
    std::vector<HeteroclinicPoint> points;
    std::vector<std::string> failures;
};

struct HeteroclinicFields {
    const LineField* unstable = nullptr;
    const LineField* stable = nullptr;
    double step = 1e-3;
};

/// Points of W^u(z) cap W^s(z): z + a v_u = z + b v_s + k for integer k with
/// 0 < |k|_inf <= R, refined onto the leaves of the given fields when supplied.
inline HeteroclinicSearch heteroclinic_points(Vec2 z, const HyperbolicElement& e1, int R,
                                              std::optional<HeteroclinicFields> fields = std::nullopt) {
    if (R < 1 || R > 3) throw Error(ErrorCode::InvalidArgument, "radius must lie in [1, 3]");
    HeteroclinicSearch out;
    for (int kx = -R; kx <= R; ++kx)
        for (int ky = -R; ky <= R; ++ky) {
            if (kx == 0 && ky == 0) continue;
            const Vec2 k{static_cast<double>(kx), static_cast<double>(ky)};
            // a v_u - b v_s = k
            const double det = cross(e1.v_u, -1.0 * e1.v_s);
            const double a = cross(k, -1.0 * e1.v_s) / det;
            const double b = cross(e1.v_u, k) / det;
            HeteroclinicPoint hp{{kx, ky}, a, b, wrap(z + a * e1.v_u), z + a * e1.v_u, z + b * e1.v_s};
            out.points.push_back(hp);
        }
    if (!fields) return out;

    double amax = 0.0, bmax = 0.0;
    for (const auto& hp : out.points) {
        amax = std::max(amax, std::fabs(hp.a));
        bmax = std::max(bmax, std::fabs(hp.b));
    }
    const double margin = 0.25;
    const LeafSegment wu = leaf_segment(*fields->unstable, z, -amax - margin, amax + margin, fields->step, e1.v_u);
    const LeafSegment ws = leaf_segment(*fields->stable, z, -bmax - margin, bmax + margin, fields->step, e1.v_s);
    std::vector<HeteroclinicPoint> refined;
    for (auto hp : out.points) {
        const Vec2 k{static_cast<double>(hp.k[0]), static_cast<double>(hp.k[1])};
        double a = hp.a, b = hp.b;
        bool ok = false;
        for (int iter = 0; iter < 30; ++iter) {
            if (!wu.contains(a) || !ws.contains(b)) break;
            const Vec2 r = wu.at(a) - ws.at(b) - k;
            if (norm(r) < 1e-13) {
                ok = true;
                break;
            }
            const Vec2 tu = wu.tangent(a), ts = ws.tangent(b);
            const Mat2 J{tu.x, -ts.x, tu.y, -ts.y};
            if (std::fabs(J.det()) < 1e-12) break;
            const Vec2 d = J.inverse() * r;
            a -= d.x;
            b -= d.y;
        }
        if (!ok) {
            out.failures.push_back("RefinementFailed: k = (" + std::to_string(hp.k[0]) + ", " + std::to_string(hp.k[1]) + ")");
            continue;
        }
        hp.a = a;
        hp.b = b;
        hp.unstable_lift = wu.at(a);
        hp.stable_lift = ws.at(b);
        hp.point = wrap(hp.unstable_lift);
        refined.push_back(hp);
    }
    out.points = std::move(refined);
    return out;
}

/// The two transports relating the charts at z and at a heteroclinic point z':
/// u_transport carries W^u(z) to W^u(z') along stable leaves, s_transport
/// carries W^s(z) to W^s(z') along unstable leaves.
struct GraphTransports {
    HolonomyMap u_transport;
    HolonomyMap s_transport;
};

struct TransportOptions {
    std::array<double, 2> u_domain{-0.05, 0.05};
    std::array<double, 2> s_domain{-0.25, 0.25};
    int samples = 41;
    double step = 1e-3;
    double budget = 2.0;
};

inline GraphTransports heteroclinic_transports(const LineField& frame_u, const LineField& frame_s, Vec2 z,
                                               const HeteroclinicPoint& hp, const TransportOptions& opt = {}) {
    const double du = 1.5 * std::max(std::fabs(opt.u_domain[0]), std::fabs(opt.u_domain[1])) + 0.01;
    const double ds = 1.5 * std::max(std::fabs(opt.s_domain[0]), std::fabs(opt.s_domain[1])) + 0.01;
    const Vec2 ru = frame_u.reference(), rs = frame_s.reference();
    const LeafSegment wu_z = leaf_segment(frame_u, z, -du, du, opt.step, ru);
    const LeafSegment wu_zp = leaf_segment(frame_u, hp.stable_lift, -2.0 * du, 2.0 * du, opt.step, ru);
    const LeafSegment ws_z = leaf_segment(frame_s, z, -ds, ds, opt.step, rs);
    const LeafSegment ws_zp = leaf_segment(frame_s, hp.unstable_lift, -2.0 * ds, 2.0 * ds, opt.step, rs);
    HolonomyOptions ho;
    ho.samples = opt.samples;
    ho.step = opt.step;
    ho.budget = opt.budget;
    ho.domain = opt.u_domain;
    HolonomyMap ut = holonomy(frame_s, wu_z, wu_zp, ho);
    ho.domain = opt.s_domain;
    HolonomyMap st = holonomy(frame_u, ws_z, ws_zp, ho);
    return {std::move(ut), std::move(st)};
}

/// sup over the common domain of |theta_z'(t) - s_transport(theta_z(u_transport^{-1}(t)))|.
inline double verify_graph_transport(const GraphMap& theta_z, const GraphMap& theta_zp, const HolonomyMap& u_transport,
                                     const HolonomyMap& s_transport, int samples = 101) {
    const double lo = std::max(theta_zp.lo(), u_transport.range_lo());
    const double hi = std::min(theta_zp.hi(), u_transport.range_hi());
    double worst = 0.0;
    int used = 0;
    if (lo < hi) {
        for (int i = 0; i < samples; ++i) {
            const double t = std::min(hi, lo + (hi - lo) * i / (samples - 1));
            const double u = u_transport.inverse(t);
            if (!theta_z.in_domain(u)) continue;
            const double v = theta_z(u);
            if (!s_transport.in_domain(v)) continue;
            worst = std::max(worst, std::fabs(theta_zp(t) - s_transport(v)));
            ++used;
        }
    }
    if (used == 0) throw Error(ErrorCode::DomainMismatch, "composed transport has an empty domain");
    return worst;
}

}  // namespace anosov
