#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "lattice.hpp"
#include "numerics.hpp"
#include "torus_map.hpp"

namespace anosov {

/// Periodic displacement u on an N x N grid, interpolated by periodic bicubic splines.
class DisplacementField {
public:
    DisplacementField() = default;
    DisplacementField(int n, std::vector<double> u1, std::vector<double> u2)
        : n_(n), u1_(std::move(u1)), u2_(std::move(u2)),
          s1_(static_cast<std::size_t>(n), u1_), s2_(static_cast<std::size_t>(n), u2_) {}

    int grid_size() const { return n_; }
    Vec2 at_grid(int i, int j) const {
        const auto k = static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
        return {u1_[k], u2_[k]};
    }
    Vec2 operator()(Vec2 x) const { return {s1_(x), s2_(x)}; }

    double sup_norm() const {
        double m = 0.0;
        for (std::size_t k = 0; k < u1_.size(); ++k) m = std::max(m, std::hypot(u1_[k], u2_[k]));
        return m;
    }

private:
    int n_ = 0;
    std::vector<double> u1_, u2_;
    PeriodicSpline2 s1_, s2_;
};

/// h = id + u with h o A = g o h, homotopic to the identity.
class Conjugacy {
public:
    Conjugacy(DisplacementField field, HyperbolicElement source, MapHandle target, double residual,
              std::vector<double> history)
        : field_(std::move(field)), source_(std::move(source)), target_(std::move(target)),
          residual_(residual), history_(std::move(history)) {}

    const DisplacementField& field() const { return field_; }
    const HyperbolicElement& source() const { return source_; }
    const MapHandle& target() const { return target_; }
    double residual() const { return residual_; }
    int sweeps() const { return static_cast<int>(history_.size()); }
    const std::vector<double>& residual_history() const { return history_; }
    int grid_size() const { return field_.grid_size(); }

    /// Spline-only evaluation of h (lift valued).
    Vec2 interpolated(Vec2 x) const { return x + field_(x); }

    /// u(x) refined by solving the conjugacy equation along the A-orbit
    /// segment x_{-K..K}; spline values enter only as boundary data at
    /// x_{K+1} (unstable part) and x_{-K-1} (stable part).
    Vec2 displacement(Vec2 x) const {
        const int K = orbit_depth;
        const int M = 2 * K + 3;  // indices -K-1 .. K+1
        std::vector<Vec2> xs(M);
        const Mat2 A = source_.matrix.to_real();
        const Mat2 Ai = source_.matrix.inverse().to_real();
        const int mid = K + 1;
        xs[mid] = wrap(x);
        for (int k = mid + 1; k < M; ++k) xs[k] = wrap(A * xs[k - 1]);
        for (int k = mid - 1; k >= 0; --k) xs[k] = wrap(Ai * xs[k + 1]);

        std::vector<double> a(M), b(M);
        for (int k = 0; k < M; ++k) {
            const Vec2 c = source_.split(field_(xs[k]));
            a[k] = c.x;
            b[k] = c.y;
        }
        const double eu = source_.eigenvalue_u(), es = source_.eigenvalue_s();
        const TorusMap& g = *target_;
        auto u_at = [&](int k) { return source_.combine(a[k], b[k]); };
        for (int sweep = 0; sweep < 60; ++sweep) {
            double change = 0.0;
            for (int k = M - 2; k >= 1; --k) {
                const Vec2 P = source_.split(g.perturbation(xs[k] + u_at(k)));
                const double na = (a[k + 1] - P.x) / eu;
                change = std::max(change, std::fabs(na - a[k]));
                a[k] = na;
            }
            for (int k = 1; k <= M - 2; ++k) {
                const Vec2 P = source_.split(g.perturbation(xs[k - 1] + u_at(k - 1)));
                const double nb = es * b[k - 1] + P.y;
                change = std::max(change, std::fabs(nb - b[k]));
                b[k] = nb;
            }
            if (change < 1e-15) break;
        }
        return u_at(mid);
    }

    /// h(x), lift valued: x + u(x).
    Vec2 operator()(Vec2 x) const { return x + displacement(x); }

    /// h^{-1}(y), the preimage nearest y.
    Vec2 inverse(Vec2 y) const {
        Vec2 x = y;
        for (int i = 0; i < 30; ++i) x = y - field_(x);
        constexpr double step = 1e-6;
        for (int iter = 0; iter < 30; ++iter) {
            const Vec2 r = (*this)(x) - y;
            if (norm(r) < 1e-13) return x;
            const Vec2 cx = ((*this)(x + Vec2{step, 0}) - (*this)(x - Vec2{step, 0})) / (2 * step);
            const Vec2 cy = ((*this)(x + Vec2{0, step}) - (*this)(x - Vec2{0, step})) / (2 * step);
            const Mat2 J{cx.x, cy.x, cx.y, cy.y};
            x -= J.inverse() * r;
        }
        if (norm((*this)(x) - y) < 1e-10) return x;
        throw Error(ErrorCode::NewtonFailed, "conjugacy inversion did not converge");
    }

    /// sup torus-distance(h(Ax), g(h(x))) over an M x M grid using the spline only.
    double interpolated_residual(int m) const {
        const Mat2 A = source_.matrix.to_real();
        double worst = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const Vec2 x{static_cast<double>(i) / m, static_cast<double>(j) / m};
                const Vec2 lhs = interpolated(wrap(A * x));
                const Vec2 rhs = target_->lift(interpolated(x));
                worst = std::max(worst, torus_distance(lhs, rhs));
            }
        return worst;
    }

    /// Same residual with the orbit-refined h.
    double refined_residual(int m) const {
        const Mat2 A = source_.matrix.to_real();
        double worst = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const Vec2 x{static_cast<double>(i) / m, static_cast<double>(j) / m};
                worst = std::max(worst, torus_distance((*this)(wrap(A * x)), target_->lift((*this)(x))));
            }
        return worst;
    }

    int orbit_depth = 25;

private:
    DisplacementField field_;
    HyperbolicElement source_;
    MapHandle target_;
    double residual_;
    std::vector<double> history_;
};

struct ConjugacyOptions {
    int max_sweeps = 500;
    /// Start from a random field with this sup norm instead of u = 0.
    std::optional<double> random_start;
    std::uint64_t seed = 1;
};

/// Component-split fixed-point iteration for u(Ax) = A u(x) + p(x + u(x)):
/// the v_u part is solved backward (factor 1/lambda_u), the v_s part
/// forward (factor lambda_s). Each sweep is a Jacobi update over the grid.
inline Conjugacy solve_conjugacy(const HyperbolicElement& A, MapHandle g, int N, double tol,
                                 const ConjugacyOptions& opt = {}) {
    if (!(g->linear_part() == A.matrix))
        throw Error(ErrorCode::InvalidArgument, "target map is not homotopic to the linear model");
    if (N < 4 || !(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid size or tolerance");
    const auto n = static_cast<std::size_t>(N);
    const std::size_t total = n * n;
    auto mod = [N](std::int64_t v) { return static_cast<std::size_t>(((v % N) + N) % N); };
    std::vector<std::size_t> fwd(total), bwd(total);
    const IntMatrix2 Ai = A.matrix.inverse();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const auto ii = static_cast<std::int64_t>(i), jj = static_cast<std::int64_t>(j);
            fwd[i * n + j] = mod(A.matrix.a() * ii + A.matrix.b() * jj) * n + mod(A.matrix.c() * ii + A.matrix.d() * jj);
            bwd[i * n + j] = mod(Ai.a() * ii + Ai.b() * jj) * n + mod(Ai.c() * ii + Ai.d() * jj);
        }

    std::vector<double> a(total, 0.0), b(total, 0.0);
    if (opt.random_start) {
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        double m = 0.0;
        for (std::size_t k = 0; k < total; ++k) {
            a[k] = dist(rng);
            b[k] = dist(rng);
            m = std::max(m, norm(A.combine(a[k], b[k])));
        }
        for (std::size_t k = 0; k < total; ++k) {
            a[k] *= *opt.random_start / m;
            b[k] *= *opt.random_start / m;
        }
    }

    const Mat2 Ar = A.matrix.to_real();
    const double eu = A.eigenvalue_u(), es = A.eigenvalue_s();
    std::vector<double> pu(total), ps(total), na(total), nb(total);
    std::vector<double> history;
    double prev = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int sweep = 0;; ++sweep) {
        double residual = 0.0, unorm = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t k = i * n + j;
                const Vec2 x{static_cast<double>(i) / N, static_cast<double>(j) / N};
                const Vec2 u = A.combine(a[k], b[k]);
                const Vec2 P = g->perturbation(x + u);
                const Vec2 c = A.split(P);
                pu[k] = c.x;
                ps[k] = c.y;
                const Vec2 uA = A.combine(a[fwd[k]], b[fwd[k]]);
                residual = std::max(residual, norm(uA - Ar * u - P));
                unorm = std::max(unorm, norm(u));
            }
        history.push_back(residual);
        if (unorm >= 0.5)
            throw Error(ErrorCode::SolverDiverged, "||u|| reached " + std::to_string(unorm));
        if (residual < tol) break;
        stalled = residual >= prev ? stalled + 1 : 0;
        prev = residual;
        if (stalled >= 10)
            throw Error(ErrorCode::SolverDiverged, "residual did not decrease for 10 consecutive sweeps");
        if (sweep >= opt.max_sweeps)
            throw Error(ErrorCode::SolverDiverged, "no convergence within the sweep budget");
        for (std::size_t k = 0; k < total; ++k) {
            na[k] = (a[fwd[k]] - pu[k]) / eu;
            nb[k] = es * b[bwd[k]] + ps[bwd[k]];
        }
        a.swap(na);
        b.swap(nb);
    }

    std::vector<double> u1(total), u2(total);
    for (std::size_t k = 0; k < total; ++k) {
        const Vec2 u = A.combine(a[k], b[k]);
        u1[k] = u.x;
        u2[k] = u.y;
    }
    const double res = history.back();
    return Conjugacy(DisplacementField(N, std::move(u1), std::move(u2)), A, std::move(g), res, std::move(history));
}

/// Unit secant direction of h(line through x with direction v) at scale delta.
inline Vec2 pushforward_foliation_direction(const Conjugacy& h, Vec2 direction, TorusPoint x, double delta) {
    if (!(delta >= 1e-6 && delta <= 1e-2))
        throw Error(ErrorCode::InvalidArgument, "secant scale must lie in [1e-6, 1e-2]");
    const Vec2 w = delta * direction + (h.displacement(x + delta * direction) - h.displacement(x));
    if (norm(w) < 1e-12) throw Error(ErrorCode::DegenerateSecant, "secant shorter than 1e-12");
    return normalized(w);
}

struct HolderOptions {
    int samples = 100;
    int coarsest_exponent = 6;   // delta = 2^-6
    int finest_exponent = 18;    // delta = 2^-18
    std::uint64_t seed = 1;
};

struct HolderEstimate {
    double exponent = 0.0;
    double stderr_ = 0.0;
};

/// Mean over random base points of the log-log slope of |h(x + d v) - h(x)| against d.
inline HolderEstimate estimate_holder_exponent(const Conjugacy& h, Vec2 direction, const HolderOptions& opt = {}) {
    if (opt.coarsest_exponent < 4 || opt.finest_exponent > 19 || opt.finest_exponent <= opt.coarsest_exponent)
        throw Error(ErrorCode::InvalidArgument, "scales must lie within [1e-6, 1e-1]");
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const Vec2 v = normalized(direction);
    std::vector<double> slopes;
    std::vector<double> lx, ly;
    for (int s = 0; s < opt.samples; ++s) {
        const Vec2 x{uni(rng), uni(rng)};
        const Vec2 u0 = h.displacement(x);
        lx.clear();
        ly.clear();
        for (int e = opt.coarsest_exponent; e <= opt.finest_exponent; ++e) {
            const double d = std::ldexp(1.0, -e);
            const Vec2 w = d * v + (h.displacement(x + d * v) - u0);
            lx.push_back(std::log(d));
            ly.push_back(std::log(norm(w)));
        }
        slopes.push_back(fit_line(lx, ly).slope);
    }
    double mean = 0.0;
    for (double s : slopes) mean += s;
    mean /= static_cast<double>(slopes.size());
    double var = 0.0;
    for (double s : slopes) var += (s - mean) * (s - mean);
    var /= static_cast<double>(std::max<std::size_t>(1, slopes.size() - 1));
    return {mean, std::sqrt(var / static_cast<double>(slopes.size()))};
}

// ---------------------------------------------------------------------------
// Periodic data.

struct PeriodicOrbitData {
    int period = 0;
    std::vector<TorusPoint> points;
    double mult_u = 0.0;
    double mult_s = 0.0;
};

struct PeriodicPointSearch {
    int n = 0;
    std::int64_t expected_count = 0;
    std::vector<TorusPoint> points;
    std::vector<PeriodicOrbitData> orbits;
    std::vector<std::string> failures;
};

/// Eigenvalues of the derivative of g^p around an orbit, starting at points[0].
inline std::pair<double, double> orbit_multipliers(const TorusMap& g, const std::vector<TorusPoint>& points) {
    Mat2 M = Mat2::identity();
    for (const TorusPoint& p : points) M = g.jacobian(p) * M;
    const double t = M.trace(), d = M.det();
    const double disc = t * t - 4.0 * d;
    if (disc < 0.0) throw Error(ErrorCode::InvalidArgument, "orbit multipliers are not real");
    const double r = std::sqrt(disc);
    // Stable pairing: the large root by the formula, the small one through det.
    const double big = t >= 0 ? 0.5 * (t + r) : 0.5 * (t - r);
    return {big, d / big};
}


/// All points with g^n(x) = x, by Newton on the lift equation g^n(x) = x + k
/// seeded from the linear solutions (A^n - I) x = k.
inline PeriodicPointSearch find_periodic_points(const TorusMap& g, const HyperbolicElement& A, int n) {
    if (n < 1 || n > 8) throw Error(ErrorCode::InvalidArgument, "period must lie in [1, 8]");
    if (!(g.linear_part() == A.matrix)) throw Error(ErrorCode::InvalidArgument, "map not homotopic to A");
    const IntMatrix2 An = A.matrix.power(n);
    const std::int64_t Ba = An.a() - 1, Bb = An.b(), Bc = An.c(), Bd = An.d() - 1;
    const std::int64_t D = Ba * Bd - Bb * Bc;
    PeriodicPointSearch out;
    out.n = n;
    out.expected_count = D < 0 ? -D : D;

    // k ranges over the integer points of B [0,1)^2.
    const std::int64_t xs[4] = {0, Ba, Bb, Ba + Bb}, ys[4] = {0, Bc, Bd, Bc + Bd};
    const std::int64_t kx0 = *std::min_element(xs, xs + 4), kx1 = *std::max_element(xs, xs + 4);
    const std::int64_t ky0 = *std::min_element(ys, ys + 4), ky1 = *std::max_element(ys, ys + 4);
    auto inside = [D](std::int64_t w) { return D > 0 ? (w >= 0 && w < D) : (w <= 0 && w > D); };
    for (std::int64_t kx = kx0; kx <= kx1; ++kx) {
        for (std::int64_t ky = ky0; ky <= ky1; ++ky) {
            const std::int64_t w1 = Bd * kx - Bb * ky, w2 = -Bc * kx + Ba * ky;
            if (!inside(w1) || !inside(w2)) continue;
            const Vec2 k{static_cast<double>(kx), static_cast<double>(ky)};
            Vec2 x{static_cast<double>(w1) / static_cast<double>(D), static_cast<double>(w2) / static_cast<double>(D)};
            bool ok = false;
            for (int iter = 0; iter < 50; ++iter) {
                Vec2 y = x;
                Mat2 J = Mat2::identity();
                for (int s = 0; s < n; ++s) {
                    J = g.jacobian(y) * J;
                    y = g.lift(y);
                }
                const Vec2 r = y - x - k;
                if (norm(r) < 1e-13) { ok = true; break; }
                x -= (J - Mat2::identity()).inverse() * r;
            }
            if (!ok) {
                out.failures.push_back("NewtonFailed: seed k = (" + std::to_string(kx) + ", " + std::to_string(ky) + ")");
                continue;
            }
            const TorusPoint p = wrap(x);
            const bool duplicate = std::any_of(out.points.begin(), out.points.end(),
                                               [&](const TorusPoint& q) { return torus_distance(p, q) < 1e-9; });
            if (duplicate) {
                out.failures.push_back("duplicate periodic point from seed k = (" + std::to_string(kx) + ", " +
                                       std::to_string(ky) + ")");
                continue;
            }
            out.points.push_back(p);
        }
    }

    std::vector<bool> used(out.points.size(), false);
    for (std::size_t i = 0; i < out.points.size(); ++i) {
        if (used[i]) continue;
        PeriodicOrbitData orbit;
        TorusPoint y = out.points[i];
        orbit.points.push_back(y);
        for (int s = 1; s <= n; ++s) {
            y = g(y);
            if (torus_distance(y, out.points[i]) < 1e-9) break;
            orbit.points.push_back(y);
        }
        orbit.period = static_cast<int>(orbit.points.size());
        for (const TorusPoint& q : orbit.points)
            for (std::size_t j = 0; j < out.points.size(); ++j)
                if (torus_distance(q, out.points[j]) < 1e-9) used[j] = true;
        // Start the orbit at its lexicographically smallest point.
        const auto first = std::min_element(orbit.points.begin(), orbit.points.end(), [](const TorusPoint& a, const TorusPoint& b) {
            return a.x < b.x || (a.x == b.x && a.y < b.y);
        });
        std::rotate(orbit.points.begin(), first, orbit.points.end());
        std::tie(orbit.mult_u, orbit.mult_s) = orbit_multipliers(g, orbit.points);
        out.orbits.push_back(std::move(orbit));
    }
    return out;
}

struct PeriodicDataRow {
    int period = 0;
    TorusPoint point;
    double mult_u = 0.0;
    double mult_s = 0.0;
    double mismatch = 0.0;
};

struct SmoothInvariantReport {
    std::vector<PeriodicDataRow> rows;
    double max_mismatch = 0.0;
    std::vector<std::string> failures;
};

/// Relative deviation of each orbit's unstable multiplier from lambda_u^period.
/// Nonzero mismatch rules out a C^1 conjugacy to A.
inline SmoothInvariantReport compare_smooth_invariants(const TorusMap& g, const HyperbolicElement& A, int max_period) {
    if (max_period < 1 || max_period > 8) throw Error(ErrorCode::InvalidArgument, "max_period must lie in [1, 8]");
    SmoothInvariantReport report;
    for (int p = 1; p <= max_period; ++p) {
        PeriodicPointSearch search = find_periodic_points(g, A, p);
        for (auto& f : search.failures) report.failures.push_back("period " + std::to_string(p) + ": " + f);
        for (const PeriodicOrbitData& orbit : search.orbits) {
            if (orbit.period != p) continue;
            const double expected = p * std::log(A.lambda_u);
            const double mismatch = std::fabs(std::log(std::fabs(orbit.mult_u)) - expected) / expected;
            report.rows.push_back({p, orbit.points.front(), orbit.mult_u, orbit.mult_s, mismatch});
            report.max_mismatch = std::max(report.max_mismatch, mismatch);
        }
    }
    return report;
}

}  // namespace anosov
