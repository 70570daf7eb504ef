#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

namespace anosov {

// ---------------------------------------------------------------------------
// Periodic cubic B-spline interpolation on the unit square.

namespace detail {

/// In-place prefilter turning samples of a period-N signal into cubic B-spline
/// coefficients: solves (c[i-1] + 4 c[i] + c[i+1]) / 6 = f[i] cyclically.
inline void bspline_prefilter_periodic(std::span<double> f) {
    const std::size_t n = f.size();
    if (n == 0) return;
    const double z = std::sqrt(3.0) - 2.0;
    const double zn = std::pow(z, static_cast<double>(n));
    for (double& v : f) v *= 6.0;

    double acc = 0.0, zk = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        acc += zk * f[(n - k) % n];
        zk *= z;
    }
    std::vector<double> causal(n);
    causal[0] = acc / (1.0 - zn);
    for (std::size_t i = 1; i < n; ++i) causal[i] = f[i] + z * causal[i - 1];

    acc = 0.0;
    zk = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        acc += zk * causal[(n - 1 + k) % n];
        zk *= z;
    }
    f[n - 1] = -z / (1.0 - zn) * acc;
    for (std::size_t i = n - 1; i-- > 0;) f[i] = z * (f[i + 1] - causal[i]);
}

inline void bspline_weights(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t, s = 1.0 - t;
    w[0] = s * s * s / 6.0;
    w[1] = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0;
    w[2] = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0;
    w[3] = t3 / 6.0;
}

}  // namespace detail

/// Periodic bicubic interpolant of an N x N table sampled at (i/N, j/N),
/// index i along the first coordinate.
class PeriodicSpline2 {
public:
    PeriodicSpline2() = default;

    PeriodicSpline2(std::size_t n, std::vector<double> values) : n_(n), coef_(std::move(values)) {
        if (coef_.size() != n * n) throw Error(ErrorCode::InvalidArgument, "spline table size");
        std::vector<double> line(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::span<double> row(coef_.data() + i * n, n);
            detail::bspline_prefilter_periodic(row);
        }
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) line[i] = coef_[i * n + j];
            detail::bspline_prefilter_periodic(line);
            for (std::size_t i = 0; i < n; ++i) coef_[i * n + j] = line[i];
        }
    }

    std::size_t size() const { return n_; }

    double operator()(Vec2 p) const {
        const double n = static_cast<double>(n_);
        const double ux = wrap_unit(p.x) * n, uy = wrap_unit(p.y) * n;
        const double fx = std::floor(ux), fy = std::floor(uy);
        double wx[4], wy[4];
        detail::bspline_weights(ux - fx, wx);
        detail::bspline_weights(uy - fy, wy);
        const auto N = static_cast<long>(n_);
        const long i0 = static_cast<long>(fx) - 1 + N, j0 = static_cast<long>(fy) - 1 + N;
        double sum = 0.0;
        for (int a = 0; a < 4; ++a) {
            const std::size_t row = static_cast<std::size_t>((i0 + a) % N) * n_;
            double acc = 0.0;
            for (int b = 0; b < 4; ++b) acc += wy[b] * coef_[row + static_cast<std::size_t>((j0 + b) % N)];
            sum += wx[a] * acc;
        }
        return sum;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> coef_;
};

// ---------------------------------------------------------------------------
// Piecewise cubic Hermite function on increasing nodes.

enum class SlopeRule { three_point, monotone };

class SampledFunction {
public:
    SampledFunction() = default;

    /// Slopes estimated from the data; `monotone` applies the Fritsch-Carlson limiter.
    SampledFunction(std::vector<double> x, std::vector<double> y, SlopeRule rule = SlopeRule::three_point)
        : x_(std::move(x)), y_(std::move(y)) {
        check_nodes();
        dy_ = estimate_slopes(rule);
    }

    /// Exact slopes supplied by the caller.
    SampledFunction(std::vector<double> x, std::vector<double> y, std::vector<double> dydx)
        : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dydx)) {
        check_nodes();
        if (dy_.size() != x_.size()) throw Error(ErrorCode::InvalidArgument, "slope count");
    }

    double lo() const { return x_.front(); }
    double hi() const { return x_.back(); }
    bool contains(double t) const { return t >= lo() && t <= hi(); }
    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& values() const { return y_; }
    const std::vector<double>& slopes() const { return dy_; }

    double operator()(double t) const { return eval(t, false); }
    double derivative(double t) const { return eval(t, true); }

    bool strictly_increasing() const {
        for (std::size_t i = 1; i < y_.size(); ++i)
            if (!(y_[i] > y_[i - 1])) return false;
        return true;
    }
    bool strictly_decreasing() const {
        for (std::size_t i = 1; i < y_.size(); ++i)
            if (!(y_[i] < y_[i - 1])) return false;
        return true;
    }

    double range_lo() const { return std::min(y_.front(), y_.back()); }
    double range_hi() const { return std::max(y_.front(), y_.back()); }

    /// Inverse of a strictly monotone function; bisection then Newton.
    double inverse(double v) const {
        const bool inc = y_.back() > y_.front();
        if (v < range_lo() || v > range_hi())
            throw Error(ErrorCode::DomainMismatch, "value outside the range of a sampled function");
        auto it = inc ? std::lower_bound(y_.begin(), y_.end(), v)
                      : std::lower_bound(y_.begin(), y_.end(), v, std::greater<>());
        std::size_t k = static_cast<std::size_t>(it - y_.begin());
        if (k == 0) return x_.front();
        if (k >= y_.size()) return x_.back();
        double a = x_[k - 1], b = x_[k];
        double t = a + (b - a) * (v - y_[k - 1]) / (y_[k] - y_[k - 1]);
        for (int iter = 0; iter < 60; ++iter) {
            const double f = eval(t, false) - v;
            if (f == 0.0) return t;
            if ((f > 0.0) == inc) b = t; else a = t;
            const double d = eval(t, true);
            double next = d != 0.0 ? t - f / d : 0.5 * (a + b);
            if (!(next > a && next < b)) next = 0.5 * (a + b);
            if (std::fabs(next - t) <= 1e-16 * (1.0 + std::fabs(t))) return next;
            t = next;
        }
        return t;
    }

private:
    void check_nodes() const {
        if (x_.size() < 2 || x_.size() != y_.size())
            throw Error(ErrorCode::InvalidArgument, "sampled function needs >= 2 matching nodes");
        for (std::size_t i = 1; i < x_.size(); ++i)
            if (!(x_[i] > x_[i - 1])) throw Error(ErrorCode::InvalidArgument, "nodes must increase");
    }

    std::vector<double> estimate_slopes(SlopeRule rule) const {
        const std::size_t n = x_.size();
        std::vector<double> d(n);
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        if (n == 2) {
            d[0] = d[1] = delta[0];
            return d;
        }
        // Second-order three-point formulas (exact on quadratics).
        auto three = [&](std::size_t i0, double at) {
            const double x0 = x_[i0], x1 = x_[i0 + 1], x2 = x_[i0 + 2];
            const double y0 = y_[i0], y1 = y_[i0 + 1], y2 = y_[i0 + 2];
            return y0 * (2 * at - x1 - x2) / ((x0 - x1) * (x0 - x2)) +
                   y1 * (2 * at - x0 - x2) / ((x1 - x0) * (x1 - x2)) +
                   y2 * (2 * at - x0 - x1) / ((x2 - x0) * (x2 - x1));
        };
        d[0] = three(0, x_[0]);
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = three(i - 1, x_[i]);
        d[n - 1] = three(n - 3, x_[n - 1]);
        if (rule == SlopeRule::monotone) {
            for (std::size_t i = 0; i + 1 < n; ++i) {
                if (delta[i] == 0.0) {
                    d[i] = d[i + 1] = 0.0;
                    continue;
                }
                if (d[i] * delta[i] < 0.0) d[i] = 0.0;
                if (d[i + 1] * delta[i] < 0.0) d[i + 1] = 0.0;
                const double al = d[i] / delta[i], be = d[i + 1] / delta[i];
                const double r = al * al + be * be;
                if (r > 9.0) {
                    const double tau = 3.0 / std::sqrt(r);
                    d[i] = tau * al * delta[i];
                    d[i + 1] = tau * be * delta[i];
                }
            }
        }
        return d;
    }

    double eval(double t, bool deriv) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), t);
        std::size_t k = static_cast<std::size_t>(it - x_.begin());
        k = std::clamp<std::size_t>(k, 1, x_.size() - 1) - 1;
        const double h = x_[k + 1] - x_[k];
        const double s = (t - x_[k]) / h;
        const double y0 = y_[k], y1 = y_[k + 1], m0 = dy_[k] * h, m1 = dy_[k + 1] * h;
        if (!deriv) {
            const double s2 = s * s, s3 = s2 * s;
            return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * y1 +
                   (s3 - s2) * m1;
        }
        const double s2 = s * s;
        return ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * y1 +
                (3 * s2 - 2 * s) * m1) / h;
    }

    std::vector<double> x_, y_, dy_;
};

// ---------------------------------------------------------------------------
// Scalar root finding on a bracket: bisection until the bracket is short,
// then safeguarded secant steps.

struct RootOptions {
    double bisect_until = 1e-10;
    double tolerance = 1e-13;
    int max_iterations = 200;
};

inline std::optional<double> bracketed_root(const std::function<double(double)>& f, double a, double b,
                                            RootOptions opt = {}) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) return std::nullopt;
    int iter = 0;
    while (std::fabs(b - a) > opt.bisect_until && iter++ < opt.max_iterations) {
        const double m = 0.5 * (a + b), fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) { a = m; fa = fm; } else { b = m; fb = fm; }
    }
    // Illinois variant of regula falsi keeps the bracket.
    int side = 0;
    double prev = a;
    while (iter++ < opt.max_iterations) {
        const double c = (a * fb - b * fa) / (fb - fa);
        const double fc = f(c);
        if (fc == 0.0 || std::fabs(b - a) <= opt.tolerance || std::fabs(c - prev) <= opt.tolerance) return c;
        prev = c;
        if ((fc > 0.0) == (fa > 0.0)) {
            a = c; fa = fc;
            if (side == -1) fb *= 0.5;
            side = -1;
        } else {
            b = c; fb = fc;
            if (side == 1) fa *= 0.5;
            side = 1;
        }
        if (std::fabs(fc) == 0.0 || std::fabs(b - a) <= opt.tolerance) return c;
    }
    return (a * fb - b * fa) / (fb - fa);
}

/// Composite Simpson on [a, b] with `panels` subintervals (rounded up to even).
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// Least-squares slope and its standard error for y ~ c + m x.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double sse = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            sse += r * r;
        }
        fit.slope_stderr = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

}  // namespace anosov
