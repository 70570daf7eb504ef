#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical routines.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>

namespace oracle {

using M2 = std::array<double, 4>;
using V2 = std::array<double, 2>;
using IM2 = std::array<std::int64_t, 4>;

inline const double golden = (1.0 + std::sqrt(5.0)) / 2.0;

inline IM2 imul(const IM2& p, const IM2& q) {
    return {p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3], p[2] * q[0] + p[3] * q[2],
            p[2] * q[1] + p[3] * q[3]};
}

inline IM2 ipow(IM2 m, int n) {
    IM2 r{1, 0, 0, 1};
    for (int i = 0; i < n; ++i) r = imul(r, m);
    return r;
}

/// |det(M^n - I)|, the number of points of period dividing n for a hyperbolic toral automorphism.
inline std::int64_t periodic_count(const IM2& m, int n) {
    const IM2 p = ipow(m, n);
    const std::int64_t d = (p[0] - 1) * (p[3] - 1) - p[1] * p[2];
    return d < 0 ? -d : d;
}

/// Dominant eigen-direction by power iteration, normalised to positive first coordinate.
inline V2 power_direction(const M2& m, int iters = 200) {
    V2 v{0.6, 0.8};
    for (int i = 0; i < iters; ++i) {
        V2 w{m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
        const double n = std::hypot(w[0], w[1]);
        v = {w[0] / n, w[1] / n};
    }
    if (v[0] < 0 || (v[0] == 0 && v[1] < 0)) v = {-v[0], -v[1]};
    return v;
}

inline M2 inverse(const M2& m) {
    const double d = m[0] * m[3] - m[1] * m[2];
    return {m[3] / d, -m[1] / d, -m[2] / d, m[0] / d};
}

inline double abs_det(const V2& a, const V2& b) { return std::fabs(a[0] * b[1] - a[1] * b[0]); }

/// Cramer's rule for [c0 c1] (x, y)^T = r.
inline V2 solve2(const V2& c0, const V2& c1, const V2& r) {
    const double d = c0[0] * c1[1] - c1[0] * c0[1];
    return {(r[0] * c1[1] - c1[0] * r[1]) / d, (c0[0] * r[1] - r[0] * c0[1]) / d};
}

/// Centered finite-difference Jacobian of f: R^2 -> R^2.
inline M2 fd_jacobian(const std::function<V2(V2)>& f, V2 x, double h = 1e-5) {
    const V2 xp = f({x[0] + h, x[1]}), xm = f({x[0] - h, x[1]});
    const V2 yp = f({x[0], x[1] + h}), ym = f({x[0], x[1] - h});
    return {(xp[0] - xm[0]) / (2 * h), (yp[0] - ym[0]) / (2 * h), (xp[1] - xm[1]) / (2 * h),
            (yp[1] - ym[1]) / (2 * h)};
}

/// Scalar bisection on a sign-changing bracket.
inline double bisect(const std::function<double(double)>& f, double a, double b, int iters = 200) {
    double fa = f(a);
    for (int i = 0; i < iters; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

/// Nonzero lattice points with |k|_inf <= R.
inline int lattice_points_in_box(int R) {
    int count = 0;
    for (int i = -R; i <= R; ++i)
        for (int j = -R; j <= R; ++j)
            if (i != 0 || j != 0) ++count;
    return count;
}

}  // namespace oracle
