#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>

#include "error.hpp"
#include "geometry.hpp"

namespace anosov {

/// Element of SL(2,Z), row major [[a, b], [c, d]]. Construction enforces ad - bc = 1.
class IntMatrix2 {
public:
    IntMatrix2(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d)
        : a_(a), b_(b), c_(c), d_(d) {
        if (a * d - b * c != 1) {
            throw Error(ErrorCode::NotSL2Z, "determinant of [[" + std::to_string(a) + "," +
                                                std::to_string(b) + "],[" + std::to_string(c) +
                                                "," + std::to_string(d) + "]] is " +
                                                std::to_string(a * d - b * c) + ", expected 1");
        }
    }

    static IntMatrix2 identity() { return {1, 0, 0, 1}; }
    static IntMatrix2 from_entries(const std::array<std::int64_t, 4>& e) {
        return {e[0], e[1], e[2], e[3]};
    }

    std::int64_t a() const { return a_; }
    std::int64_t b() const { return b_; }
    std::int64_t c() const { return c_; }
    std::int64_t d() const { return d_; }
    std::array<std::int64_t, 4> entries() const { return {a_, b_, c_, d_}; }
    std::int64_t trace() const { return a_ + d_; }

    IntMatrix2 inverse() const { return {d_, -b_, -c_, a_}; }

    IntMatrix2 power(int n) const {
        IntMatrix2 base = n >= 0 ? *this : inverse();
        IntMatrix2 out = identity();
        for (int i = 0; i < std::abs(n); ++i) out = out * base;
        return out;
    }

    Mat2 to_real() const {
        return {static_cast<double>(a_), static_cast<double>(b_), static_cast<double>(c_),
                static_cast<double>(d_)};
    }

    Vec2 operator*(Vec2 v) const { return to_real() * v; }

    friend IntMatrix2 operator*(const IntMatrix2& m, const IntMatrix2& n) {
        return {m.a_ * n.a_ + m.b_ * n.c_, m.a_ * n.b_ + m.b_ * n.d_,
                m.c_ * n.a_ + m.d_ * n.c_, m.c_ * n.b_ + m.d_ * n.d_};
    }
    friend bool operator==(const IntMatrix2&, const IntMatrix2&) = default;

private:
    std::int64_t a_, b_, c_, d_;
};

inline IntMatrix2 compose(const IntMatrix2& m1, const IntMatrix2& m2) { return m1 * m2; }
inline IntMatrix2 invert(const IntMatrix2& m) { return m.inverse(); }

inline bool is_hyperbolic(const IntMatrix2& m) { return std::llabs(m.trace()) > 2; }

/// Hyperbolic element with its eigen-geometry. For negative trace the
/// eigenvalues are -lambda_u and -lambda_s; `sign` records which.
struct HyperbolicElement {
    IntMatrix2 matrix;
    double lambda_u;
    double lambda_s;
    Vec2 v_u;
    Vec2 v_s;
    int sign;

    double eigenvalue_u() const { return sign * lambda_u; }
    double eigenvalue_s() const { return sign * lambda_s; }

    /// Coefficients (a, b) with w = a v_u + b v_s.
    Vec2 split(Vec2 w) const {
        const double D = cross(v_u, v_s);
        return {cross(w, v_s) / D, cross(v_u, w) / D};
    }
    Vec2 combine(double a, double b) const { return a * v_u + b * v_s; }
};

namespace detail {

inline Vec2 unit_eigenvector(const IntMatrix2& m, double mu) {
    const double a = static_cast<double>(m.a()), b = static_cast<double>(m.b());
    const double c = static_cast<double>(m.c()), d = static_cast<double>(m.d());
    // Both rows of (M - mu I) annihilate the eigenvector; use the better conditioned one.
    const Vec2 from_row1{b, mu - a};
    const Vec2 from_row2{mu - d, c};
    const Vec2 v = norm(from_row1) >= norm(from_row2) ? from_row1 : from_row2;
    return canonical_direction(normalized(v));
}

}  // namespace detail

inline HyperbolicElement eigen_data(const IntMatrix2& m) {
    if (!is_hyperbolic(m)) {
        throw Error(ErrorCode::NotHyperbolic,
                    "|trace| = " + std::to_string(std::llabs(m.trace())) + " <= 2");
    }
    const double t = static_cast<double>(m.trace());
    const int sign = t > 0 ? 1 : -1;
    const double at = std::fabs(t);
    const double lambda_u = 0.5 * (at + std::sqrt(at * at - 4.0));
    const double lambda_s = 1.0 / lambda_u;
    return HyperbolicElement{m,
                             lambda_u,
                             lambda_s,
                             detail::unit_eigenvector(m, sign * lambda_u),
                             detail::unit_eigenvector(m, sign * lambda_s),
                             sign};
}

struct PairHypothesisCertificate {
    HyperbolicElement first;
    HyperbolicElement second;
    double min_pairwise_sine;

    static constexpr double tolerance = 1e-12;
    bool hypothesis_ok() const { return min_pairwise_sine > tolerance; }
};

/// Minimum |det[v_i v_j]| over the six pairs drawn from {v1s, v1u, v2s, v2u}.
inline PairHypothesisCertificate check_pair_hypothesis(const HyperbolicElement& e1,
                                                       const HyperbolicElement& e2) {
    const std::array<Vec2, 4> dirs{e1.v_s, e1.v_u, e2.v_s, e2.v_u};
    double m = 1.0;
    for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t j = i + 1; j < dirs.size(); ++j)
            m = std::min(m, std::fabs(cross(dirs[i], dirs[j])));
    if (m <= PairHypothesisCertificate::tolerance) m = 0.0;
    return {e1, e2, m};
}

inline TorusPoint standard_action_apply(const IntMatrix2& m, TorusPoint x) {
    return wrap(m * x);
}

}  // namespace anosov
