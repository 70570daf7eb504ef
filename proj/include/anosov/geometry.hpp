#pragma once

#include <cmath>
#include <numbers>

namespace anosov {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

/// Points of T^2 = R^2/Z^2 are Vec2 with coordinates in [0,1).
using TorusPoint = Vec2;

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 normalized(Vec2 a) { return a / norm(a); }
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

/// Real 2x2 matrix, row major: [[a, b], [c, d]].
struct Mat2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    constexpr double det() const { return a * d - b * c; }
    constexpr double trace() const { return a + d; }
    constexpr Mat2 transposed() const { return {a, c, b, d}; }
    constexpr Mat2 inverse() const {
        const double D = det();
        return {d / D, -b / D, -c / D, a / D};
    }
    friend constexpr Vec2 operator*(const Mat2& m, Vec2 v) {
        return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
    }
    friend constexpr Mat2 operator*(const Mat2& m, const Mat2& n) {
        return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
                m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
    }
    friend constexpr Mat2 operator+(const Mat2& m, const Mat2& n) {
        return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d};
    }
    friend constexpr Mat2 operator-(const Mat2& m, const Mat2& n) {
        return {m.a - n.a, m.b - n.b, m.c - n.c, m.d - n.d};
    }
    friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

inline double max_abs_entry(const Mat2& m) {
    return std::fmax(std::fmax(std::fabs(m.a), std::fabs(m.b)), std::fmax(std::fabs(m.c), std::fabs(m.d)));
}

/// Half-open representative in [0,1).
inline double wrap_unit(double v) {
    double r = v - std::floor(v);
    return r >= 1.0 ? 0.0 : r;
}

inline TorusPoint wrap(Vec2 p) { return {wrap_unit(p.x), wrap_unit(p.y)}; }

/// Representative of a - b in [-1/2, 1/2)^2.
inline Vec2 torus_delta(Vec2 a, Vec2 b) {
    Vec2 d = a - b;
    d.x -= std::floor(d.x + 0.5);
    d.y -= std::floor(d.y + 0.5);
    return d;
}

inline double torus_distance(Vec2 a, Vec2 b) { return norm(torus_delta(a, b)); }

/// Representative of a line direction: positive first coordinate, or positive
/// second coordinate when the first vanishes.
inline Vec2 canonical_direction(Vec2 v) {
    if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) return -v;
    return v;
}

/// Line angle in [0, pi).
inline double line_angle(Vec2 v) {
    double a = std::atan2(v.y, v.x);
    if (a < 0.0) a += std::numbers::pi;
    if (a >= std::numbers::pi) a -= std::numbers::pi;
    return a;
}

inline Vec2 direction_from_angle(double theta) {
    return canonical_direction({std::cos(theta), std::sin(theta)});
}

/// Unsigned angle between two lines, in [0, pi/2].
inline double line_angle_between(Vec2 u, Vec2 v) {
    const double c = std::fabs(dot(u, v)) / (norm(u) * norm(v));
    const double s = std::fabs(cross(u, v)) / (norm(u) * norm(v));
    return std::atan2(s, c);
}

inline Vec2 rotated(Vec2 v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

constexpr double degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

}  // namespace anosov
