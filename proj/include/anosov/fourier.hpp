#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <vector>

#include "geometry.hpp"

namespace anosov {

/// One Fourier mode c * exp(2 pi i k.x) of a vector-valued periodic function.
/// The conjugate partner at -k is implied.
struct FourierMode {
    std::array<int, 2> k{0, 0};
    std::array<std::complex<double>, 2> c{};
};

/// Real trigonometric polynomial p: T^2 -> R^2,
///   p(x) = sum_j c_j exp(2 pi i k_j.x) + conj(...).
/// Modes are kept canonical: one entry per k on a half lattice, merged.
class FourierPerturbation {
public:
    FourierPerturbation() = default;

    explicit FourierPerturbation(const std::vector<FourierMode>& input) {
        std::map<std::array<int, 2>, std::array<std::complex<double>, 2>> acc;
        for (const FourierMode& m : input) {
            FourierMode cm = m;
            if (is_negative(cm.k)) {
                cm.k = {-cm.k[0], -cm.k[1]};
                cm.c = {std::conj(cm.c[0]), std::conj(cm.c[1])};
            }
            auto& slot = acc[cm.k];
            slot[0] += cm.c[0];
            slot[1] += cm.c[1];
        }
        for (auto& [k, c] : acc) {
            if (k == std::array<int, 2>{0, 0}) {
                // Only the real part survives the conjugate closure.
                c = {std::complex<double>(c[0].real(), 0.0), std::complex<double>(c[1].real(), 0.0)};
            }
            if (c[0] == 0.0 && c[1] == 0.0) continue;
            modes_.push_back({k, c});
        }
        for (const FourierMode& m : modes_) {
            const double cn = std::sqrt(std::norm(m.c[0]) + std::norm(m.c[1]));
            const double kn = std::hypot(m.k[0], m.k[1]);
            sup_bound_ += 2.0 * cn;
            derivative_bound_ += 2.0 * 2.0 * std::numbers::pi * kn * cn;
        }
    }

    /// amplitude * sin(2 pi k.x), componentwise amplitudes.
    static FourierMode sine(std::array<int, 2> k, Vec2 amplitude) {
        return {k, {std::complex<double>(0.0, -0.5 * amplitude.x), std::complex<double>(0.0, -0.5 * amplitude.y)}};
    }
    /// amplitude * cos(2 pi k.x).
    static FourierMode cosine(std::array<int, 2> k, Vec2 amplitude) {
        return {k, {std::complex<double>(0.5 * amplitude.x, 0.0), std::complex<double>(0.5 * amplitude.y, 0.0)}};
    }

    const std::vector<FourierMode>& modes() const { return modes_; }
    bool is_zero() const { return modes_.empty(); }

    /// Triangle-inequality bounds on sup |p| and sup |Dp| (operator 2-norm).
    double sup_bound() const { return sup_bound_; }
    double derivative_bound() const { return derivative_bound_; }

    FourierPerturbation scaled(double t) const {
        std::vector<FourierMode> m = modes_;
        for (auto& mode : m) {
            mode.c[0] *= t;
            mode.c[1] *= t;
        }
        return FourierPerturbation(m);
    }

    Vec2 operator()(Vec2 x) const {
        Vec2 out;
        for (const FourierMode& m : modes_) {
            const double phase = 2.0 * std::numbers::pi * (m.k[0] * x.x + m.k[1] * x.y);
            const double cs = std::cos(phase), sn = std::sin(phase);
            out.x += 2.0 * (m.c[0].real() * cs - m.c[0].imag() * sn);
            out.y += 2.0 * (m.c[1].real() * cs - m.c[1].imag() * sn);
        }
        return out;
    }

    Mat2 jacobian(Vec2 x) const {
        Mat2 J{0.0, 0.0, 0.0, 0.0};
        for (const FourierMode& m : modes_) {
            if (is_zero_k(m.k)) continue;
            const double phase = 2.0 * std::numbers::pi * (m.k[0] * x.x + m.k[1] * x.y);
            const double cs = std::cos(phase), sn = std::sin(phase);
            const double w = 4.0 * std::numbers::pi;
            const double g0 = -(m.c[0].real() * sn + m.c[0].imag() * cs) * w;
            const double g1 = -(m.c[1].real() * sn + m.c[1].imag() * cs) * w;
            J.a += g0 * m.k[0];
            J.b += g0 * m.k[1];
            J.c += g1 * m.k[0];
            J.d += g1 * m.k[1];
        }
        return J;
    }

private:
    static bool is_negative(const std::array<int, 2>& k) {
        return k[0] < 0 || (k[0] == 0 && k[1] < 0);
    }
    static bool is_zero_k(const std::array<int, 2>& k) { return k[0] == 0 && k[1] == 0; }

    std::vector<FourierMode> modes_;
    double sup_bound_ = 0.0;
    double derivative_bound_ = 0.0;
};

}  // namespace anosov
