#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "fourier.hpp"
#include "geometry.hpp"
#include "lattice.hpp"

namespace anosov {

/// A torus map homotopic to an SL(2,Z) automorphism, handled through its lift
/// to R^2. Lifts satisfy lift(x + k) = lift(x) + A k for integer k.
class TorusMap {
public:
    virtual ~TorusMap() = default;

    virtual IntMatrix2 linear_part() const = 0;
    virtual Vec2 lift(Vec2 x) const = 0;
    virtual Mat2 jacobian(Vec2 x) const = 0;

    /// Inverse of the lift. The default is Newton started from the linear inverse.
    virtual Vec2 inverse_lift(Vec2 y) const {
        const IntMatrix2 A = linear_part();
        Vec2 x = A.inverse() * y;
        for (int iter = 0; iter < max_newton_iterations; ++iter) {
            const Vec2 r = lift(x) - y;
            if (norm(r) < newton_tolerance) return x;
            x -= jacobian(x).inverse() * r;
        }
        if (norm(lift(x) - y) < 10.0 * newton_tolerance) return x;
        throw Error(ErrorCode::NewtonFailed, "map inversion did not converge");
    }

    TorusPoint operator()(TorusPoint x) const { return wrap(lift(x)); }
    TorusPoint inverse(TorusPoint y) const { return wrap(inverse_lift(y)); }

    /// The periodic part p(y) = lift(y) - A y.
    Vec2 perturbation(Vec2 y) const { return lift(y) - linear_part() * y; }

    static constexpr double newton_tolerance = 1e-12;
    static constexpr int max_newton_iterations = 50;
};

using MapHandle = std::shared_ptr<const TorusMap>;

class LinearMap final : public TorusMap {
public:
    explicit LinearMap(IntMatrix2 m) : m_(m), real_(m.to_real()), inv_(m.inverse().to_real()) {}
    IntMatrix2 linear_part() const override { return m_; }
    Vec2 lift(Vec2 x) const override { return real_ * x; }
    Mat2 jacobian(Vec2) const override { return real_; }
    Vec2 inverse_lift(Vec2 y) const override { return inv_ * y; }

private:
    IntMatrix2 m_;
    Mat2 real_, inv_;
};

/// g = A + p with p a trigonometric polynomial.
class PerturbedMap final : public TorusMap {
public:
    PerturbedMap(IntMatrix2 base, FourierPerturbation p) : base_(base), real_(base.to_real()), p_(std::move(p)) {}
    IntMatrix2 linear_part() const override { return base_; }
    const FourierPerturbation& perturbation_series() const { return p_; }
    Vec2 lift(Vec2 x) const override { return real_ * x + p_(x); }
    Mat2 jacobian(Vec2 x) const override { return real_ + p_.jacobian(x); }

private:
    IntMatrix2 base_;
    Mat2 real_;
    FourierPerturbation p_;
};

/// phi = id + q, a diffeomorphism of T^2 homotopic to the identity.
class Diffeo {
public:
    Diffeo() = default;
    explicit Diffeo(FourierPerturbation q) : q_(std::move(q)) {}

    const FourierPerturbation& displacement() const { return q_; }
    bool is_identity() const { return q_.is_zero(); }

    Vec2 operator()(Vec2 x) const { return x + q_(x); }
    Mat2 jacobian(Vec2 x) const { return Mat2::identity() + q_.jacobian(x); }

    Vec2 inverse(Vec2 y) const {
        Vec2 x = y - q_(y);
        for (int iter = 0; iter < 50; ++iter) {
            const Vec2 r = x + q_(x) - y;
            if (norm(r) < 1e-14) return x;
            x -= jacobian(x).inverse() * r;
        }
        if (norm(x + q_(x) - y) < 1e-12) return x;
        throw Error(ErrorCode::NewtonFailed, "diffeomorphism inversion did not converge");
    }

private:
    FourierPerturbation q_;
};

/// Sufficient condition ||Dq|| < 1 for id + q to be a diffeomorphism.
inline Diffeo build_diffeo(FourierPerturbation q) {
    if (q.derivative_bound() >= 1.0) {
        throw Error(ErrorCode::NotADiffeo,
                    "||Dq|| bound " + std::to_string(q.derivative_bound()) + " >= 1");
    }
    return Diffeo(std::move(q));
}

/// phi o A o phi^{-1}.
class ConjugatedMap final : public TorusMap {
public:
    ConjugatedMap(Diffeo phi, IntMatrix2 base)
        : phi_(std::move(phi)), base_(base), real_(base.to_real()), inv_(base.inverse().to_real()) {}

    IntMatrix2 linear_part() const override { return base_; }
    const Diffeo& marking() const { return phi_; }

    Vec2 lift(Vec2 y) const override { return phi_(real_ * phi_.inverse(y)); }
    Mat2 jacobian(Vec2 y) const override {
        const Vec2 x = phi_.inverse(y);
        return phi_.jacobian(real_ * x) * real_ * phi_.jacobian(x).inverse();
    }
    Vec2 inverse_lift(Vec2 y) const override { return phi_(inv_ * phi_.inverse(y)); }

private:
    Diffeo phi_;
    IntMatrix2 base_;
    Mat2 real_, inv_;
};

/// outer o inner.
class ComposedMap final : public TorusMap {
public:
    ComposedMap(MapHandle outer, MapHandle inner) : outer_(std::move(outer)), inner_(std::move(inner)) {}
    IntMatrix2 linear_part() const override { return outer_->linear_part() * inner_->linear_part(); }
    Vec2 lift(Vec2 x) const override { return outer_->lift(inner_->lift(x)); }
    Mat2 jacobian(Vec2 x) const override { return outer_->jacobian(inner_->lift(x)) * inner_->jacobian(x); }
    Vec2 inverse_lift(Vec2 y) const override { return inner_->inverse_lift(outer_->inverse_lift(y)); }

private:
    MapHandle outer_, inner_;
};

/// Lift of g^n.
inline Vec2 iterate_lift(const TorusMap& g, Vec2 x, int n) {
    for (int i = 0; i < n; ++i) x = g.lift(x);
    return x;
}

/// Worst deviation of lift(x + e_i) - lift(x) from A e_i over a sample grid;
/// zero (to rounding) iff the lift has the linear part as its degree.
inline double homotopy_defect(const TorusMap& g, int samples = 16) {
    const IntMatrix2 A = g.linear_part();
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        for (int j = 0; j < samples; ++j) {
            const Vec2 x{(i + 0.5) / samples, (j + 0.5) / samples};
            const Vec2 gx = g.lift(x);
            worst = std::max(worst, norm(g.lift(x + Vec2{1, 0}) - gx - A * Vec2{1, 0}));
            worst = std::max(worst, norm(g.lift(x + Vec2{0, 1}) - gx - A * Vec2{0, 1}));
        }
    }
    return worst;
}

/// Marked Anosov action on T^2: generator matrices with their nonlinear
/// realizations, and the marking diffeomorphism when the action was built
/// by conjugation.
struct MarkedGenerator {
    IntMatrix2 element;
    MapHandle map;
};

class MarkedAction {
public:
    MarkedAction(std::vector<MarkedGenerator> generators, std::optional<Diffeo> marking)
        : generators_(std::move(generators)), marking_(std::move(marking)) {
        for (const auto& g : generators_) {
            if (!(g.map->linear_part() == g.element) || homotopy_defect(*g.map, 4) > 1e-9)
                throw Error(ErrorCode::InvalidArgument, "generator map is not homotopic to its matrix");
        }
    }

    const std::vector<MarkedGenerator>& generators() const { return generators_; }
    const std::optional<Diffeo>& marking() const { return marking_; }
    const MapHandle& map(std::size_t i) const { return generators_.at(i).map; }

    /// Realization of an arbitrary group element; needs a marking.
    MapHandle map_for(const IntMatrix2& element) const {
        if (!marking_) throw Error(ErrorCode::InvalidArgument, "action has no marking to extend from");
        if (marking_->is_identity()) return std::make_shared<LinearMap>(element);
        return std::make_shared<ConjugatedMap>(*marking_, element);
    }

private:
    std::vector<MarkedGenerator> generators_;
    std::optional<Diffeo> marking_;
};

inline MarkedAction conjugated_action(const Diffeo& phi, const std::vector<IntMatrix2>& generators) {
    std::vector<MarkedGenerator> gens;
    for (const IntMatrix2& m : generators) {
        MapHandle h = phi.is_identity() ? MapHandle(std::make_shared<LinearMap>(m))
                                        : MapHandle(std::make_shared<ConjugatedMap>(phi, m));
        gens.push_back({m, std::move(h)});
    }
    return MarkedAction(std::move(gens), phi);
}

// ---------------------------------------------------------------------------
// Cone-field verification of the Anosov property.

struct ConeParams {
    double aperture = 0.3;
    Vec2 direction{1.0, 0.0};
    int iterations = 20;
    int grid = 128;
    /// Axis of the stable cone; defaults to the linear part's stable
    /// eigenvector, or the normal of `direction` when there is none.
    std::optional<Vec2> stable_direction;
};

struct ConeCheckResult {
    bool anosov = false;
    double expansion_margin = 0.0;
    double unstable_margin = 0.0;
    double stable_margin = 0.0;
};

namespace detail {

/// Minimum of |M w| over unit w within `aperture` of the line through `axis`.
inline double min_stretch_on_cone(const Mat2& M, Vec2 axis, double aperture) {
    const Mat2 G = M.transposed() * M;
    const double A = 0.5 * (G.a + G.d), B = 0.5 * (G.a - G.d), C = G.b;
    const double theta0 = std::atan2(axis.y, axis.x);
    auto f = [&](double phi) { return A + B * std::cos(2 * phi) + C * std::sin(2 * phi); };
    double m = std::min(f(theta0 - aperture), f(theta0 + aperture));
    const double phi_min = 0.5 * (std::atan2(C, B) + std::numbers::pi);
    double off = std::remainder(phi_min - theta0, std::numbers::pi);
    if (std::fabs(off) <= aperture) m = std::min(m, f(theta0 + off));
    return std::sqrt(std::max(m, 0.0));
}

/// True iff M maps the double cone of half-angle `aperture` around `axis`
/// strictly inside itself.
inline bool maps_cone_inside(const Mat2& M, Vec2 axis, double aperture) {
    const Vec2 a = M * rotated(axis, aperture);
    const Vec2 b = M * rotated(axis, -aperture);
    const Vec2 c = M * axis;
    const double sa = dot(a, axis), sb = dot(b, axis), sc = dot(c, axis);
    if (!((sa > 0 && sb > 0 && sc > 0) || (sa < 0 && sb < 0 && sc < 0))) return false;
    return line_angle_between(a, axis) < aperture && line_angle_between(b, axis) < aperture &&
           line_angle_between(c, axis) < aperture;
}

}  // namespace detail

/// Samples orbit segments from a uniform grid. The unstable cone must be
/// strictly invariant under Dg with one-step expansion > 1; dually the
/// stable cone under D(g^{-1}) along backward orbits.
inline ConeCheckResult verify_anosov_cones(const TorusMap& g, const ConeParams& params) {
    if (!(params.aperture > 0.0 && params.aperture < std::numbers::pi / 2))
        throw Error(ErrorCode::InvalidArgument, "cone aperture must lie in (0, pi/2)");
    const Vec2 du = normalized(params.direction);
    Vec2 ds = perp(du);
    if (params.stable_direction) {
        ds = normalized(*params.stable_direction);
    } else if (is_hyperbolic(g.linear_part())) {
        ds = eigen_data(g.linear_part()).v_s;
    }

    bool invariant = true;
    double mu = std::numeric_limits<double>::infinity();
    double ms = std::numeric_limits<double>::infinity();
    const int n = params.grid;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const TorusPoint start{static_cast<double>(i) / n, static_cast<double>(j) / n};
            TorusPoint x = start;
            for (int k = 0; k < params.iterations; ++k) {
                const Mat2 J = g.jacobian(x);
                invariant = invariant && detail::maps_cone_inside(J, du, params.aperture);
                mu = std::min(mu, detail::min_stretch_on_cone(J, du, params.aperture));
                x = g(x);
            }
            x = start;
            for (int k = 0; k < params.iterations; ++k) {
                const TorusPoint prev = g.inverse(x);
                // D(g^{-1})(x) = Dg(g^{-1} x)^{-1}
                const Mat2 Jinv = g.jacobian(prev).inverse();
                invariant = invariant && detail::maps_cone_inside(Jinv, ds, params.aperture);
                ms = std::min(ms, detail::min_stretch_on_cone(Jinv, ds, params.aperture));
                x = prev;
            }
        }
    }
    ConeCheckResult r;
    r.unstable_margin = mu;
    r.stable_margin = ms;
    r.expansion_margin = std::min(mu, ms);
    if (!invariant) return r;
    if (std::fabs(r.expansion_margin - 1.0) <= 1e-6)
        throw Error(ErrorCode::Inconclusive, "expansion margin within 1e-6 of 1; refine aperture or grid");
    r.anosov = invariant && r.expansion_margin > 1.0;
    return r;
}

}  // namespace anosov
