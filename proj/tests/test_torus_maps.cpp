#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "anosov/torus_map.hpp"
#include "oracles.hpp"

using namespace anosov;

namespace {

const IntMatrix2 g1{2, 1, 1, 1};
const IntMatrix2 g2{1, 1, 1, 2};
constexpr double pi = std::numbers::pi;

FourierPerturbation sine_x2(double amp) {
    return FourierPerturbation({FourierPerturbation::sine({0, 1}, {amp, 0.0})});
}

FourierPerturbation generic(double scale) {
    return FourierPerturbation({FourierPerturbation::sine({0, 1}, {scale, 0.3 * scale}),
                                FourierPerturbation::cosine({1, 1}, {0.5 * scale, -0.4 * scale}),
                                FourierPerturbation::sine({2, -1}, {-0.2 * scale, 0.6 * scale})});
}

oracle::V2 as_v(Vec2 v) { return {v.x, v.y}; }

}  // namespace

TEST(Fourier, SingleModeValues) {
    const auto p = sine_x2(0.03);
    const Vec2 v = p({0.1, 0.3});
    EXPECT_NEAR(v.x, 0.03 * std::sin(2 * pi * 0.3), 1e-16);
    EXPECT_EQ(v.y, 0.0);
    EXPECT_NEAR(p.sup_bound(), 0.03, 1e-16);
    EXPECT_NEAR(p.derivative_bound(), 0.06 * pi, 1e-15);
    const auto c = FourierPerturbation({FourierPerturbation::cosine({1, 0}, {0.0, 0.2})});
    EXPECT_NEAR(c({0.25, 0.7}).y, 0.2 * std::cos(2 * pi * 0.25), 1e-16);
}

TEST(Fourier, ConjugateModesMerge) {
    // sin(2 pi (-x2)) = -sin(2 pi x2).
    const auto p = FourierPerturbation(
        {FourierPerturbation::sine({0, 1}, {0.03, 0.0}), FourierPerturbation::sine({0, -1}, {0.01, 0.0})});
    EXPECT_EQ(p.modes().size(), 1u);
    EXPECT_NEAR(p({0.0, 0.2}).x, 0.02 * std::sin(2 * pi * 0.2), 1e-16);
    const auto zero = FourierPerturbation(
        {FourierPerturbation::sine({0, 1}, {0.03, 0.0}), FourierPerturbation::sine({0, -1}, {0.03, 0.0})});
    EXPECT_TRUE(zero.is_zero());
}

TEST(Fourier, ConstantMode) {
    const auto p = FourierPerturbation({FourierPerturbation::cosine({0, 0}, {0.1, -0.2})});
    const Vec2 v = p({0.3, 0.9});
    EXPECT_NEAR(v.x, 0.1, 1e-16);
    EXPECT_NEAR(v.y, -0.2, 1e-16);
}

TEST(PerturbedMap, ZeroPerturbationIsLinear) {
    const PerturbedMap g(g1, FourierPerturbation{{}});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Vec2 x{u(rng), u(rng)};
        EXPECT_LT(torus_distance(g(x), standard_action_apply(g1, x)), 1e-15);
        const Mat2 J = g.jacobian(x);
        EXPECT_EQ(J.a, 2.0);
        EXPECT_EQ(J.b, 1.0);
        EXPECT_EQ(J.c, 1.0);
        EXPECT_EQ(J.d, 1.0);
    }
}

TEST(PerturbedMap, SingleModeJacobianAtOrigin) {
    const PerturbedMap g(g1, sine_x2(0.03));
    const Mat2 J = g.jacobian({0.0, 0.0});
    EXPECT_NEAR(J.a, 2.0, 1e-15);
    EXPECT_NEAR(J.b, 1.0 + 0.06 * pi, 1e-15);
    EXPECT_NEAR(J.c, 1.0, 1e-15);
    EXPECT_NEAR(J.d, 1.0, 1e-15);
}

TEST(PerturbedMap, JacobianMatchesFiniteDifferences) {
    const PerturbedMap g(g1, generic(0.004));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Vec2 x{u(rng), u(rng)};
        const auto fd = oracle::fd_jacobian([&](oracle::V2 p) { return as_v(g.lift({p[0], p[1]})); }, as_v(x));
        const Mat2 J = g.jacobian(x);
        EXPECT_NEAR(J.a, fd[0], 1e-6);
        EXPECT_NEAR(J.b, fd[1], 1e-6);
        EXPECT_NEAR(J.c, fd[2], 1e-6);
        EXPECT_NEAR(J.d, fd[3], 1e-6);
    }
}

TEST(PerturbedMap, DeckTranslations) {
    const PerturbedMap g(g1, generic(0.005));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Vec2 x{u(rng), u(rng)};
        const Vec2 k{static_cast<double>(i % 3) - 1.0, static_cast<double>(i % 5) - 2.0};
        EXPECT_LT(norm(g.lift(x + k) - g.lift(x) - g1 * k), 1e-12);
        EXPECT_LT(torus_distance(g(x), g(wrap(x + k))), 1e-12);
    }
    EXPECT_LT(homotopy_defect(g), 1e-12);
}

TEST(PerturbedMap, NewtonInverse) {
    const PerturbedMap g(g1, generic(0.005));
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            const Vec2 y{i / 16.0, j / 16.0};
            EXPECT_LT(norm(g.lift(g.inverse_lift(y)) - y), 1e-12);
        }
}

TEST(Diffeo, BuildAndInvert) {
    const Diffeo phi = build_diffeo(sine_x2(0.02));
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) {
            const Vec2 x{i / 64.0, j / 64.0};
            EXPECT_LT(norm(phi.inverse(phi(x)) - x), 1e-12);
        }
    EXPECT_TRUE(build_diffeo(FourierPerturbation{{}}).is_identity());
    try {
        build_diffeo(sine_x2(1.2 / (2 * pi)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotADiffeo);
    }
}

TEST(ConjugatedAction, IdentityMarkingGivesLinearMaps) {
    const MarkedAction action = conjugated_action(build_diffeo(FourierPerturbation{{}}), {g1, g2});
    const Vec2 x{0.3, 0.8};
    EXPECT_LT(torus_distance((*action.map(0))(x), standard_action_apply(g1, x)), 1e-15);
    EXPECT_LT(torus_distance((*action.map(1))(x), standard_action_apply(g2, x)), 1e-15);
}

TEST(ConjugatedAction, FixedPointAndHomotopy) {
    const Diffeo phi = build_diffeo(sine_x2(0.02));
    const MarkedAction action = conjugated_action(phi, {g1, g2});
    EXPECT_LT(torus_distance((*action.map(0))({0.0, 0.0}), {0.0, 0.0}), 1e-14);
    EXPECT_LT(homotopy_defect(*action.map(0)), 1e-10);
    EXPECT_LT(homotopy_defect(*action.map(1)), 1e-10);
    EXPECT_EQ(action.map(0)->linear_part(), g1);
}

TEST(ConjugatedAction, IsGroupAction) {
    const Diffeo phi = build_diffeo(generic(0.003));
    const MarkedAction action = conjugated_action(phi, {g1, g2});
    const MapHandle prod = action.map_for(compose(g1, g2));
    const ComposedMap composed(action.map(0), action.map(1));
    double worst = 0.0;
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) {
            const Vec2 x{i / 64.0, j / 64.0};
            worst = std::max(worst, torus_distance((*prod)(x), composed(x)));
        }
    EXPECT_LT(worst, 1e-10);
}

TEST(ConjugatedAction, JacobianMatchesFiniteDifferences) {
    const Diffeo phi = build_diffeo(generic(0.003));
    const ConjugatedMap g(phi, g1);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const Vec2 x{u(rng), u(rng)};
        const auto fd = oracle::fd_jacobian([&](oracle::V2 p) { return as_v(g.lift({p[0], p[1]})); }, as_v(x));
        const Mat2 J = g.jacobian(x);
        EXPECT_NEAR(J.a, fd[0], 1e-6);
        EXPECT_NEAR(J.b, fd[1], 1e-6);
        EXPECT_NEAR(J.c, fd[2], 1e-6);
        EXPECT_NEAR(J.d, fd[3], 1e-6);
    }
}

TEST(Cones, LinearMapMarginApproachesLambda) {
    const auto e = eigen_data(g1);
    const LinearMap g(g1);
    ConeParams params;
    params.direction = e.v_u;
    params.grid = 8;
    params.iterations = 2;
    const auto r = verify_anosov_cones(g, params);
    EXPECT_TRUE(r.anosov);
    EXPECT_GT(r.expansion_margin, 1.0);
    EXPECT_LT(r.expansion_margin, e.lambda_u);
    params.aperture = 1e-4;
    EXPECT_NEAR(verify_anosov_cones(g, params).unstable_margin, e.lambda_u, 1e-6);
}

TEST(Cones, PerturbedMapIsAnosovAndMonotone) {
    const auto e = eigen_data(g1);
    auto p = generic(1.0);
    p = p.scaled(0.05 / p.derivative_bound());
    ConeParams params;
    params.direction = e.v_u;
    params.grid = 32;
    params.iterations = 5;
    const auto full = verify_anosov_cones(PerturbedMap(g1, p), params);
    EXPECT_TRUE(full.anosov);
    const auto half = verify_anosov_cones(PerturbedMap(g1, p.scaled(0.5)), params);
    EXPECT_TRUE(half.anosov);
}

TEST(Cones, EllipticAndParabolicFail) {
    ConeParams params;
    params.grid = 4;
    params.iterations = 2;
    EXPECT_FALSE(verify_anosov_cones(LinearMap(IntMatrix2{0, -1, 1, 0}), params).anosov);
    params.direction = {1.0, 0.0};
    params.stable_direction = Vec2{0.0, 1.0};
    EXPECT_FALSE(verify_anosov_cones(LinearMap(IntMatrix2{1, 1, 0, 1}), params).anosov);
}
