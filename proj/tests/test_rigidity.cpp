#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "anosov/rigidity.hpp"
#include "oracles.hpp"

using namespace anosov;

namespace {

const IntMatrix2 g1{2, 1, 1, 1};
const IntMatrix2 g2{1, 1, 1, 2};
constexpr double pi = std::numbers::pi;

FourierPerturbation sine_x2(double amp) {
    return FourierPerturbation({FourierPerturbation::sine({0, 1}, {amp, 0.0})});
}

TranslationAction synthetic(SyntheticHomeomorphism h, double eps = 0.05, double x_lo = -1.5, double x_hi = 1.5) {
    return synthetic_translation_action([h](double x) { return h(x); }, [h](double y) { return h.inverse(y); }, eps,
                                        x_lo, x_hi);
}

struct Linear {
    MapHandle m1 = std::make_shared<LinearMap>(g1);
    MapHandle m2 = std::make_shared<LinearMap>(g2);
    LineField u1 = compute_line_field(m1, FieldLabel::unstable, 16);
    LineField s1 = compute_line_field(m1, FieldLabel::stable, 16);
    LineField s2 = compute_line_field(m2, FieldLabel::stable, 16);
};

const Linear& linear() {
    static const Linear f;
    return f;
}

}  // namespace

TEST(TranslationAction, SyntheticIsAFlow) {
    const auto S = synthetic({1.0, 0.1, 1.0});
    for (double y : {-0.5, 0.0, 0.3})
        EXPECT_NEAR(S(0.02, S(0.03, y)), S(0.05, y), 1e-14);
    EXPECT_NEAR(S(0.0, 0.4), 0.4, 1e-15);
    EXPECT_THROW(S(0.2, 0.0), Error);
    EXPECT_THROW(S(0.0, 5.0), Error);
}

TEST(TranslationAction, FromLinearConjugacyIsATranslation) {
    const auto A = eigen_data(g1);
    const auto h = solve_conjugacy(A, std::make_shared<LinearMap>(g1), 32, 1e-12);
    const auto S = translation_action_from_conjugacy(h, {0.2, 0.6}, A.v_u, 0.05);
    EXPECT_NEAR(S.y_lo, -0.2, 1e-12);
    EXPECT_NEAR(S.y_hi, 0.2, 1e-12);
    for (double y : {-0.15, 0.0, 0.1})
        for (double t : {-0.05, 0.03})
            EXPECT_NEAR(S(t, y), y + t, 1e-12);
    EXPECT_THROW(translation_action_from_conjugacy(h, {0.2, 0.6}, A.v_u, 0.2), Error);
}

TEST(Regularity, SmoothActionIsStableUnderRefinement) {
    const auto S = synthetic({1.0, 0.1, 1.0});
    const auto r = verify_action_regularity(S);
    EXPECT_LT(r.refinement_stability, 1e-8);
    // D = h'(h^{-1}(y) + t) / h'(h^{-1}(y)) stays near 1 for small t.
    EXPECT_GT(r.d_min, 0.99);
    EXPECT_LT(r.d_max, 1.01);
    EXPECT_LT(r.modulus_y, 0.01);
}

TEST(Linearize, AffineExamplesGiveExactAlpha) {
    const auto lin = linearize_translation_action(synthetic({2.0, 0.0, 1.0}), 0.0, {-0.15, 0.15});
    EXPECT_NEAR(lin.alpha, 2.0, 1e-10);
    EXPECT_LT(lin.affinity_residual, 1e-10);
    EXPECT_NEAR(lin.g(0.1), 0.1, 1e-10);

    const auto id = linearize_translation_action(synthetic({1.0, 0.0, 1.0}), 0.2, {0.12, 0.28});
    EXPECT_NEAR(id.alpha, 1.0, 1e-12);
    EXPECT_LT(id.affinity_residual, 1e-12);
    EXPECT_NEAR(id.g(0.25), 0.05, 1e-12);
}

TEST(Linearize, SineHomeomorphism) {
    const SyntheticHomeomorphism hh{1.0, 0.1, 1.0};
    const auto lin = linearize_translation_action(synthetic(hh), 0.0, {-0.08, 0.08});
    EXPECT_NEAR(lin.alpha, 1.1, 1e-6);
    EXPECT_LT(lin.affinity_residual, 1e-8);
    EXPECT_LT(cocycle_residual(lin), 1e-10);
    EXPECT_NEAR(lin.fit_alpha(0.0, 0.025), lin.fit_alpha(0.025, 0.05), 1e-8);
    // g(y) = h'(x0) (h^{-1}(y) - x0) with x0 = h^{-1}(y0) = 0.
    for (double y : {-0.07, -0.01, 0.045, 0.075}) EXPECT_NEAR(lin.g(y), 1.1 * hh.inverse(y), 1e-8);
}

TEST(Linearize, Failures) {
    const auto S = synthetic({1.0, 0.1, 1.0}, 0.01);
    EXPECT_THROW(
        {
            try {
                linearize_translation_action(S, 0.0, {-1.0, 1.0});
            } catch (const Error& e) {
                EXPECT_EQ(e.code(), ErrorCode::RootBracketFailed);
                throw;
            }
        },
        Error);
    EXPECT_THROW(linearize_translation_action(S, 2.0, {-1.0, 1.0}), Error);
}

TEST(Factorization, LinearSystemMatchesOracle) {
    const auto e1 = eigen_data(g1), e2 = eigen_data(g2);
    const auto f = factor_translation_linear(e1, e2, 1.0);
    EXPECT_NEAR(f.translation_t, -0.8090170, 1e-6);
    const oracle::V2 v1s{1.0, e1.v_s.y / e1.v_s.x}, v2s{1.0, e2.v_s.y / e2.v_s.x}, v1u{1.0, e1.v_u.y / e1.v_u.x};
    // r v2s - t v1u = -v1s
    const auto rt = oracle::solve2(v2s, {-v1u[0], -v1u[1]}, {-v1s[0], -v1s[1]});
    EXPECT_NEAR(f.slide_r, rt[0], 1e-12);
    EXPECT_NEAR(f.translation_t, rt[1], 1e-12);
    EXPECT_LT(f.numeric_deviation, 1e-14);

    const auto u = factor_translation_linear(e1, e2, 1.0, FactorNormalization::unit);
    EXPECT_NEAR(u.translation_t, -0.5, 1e-12);
    EXPECT_NEAR(factor_translation_linear(e1, e2, -0.3).translation_t, 0.3 * 0.8090170, 1e-6);
    EXPECT_THROW(factor_translation_linear(e1, eigen_data(g1.inverse()), 1.0), Error);
}

TEST(Factorization, NumericHolonomyMatchesLinearModel) {
    const auto& f = linear();
    const auto e1 = eigen_data(g1), e2 = eigen_data(g2);
    for (double s : {0.0, 0.1, -0.15}) {
        const auto nf = factor_translation_numeric({&f.u1, &f.s1, &f.s2}, e1, e2, {0.2, 0.6}, s);
        const auto lin = factor_translation_linear(e1, e2, s, FactorNormalization::unit);
        EXPECT_NEAR(nf.result.translation_t, lin.translation_t, 1e-8) << s;
        EXPECT_NEAR(nf.result.slide_r, lin.slide_r, 1e-8) << s;
        EXPECT_LT(nf.result.numeric_deviation, 1e-8);
        EXPECT_LT(nf.derivative_deviation, 1e-6);
    }
}

TEST(Factorization, SmoothConjugatePredictedThroughH) {
    const auto e1 = eigen_data(g1), e2 = eigen_data(g2);
    const Diffeo phi = build_diffeo(sine_x2(0.05 / (2 * pi)));
    const MapHandle m1 = std::make_shared<ConjugatedMap>(phi, g1);
    const MapHandle m2 = std::make_shared<ConjugatedMap>(phi, g2);
    const auto u1 = compute_line_field(m1, FieldLabel::unstable, 64);
    const auto s1 = compute_line_field(m1, FieldLabel::stable, 64);
    const auto s2 = compute_line_field(m2, FieldLabel::stable, 64);
    const auto h = solve_conjugacy(e1, m1, 64, 1e-10);
    const Vec2 x0{0.2, 0.6};
    const auto nf = factor_translation_numeric({&u1, &s1, &s2}, e1, e2, h(x0), 0.1, &h, x0);
    EXPECT_LT(nf.result.numeric_deviation, 1e-4);
    EXPECT_LT(nf.derivative_deviation, 1e-2);
}

TEST(Propagation, LinearSlopesAgreeEverywhere) {
    const auto& f = linear();
    const auto e1 = eigen_data(g1);
    PropagationOptions po;
    po.refine = false;
    const auto table = tangency_propagation_check(f.u1, f.s1, f.s2, e1, {0.2, 0.6}, 1, po);
    ASSERT_EQ(table.rows.size(), 9u);
    EXPECT_TRUE(table.failures.empty());
    for (const auto& row : table.rows) {
        EXPECT_NEAR(std::fabs(row.measured_slope), 2.0, 1e-8);
        EXPECT_LT(row.difference, 1e-8);
        EXPECT_LT(row.deviation, 1e-8);
    }
    // E1u = (1, 1/golden), E2s = (1, -1/golden).
    EXPECT_NEAR(table.min_angle, 2 * std::atan(1.0 / oracle::golden), 1e-8);
    EXPECT_NEAR(table.min_angle * 180 / pi, 63.435, 1e-3);
}

TEST(Verdict, RuleAndMonotonicity) {
    TeichmullerVerdict v;
    v.transversality_min_angle = 0.6;
    v.lemma3_deviation = 1e-5;
    v.prop1_affinity_residual = 1e-9;
    v.jacobian_consistency = 1e-6;
    v.periodic_mismatch = 1e-9;
    Thresholds t;
    EXPECT_EQ(decide_verdict(v, t), Verdict::smooth);
    Thresholds tight = t;
    tight.lemma3 = 1e-6;
    EXPECT_EQ(decide_verdict(v, tight), Verdict::inconclusive);
    tight = t;
    tight.transversality = 0.7;
    EXPECT_EQ(decide_verdict(v, tight), Verdict::inconclusive);
    tight = t;
    tight.obstruction = 1e-3;
    EXPECT_EQ(decide_verdict(v, tight), Verdict::smooth);
    v.tangency_events = 1;
    EXPECT_EQ(decide_verdict(v, t), Verdict::inconclusive);
    v.periodic_mismatch = 0.01;
    EXPECT_EQ(decide_verdict(v, t), Verdict::obstructed);
    v.lemma3_deviation = std::numeric_limits<double>::quiet_NaN();
    v.periodic_mismatch = 1e-9;
    v.tangency_events = 0;
    EXPECT_EQ(decide_verdict(v, t), Verdict::inconclusive);
}

TEST(Teichmuller, LinearActionIsSmooth) {
    TeichmullerSetup cfg;
    cfg.N = 64;
    cfg.holder_samples = 10;
    cfg.cones.grid = 32;
    const auto v = teichmuller_experiment(cfg);
    EXPECT_EQ(v.verdict, Verdict::smooth);
    EXPECT_LT(v.periodic_mismatch, 1e-12);
    EXPECT_LT(v.lemma3_deviation, 1e-8);
    EXPECT_LT(v.prop1_affinity_residual, 1e-8);
    ASSERT_TRUE(v.jacobian_vs_marking.has_value());
    EXPECT_LT(*v.jacobian_vs_marking, 1e-8);
    EXPECT_EQ(v.transversality_pairs.size(), 6u);
}

TEST(Teichmuller, PerturbedGeneratorIsObstructed) {
    TeichmullerSetup cfg;
    cfg.N = 64;
    cfg.kind = ActionKind::perturbed;
    cfg.modes = sine_x2(0.03 / (2 * pi));
    cfg.holder_samples = 10;
    cfg.cones.grid = 32;
    const auto v = teichmuller_experiment(cfg);
    EXPECT_EQ(v.verdict, Verdict::obstructed);
    EXPECT_GT(v.periodic_mismatch, 1e-4);
    bool skipped = false;
    for (const auto& d : v.diagnostics) skipped = skipped || d.status == "skipped";
    EXPECT_TRUE(skipped);
}
