#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "anosov/conjugacy.hpp"
#include "oracles.hpp"

using namespace anosov;

namespace {

const IntMatrix2 g1{2, 1, 1, 1};
constexpr double pi = std::numbers::pi;

FourierPerturbation sine_x2(double amp) {
    return FourierPerturbation({FourierPerturbation::sine({0, 1}, {amp, 0.0})});
}

FourierPerturbation generic(double dp) {
    FourierPerturbation p({FourierPerturbation::sine({0, 1}, {1.0, 0.3}),
                           FourierPerturbation::cosine({1, 1}, {0.5, -0.4}),
                           FourierPerturbation::sine({2, -1}, {-0.2, 0.6})});
    return p.scaled(dp / p.derivative_bound());
}

double sup_distance_to(const Conjugacy& h, const Diffeo& phi, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Vec2 x{u(rng), u(rng)};
        worst = std::max(worst, norm(h(x) - phi(x)));
    }
    return worst;
}

}  // namespace

TEST(Conjugacy, ZeroPerturbationGivesIdentity) {
    const auto A = eigen_data(g1);
    const auto h = solve_conjugacy(A, std::make_shared<LinearMap>(g1), 32, 1e-12);
    EXPECT_EQ(h.residual(), 0.0);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
            EXPECT_EQ(h.field().at_grid(i, j).x, 0.0);
            EXPECT_EQ(h.field().at_grid(i, j).y, 0.0);
        }
    EXPECT_EQ(h.displacement({0.123, 0.456}).x, 0.0);
}

TEST(Conjugacy, RecoversSmoothMarking) {
    const auto A = eigen_data(g1);
    const Diffeo phi = build_diffeo(sine_x2(0.02));
    const auto h = solve_conjugacy(A, std::make_shared<ConjugatedMap>(phi, g1), 64, 1e-9);
    EXPECT_LT(h.residual(), 1e-9);
    double grid = 0.0;
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) {
            const Vec2 x{i / 64.0, j / 64.0};
            grid = std::max(grid, norm(x + h.field().at_grid(i, j) - phi(x)));
        }
    EXPECT_LT(grid, 1e-8);
    EXPECT_LT(sup_distance_to(h, phi, 200, 1), 1e-8);
}

TEST(Conjugacy, GenericPerturbationConvergesAtContractionRate) {
    const auto A = eigen_data(g1);
    const auto g = std::make_shared<PerturbedMap>(g1, sine_x2(0.03));
    const auto h = solve_conjugacy(A, g, 32, 1e-9);
    EXPECT_LT(h.residual(), 1e-9);
    const double predicted = std::log(1e-9) / std::log(A.lambda_s);
    EXPECT_GT(h.sweeps(), 0.5 * predicted);
    EXPECT_LT(h.sweeps(), 2.0 * predicted + 5);
    const auto& hist = h.residual_history();
    for (std::size_t k = 1; k < hist.size(); ++k) EXPECT_LT(hist[k], hist[k - 1]);
}

TEST(Conjugacy, RefinedResidualOnFinerGrid) {
    const auto A = eigen_data(g1);
    const auto g = std::make_shared<PerturbedMap>(g1, generic(0.03));
    const auto h = solve_conjugacy(A, g, 32, 1e-10);
    EXPECT_LT(h.refined_residual(64), 1e-9);
}

TEST(Conjugacy, IndependentOfInitialField) {
    const auto A = eigen_data(g1);
    const auto g = std::make_shared<PerturbedMap>(g1, generic(0.03));
    const auto h0 = solve_conjugacy(A, g, 32, 1e-10);
    ConjugacyOptions opt;
    opt.random_start = 0.1;
    opt.seed = 42;
    const auto h1 = solve_conjugacy(A, g, 32, 1e-10, opt);
    double worst = 0.0;
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) worst = std::max(worst, norm(h0.field().at_grid(i, j) - h1.field().at_grid(i, j)));
    EXPECT_LT(worst, 1e-9);
}

TEST(Conjugacy, DivergenceIsReported) {
    const auto A = eigen_data(g1);
    const auto g = std::make_shared<PerturbedMap>(g1, sine_x2(0.6));
    try {
        solve_conjugacy(A, g, 16, 1e-9);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SolverDiverged);
    }
}

TEST(Conjugacy, InverseRoundTrip) {
    const auto A = eigen_data(g1);
    const auto h = solve_conjugacy(A, std::make_shared<PerturbedMap>(g1, generic(0.03)), 32, 1e-10);
    for (const Vec2 y : {Vec2{0.1, 0.2}, Vec2{0.7, 0.95}, Vec2{0.5, 0.5}}) EXPECT_LT(norm(h(h.inverse(y)) - y), 1e-12);
}

TEST(Pushforward, IdentityReturnsDirection) {
    const auto A = eigen_data(g1);
    const auto h = solve_conjugacy(A, std::make_shared<LinearMap>(g1), 16, 1e-12);
    const Vec2 w = pushforward_foliation_direction(h, A.v_u, {0.3, 0.4}, 1e-3);
    EXPECT_NEAR(w.x, A.v_u.x, 1e-15);
    EXPECT_NEAR(w.y, A.v_u.y, 1e-15);
    EXPECT_THROW(pushforward_foliation_direction(h, A.v_u, {0.3, 0.4}, 0.5), Error);
}

TEST(Pushforward, SmoothMarkingConvergesToDerivative) {
    const auto A = eigen_data(g1);
    const Diffeo phi = build_diffeo(sine_x2(0.02));
    const auto h = solve_conjugacy(A, std::make_shared<ConjugatedMap>(phi, g1), 64, 1e-11);
    const Vec2 x{0.2, 0.35};
    const Vec2 exact = normalized(phi.jacobian(x) * A.v_s);
    double prev = 1.0;
    for (double d : {1e-2, 1e-3, 1e-4}) {
        const double err = norm(pushforward_foliation_direction(h, A.v_s, x, d) - exact);
        EXPECT_LT(err, 2.0 * d);
        EXPECT_LT(err, prev);
        prev = err;
    }
}

TEST(Holder, IdentityAndSmoothMarking) {
    const auto A = eigen_data(g1);
    const auto id = solve_conjugacy(A, std::make_shared<LinearMap>(g1), 16, 1e-12);
    HolderOptions opt;
    opt.samples = 20;
    EXPECT_NEAR(estimate_holder_exponent(id, A.v_u, opt).exponent, 1.0, 0.01);
    EXPECT_NEAR(estimate_holder_exponent(id, {0.6, 0.8}, opt).exponent, 1.0, 0.01);
    const Diffeo phi = build_diffeo(sine_x2(0.02));
    const auto h = solve_conjugacy(A, std::make_shared<ConjugatedMap>(phi, g1), 64, 1e-11);
    opt.samples = 10;
    const auto est = estimate_holder_exponent(h, A.v_s, opt);
    EXPECT_NEAR(est.exponent, 1.0, 0.02);
    EXPECT_GE(est.stderr_, 0.0);
}

TEST(Periodic, LinearCounts) {
    const auto A = eigen_data(g1);
    const LinearMap g(g1);
    for (int n = 1; n <= 4; ++n) {
        const auto s = find_periodic_points(g, A, n);
        EXPECT_EQ(static_cast<std::int64_t>(s.points.size()), oracle::periodic_count({2, 1, 1, 1}, n));
        EXPECT_EQ(s.expected_count, oracle::periodic_count({2, 1, 1, 1}, n));
        EXPECT_TRUE(s.failures.empty());
    }
    const auto fixed = find_periodic_points(g, A, 1);
    ASSERT_EQ(fixed.points.size(), 1u);
    EXPECT_LT(torus_distance(fixed.points[0], {0.0, 0.0}), 1e-15);
    EXPECT_EQ(find_periodic_points(g, A, 2).points.size(), 5u);
}

TEST(Periodic, PerturbedCountsAndOrbitStructure) {
    const auto A = eigen_data(g1);
    const PerturbedMap g(g1, generic(0.03));
    for (int n = 1; n <= 3; ++n) {
        const auto s = find_periodic_points(g, A, n);
        EXPECT_EQ(static_cast<std::int64_t>(s.points.size()), oracle::periodic_count({2, 1, 1, 1}, n));
        std::size_t total = 0;
        for (const auto& orbit : s.orbits) {
            EXPECT_EQ(n % orbit.period, 0);
            total += orbit.points.size();
            for (std::size_t k = 0; k < orbit.points.size(); ++k)
                EXPECT_LT(torus_distance(g(orbit.points[k]), orbit.points[(k + 1) % orbit.points.size()]), 1e-10);
        }
        EXPECT_EQ(total, s.points.size());
    }
}

TEST(Periodic, MultipliersInvariantUnderCyclicRelabeling) {
    const auto A = eigen_data(g1);
    const PerturbedMap g(g1, generic(0.03));
    const auto s = find_periodic_points(g, A, 3);
    for (const auto& orbit : s.orbits) {
        if (orbit.period < 2) continue;
        auto pts = orbit.points;
        std::rotate(pts.begin(), pts.begin() + 1, pts.end());
        const auto [mu, ms] = orbit_multipliers(g, pts);
        EXPECT_NEAR(mu, orbit.mult_u, 1e-10 * std::fabs(mu));
        EXPECT_NEAR(ms, orbit.mult_s, 1e-10);
    }
}

TEST(SmoothInvariants, LinearConjugatedAndGeneric) {
    const auto A = eigen_data(g1);
    EXPECT_LT(compare_smooth_invariants(LinearMap(g1), A, 3).max_mismatch, 1e-14);
    const ConjugatedMap conj(build_diffeo(generic(0.05)), g1);
    const auto rc = compare_smooth_invariants(conj, A, 2);
    EXPECT_LT(rc.max_mismatch, 1e-8);
    EXPECT_EQ(rc.rows.size(), 3u);
    const auto rg = compare_smooth_invariants(PerturbedMap(g1, sine_x2(0.03 / (2 * pi))), A, 2);
    EXPECT_GT(rg.max_mismatch, 1e-4);
}

TEST(SmoothInvariants, FixedPointMultiplierOracle) {
    // g = A + (a sin 2 pi x2, 0) fixes the origin with Dg(0) = [[2, 1 + 2 pi a], [1, 1]].
    const auto A = eigen_data(g1);
    const double a = 0.03 / (2 * pi);
    const auto r = compare_smooth_invariants(PerturbedMap(g1, sine_x2(a)), A, 1);
    ASSERT_EQ(r.rows.size(), 1u);
    const double b = 1 + 2 * pi * a;
    const double t = 3.0, d = 2.0 - b;
    const double mu = 0.5 * (t + std::sqrt(t * t - 4 * d));
    EXPECT_NEAR(r.rows[0].mult_u, mu, 1e-12);
    EXPECT_NEAR(r.rows[0].mismatch, std::fabs(std::log(mu) - std::log(A.lambda_u)) / std::log(A.lambda_u), 1e-12);
}
