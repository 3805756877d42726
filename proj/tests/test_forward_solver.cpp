#include "breakdown/criteria_real.hpp"
#include "breakdown/forward_solver.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace breakdown;
using namespace breakdown::forward;

namespace {

std::function<double(const Vec2&)> linear_bc(const Vec2& e) {
    return [e](const Vec2& x) { return -e.dot(x); };
}

double max_abs_diff(const std::vector<double>& a, double v) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x - v));
    return m;
}

} // namespace

TEST(Solve, HomogeneousUniformField) {
    const auto g = laminate(32, 0, 0.5);
    const auto s = solve<double>(g, 1.0, 1.0, linear_bc({1.0, 0.0}));
    EXPECT_LT(max_abs_diff(s.ExL, 1.0), 1e-12);
    EXPECT_LT(max_abs_diff(s.ExR, 1.0), 1e-12);
    EXPECT_LT(max_abs_diff(s.EyB, 0.0), 1e-12);
    EXPECT_LT(max_abs_diff(s.EyT, 0.0), 1e-12);
}

TEST(Solve, MalformedGridRejected) {
    PhaseGrid g;
    g.nx = g.ny = 2;
    g.phase = {1, 2, 3, 1};
    try {
        solve<double>(g, 1.0, 2.0, linear_bc({1.0, 0.0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
    }
}

TEST(Solve, SeriesLaminateLayerFields) {
    const oracle::Laminate lam{1.0, 2.0, 0.5, {1.0, 0.0}};
    const auto s = solve<double>(laminate(64, 0, 0.5), 1.0, 2.0, [&](const Vec2& x) { return lam.potential(x); });
    const auto& g = s.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int c = g.index(i, j);
            const Vec2 e = lam.field(g.at(i, j));
            EXPECT_NEAR(s.ExL[c], e.x(), 1e-10);
            EXPECT_NEAR(s.ExR[c], e.x(), 1e-10);
        }
    // ratio 2:1 between the layers
    EXPECT_NEAR(s.ExL[g.index(0, 0)] / s.ExL[g.index(g.nx - 1, 0)], 2.0, 1e-10);
}

TEST(Solve, SeriesAndParallelEffectiveConductivity) {
    for (int axis : {0, 1}) {
        // layers normal to `axis`, unit field along x
        const auto g = laminate(256, axis, 0.5);
        std::function<double(const Vec2&)> bc;
        oracle::Laminate lam{1.0, 2.0, 0.5, {1.0, 0.0}};
        if (axis == 0) bc = [&](const Vec2& x) { return lam.potential(x); };
        else bc = linear_bc({1.0, 0.0});
        const auto d = boundary_dataset(solve<double>(g, 1.0, 2.0, bc));
        const Vec2 E = boundary::average_field(d);
        const Vec2 J = boundary::average_current(d);
        EXPECT_NEAR(E.x(), 1.0, 1e-10);
        EXPECT_NEAR(J.x() / E.x(), axis == 0 ? 4.0 / 3.0 : 1.5, 1e-6);
        EXPECT_NEAR(J.y(), 0.0, 1e-10);
    }
}

TEST(Solve, UnalignedLaminateConvergesLinearly) {
    // layer boundary at x = 1/3 never coincides with a face
    const double exact = 1.0 / ((1.0 / 3.0) / 1.0 + (2.0 / 3.0) / 2.0);
    double prev = 0.0;
    for (int n : {32, 64, 128, 256}) {
        const auto g = laminate(n, 0, 1.0 / 3.0);
        const double sig = 1.0 / (g.fraction(1) / 1.0 + g.fraction(2) / 2.0);
        const oracle::Laminate lam{1.0, 2.0, g.fraction(1), {1.0, 0.0}};
        const auto d = boundary_dataset(solve<double>(g, 1.0, 2.0, [&](const Vec2& x) { return lam.potential(x); }));
        const double eff = boundary::average_current(d).x();
        EXPECT_NEAR(eff, sig, 1e-9);
        const double err = std::abs(eff - exact);
        if (prev > 0.0) {
            EXPECT_LT(err, 0.55 * prev) << n;
        }
        prev = err;
    }
}

TEST(Solve, ComplexConductivity) {
    const auto g = checkerboard(32, 4);
    const cplx s1(1.0, 0.5), s2(2.0, -0.3);
    const auto s = solve<cplx>(g, s1, s2, [](const Vec2& x) { return cplx(-x.x(), -0.5 * x.y()); });
    EXPECT_LT(s.residual, 1e-10);
    // flux balance of the complex current
    cplx net = 0.0;
    for (const auto& j : s.Jn) net += j;
    EXPECT_LT(std::abs(net), 1e-10);
}

TEST(InteriorStats, HomogeneousUniformField) {
    const auto g = checkerboard(16, 2);
    const Vec2 e0(0.6, -0.8);
    const auto s = solve<double>(g, 1.0, 1.0, linear_bc(e0));
    const auto st = interior_stats(g, {real_field(s)});
    for (int a = 0; a < 2; ++a) {
        EXPECT_NEAR(st.A[a](0, 0), st.fraction[a] * e0.squaredNorm(), 1e-12);
        EXPECT_NEAR((st.moment[a][0] - st.fraction[a] * e0).norm(), 0.0, 1e-12);
        EXPECT_NEAR(st.max_intensity[a], e0.squaredNorm(), 1e-12);
    }
}

TEST(InteriorStats, LaminatePhaseAverages) {
    const oracle::Laminate lam{1.0, 3.0, 0.25, {0.7, 0.4}};
    const auto g = laminate(64, 0, 0.25);
    const auto s = solve<double>(g, 1.0, 3.0, [&](const Vec2& x) { return lam.potential(x); });
    const auto st = interior_stats(g, {real_field(s)});
    for (int a = 0; a < 2; ++a) {
        const Vec2 e = lam.field(a + 1);
        EXPECT_NEAR((st.moment[a][0] - st.fraction[a] * e).norm(), 0.0, 1e-8);
        EXPECT_NEAR(st.A[a](0, 0), st.fraction[a] * e.squaredNorm(), 1e-8);
    }
}

TEST(InteriorStats, VarianceMatricesArePositiveSemidefinite) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(0.2, 5.0);
    for (int k = 0; k < 10; ++k) {
        const auto g = rasterize(32, oracle::DiskInclusions::random(rng));
        const double s1 = U(rng), s2 = U(rng);
        const auto a = solve<double>(g, s1, s2, linear_bc({1.0, 0.0}));
        const auto b = solve<double>(g, s1, s2, [](const Vec2& x) { return x.x() * x.y(); });
        const auto st = interior_stats(g, {real_field(a), real_field(b)});
        for (int al = 0; al < 2; ++al) {
            Mat2 M;
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q) M(p, q) = st.moment[al][p].dot(st.moment[al][q]);
            const Mat2 S = st.A[al] - M / st.fraction[al];
            EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat2>(S).eigenvalues().minCoeff(), -1e-10);
        }
    }
}

TEST(BoundaryExtraction, HomogeneousRoundTrip) {
    const Vec2 e0(0.3, 1.1);
    const auto d = boundary_dataset(solve<double>(checkerboard(24, 3), 2.0, 2.0, linear_bc(e0)));
    EXPECT_NEAR((boundary::average_field(d) - e0).norm(), 0.0, 1e-10);
    EXPECT_NEAR((boundary::average_current(d) - 2.0 * e0).norm(), 0.0, 1e-10);
}

TEST(BoundaryExtraction, EnergyIdentity) {
    std::mt19937_64 rng(32);
    for (int k = 0; k < 5; ++k) {
        const auto g = rasterize(48, oracle::DiskInclusions::random(rng));
        const auto s = solve<double>(g, 1.0, 4.0, [](const Vec2& x) { return std::sin(2.0 * x.x()) + x.y() * x.y(); });
        const auto st = interior_stats(g, {real_field(s)});
        const double interior = 1.0 * st.A[0](0, 0) + 4.0 * st.A[1](0, 0);
        EXPECT_NEAR(boundary::average_power(boundary_dataset(s)), interior, 1e-10 * std::max(1.0, interior));
    }
}

TEST(BoundaryExtraction, ComplexCrossPowersMatchInteriorQuadrature) {
    const auto g = rasterize(40, oracle::DiskInclusions{{{0.5, 0.45}}, {0.2}});
    const cplx s[2] = {cplx(1.0, 0.4), cplx(3.0, -0.2)};
    const auto sol = solve<cplx>(g, s[0], s[1], [](const Vec2& x) { return cplx(-x.x(), 0.3 * x.y()); });
    const auto re = real_field(sol, 0), im = real_field(sol, 1);
    const auto P = boundary::cross_powers(boundary_dataset(g, re), boundary_dataset(g, im));
    const auto st = interior_stats(g, {re, im});
    // J_re = s' E_re - s'' E_im, J_im = s'' E_re + s' E_im
    for (int k = 0; k < 2; ++k) {
        double p0 = 0.0, p1 = 0.0;
        for (int a = 0; a < 2; ++a) {
            p0 += s[a].real() * st.A[a](k, 0) - s[a].imag() * st.A[a](k, 1);
            p1 += s[a].imag() * st.A[a](k, 0) + s[a].real() * st.A[a](k, 1);
        }
        EXPECT_NEAR(P(k, 0), p0, 1e-8);
        EXPECT_NEAR(P(k, 1), p1, 1e-8);
    }
}

TEST(PerturbedPair, ZeroPerturbationIsIdentical) {
    const auto [a, b] = perturbed_pair<double>(checkerboard(16, 2), 1.0, 2.0, 0.0, 0.0, linear_bc({1.0, 0.0}));
    EXPECT_EQ(a.V, b.V);
    EXPECT_EQ(a.Jn, b.Jn);
}

TEST(PerturbedPair, RecoveredEnergiesConvergeAtFirstOrder) {
    const auto g = checkerboard(32, 4);
    const std::function<double(const Vec2&)> bc = [](const Vec2& x) { return x.x() * x.x() - x.y() * x.y() + x.y(); };
    const PhasePair p{1.0, 1.0, 1.0, 1.0, g.fraction(1), g.fraction(2)};
    double prev = 0.0;
    for (double d : {2e-2, 1e-2, 5e-3}) {
        const auto [a, b] = perturbed_pair<double>(g, 1.0, 1.0, d, -0.5 * d, bc);
        const auto st = interior_stats(g, {real_field(a)});
        const auto r = real::perturbation_criterion(boundary::average_power(boundary_dataset(a)),
                                                    boundary::average_power(boundary_dataset(b)), d, -0.5 * d,
                                                    g.area(), p);
        const double err = std::abs(r.energy1 - st.A[0](0, 0) * g.area()) + std::abs(r.energy2 - st.A[1](0, 0) * g.area());
        EXPECT_LT(err, 0.05 * st.A[0](0, 0));
        if (prev > 0.0) {
            EXPECT_GT(prev / err, 1.6);
            EXPECT_LT(prev / err, 2.4);
        }
        prev = err;
    }
}

TEST(MaximumModulus, InteriorMaximaBoundedByPhaseBoundaryOnRandomBodies) {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> U(0.2, 5.0), A(0.0, 2.0 * M_PI);
    for (int k = 0; k < 20; ++k) {
        const auto body = oracle::DiskInclusions::random(rng);
        const double s1 = U(rng), s2 = U(rng), th = A(rng);
        const Vec2 e(std::cos(th), std::sin(th));
        double prev = std::numeric_limits<double>::infinity();
        for (int n : {32, 64}) {
            const auto cm = cell_maxima(solve<double>(rasterize(n, body), s1, s2, linear_bc(e)));
            const double v = std::max(maximum_principle_violation(cm), 0.0);
            EXPECT_LE(v, 1e-12) << k << " " << n;
            EXPECT_LE(v, prev + 1e-12) << k << " " << n;
            prev = v;
        }
    }
}
