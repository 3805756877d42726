#include "breakdown/criteria_real.hpp"
#include "breakdown/e_omega.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <random>

using namespace breakdown;
using namespace breakdown::eomega;

namespace {

/// Roots of a polynomial (ascending coefficients) from its companion matrix.
std::vector<cplx> companion_roots(Poly p) {
    poly_trim(p);
    const int d = static_cast<int>(p.size()) - 1;
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 1; i < d; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) C(i, d - 1) = -p[i] / p[d];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C);
    std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + d);
    return r;
}

/// First valid generator with at least one critical point in the upper half plane.
std::optional<RationalGenerator> generator_with_critical_point(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int k = 0; k < 400; ++k) {
        const auto g = random_generator(rng);
        const auto r = validate(g);
        if (r.valid && !r.critical_t.empty()) return g;
    }
    return std::nullopt;
}

double dist_to_curve(const std::vector<Vec2>& poly, const Vec2& p) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& q : poly) d = std::min(d, (q - p).norm());
    return d;
}

} // namespace

TEST(Generator, EllipseCurveEquation) {
    for (double b : {0.5, 1.0, 2.0}) {
        const auto c = boundary_curve(ellipse_generator(b));
        double worst = 0.0;
        for (std::size_t k = 0; k < c.y.size(); ++k) {
            for (double x : {c.x_plus[k], c.x_minus[k]}) {
                worst = std::max(worst, std::abs(x * x / (b * b) + c.y[k] * c.y[k] - 1.0));
            }
        }
        EXPECT_LT(worst, 1e-10) << b;
        EXPECT_NEAR(c.x_plus[c.y.size() / 2], b, 1e-12);
    }
}

TEST(Generator, EllipseValidates) {
    for (double b : {0.5, 1.0, 2.0}) {
        const auto r = validate(ellipse_generator(b));
        EXPECT_TRUE(r.valid) << b;
        EXPECT_NEAR(r.beta1, 2.0 * b, 1e-10);
        EXPECT_NEAR(r.fprime0, 2.0 * b, 1e-12);
        EXPECT_TRUE(r.critical_t.empty());
        EXPECT_TRUE(r.failures.empty());
    }
}

TEST(Generator, EllipseArea) {
    for (double b : {0.5, 1.0, 2.0}) EXPECT_NEAR(inclusion_area(ellipse_generator(b)), std::numbers::pi * b, 1e-10);
}

TEST(Generator, RealAxisPoleRejected) {
    const RationalGenerator g{{cplx(1.0, 0.0)}, {cplx(1.0, 0.0)}, 0.0};
    try {
        g.check();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidGenerator);
    }
}

TEST(Generator, PoleAndBranchPointEvaluation) {
    const auto g = ellipse_generator(1.0);
    try {
        eval_f(g, I);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PoleEvaluation);
    }
    try {
        eval_z(g, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BranchPointEvaluation);
    }
}

TEST(Generator, EvalZMatchesParametrisation) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> U(-2.0, 2.0), V(0.05, 2.0);
    for (int k = 0; k < 20; ++k) {
        const auto g = random_generator(rng);
        const cplx t(U(rng), V(rng));
        bool near_pole = std::abs(t - I) < 0.05;
        for (const auto& p : g.poles) near_pole = near_pole || std::abs(t - p) < 0.05;
        if (near_pole) continue;
        EXPECT_LT(std::abs(eval_z(g, h_of_t(t)) - z_of_t(g, t)), 1e-10 * (1.0 + std::abs(z_of_t(g, t))));
    }
}

TEST(Validate, NegativeBeta) {
    const auto r = validate(ellipse_generator(-1.0));
    EXPECT_FALSE(r.valid);
    EXPECT_FALSE(r.beta1_ok);
}

TEST(Validate, VanishingDerivativeAtOrigin) {
    // 2t/(t^2+1) - 8t/(t^2+4): f'(0) = 2 - 2 = 0
    const RationalGenerator g{{I, 2.0 * I}, {cplx(1.0, 0.0), cplx(-4.0, 0.0)}, 0.0};
    const auto r = validate(g);
    EXPECT_NEAR(r.fprime0, 0.0, 1e-14);
    EXPECT_FALSE(r.derivative_ok);
    EXPECT_FALSE(r.valid);
}

TEST(Validate, CrossingBranches) {
    // f'(0) < 0 while beta1 > 0 forces f(t) = f(-t) for some t != 0
    const RationalGenerator g{{I, 0.5 * I}, {cplx(1.0, 0.0), cplx(-0.3, 0.0)}, 0.0};
    const auto r = validate(g);
    EXPECT_LT(r.fprime0, 0.0);
    EXPECT_GT(r.beta1, 0.0);
    EXPECT_FALSE(r.self_intersection_free);
    EXPECT_FALSE(r.valid);
}

TEST(CriticalPoints, MatchCompanionMatrixRoots) {
    std::mt19937_64 rng(42);
    int checked = 0;
    for (int k = 0; k < 40; ++k) {
        const auto g = random_generator(rng);
        const auto found = critical_points(g);
        std::vector<cplx> expect;
        for (const auto& t : companion_roots(critical_numerator(g))) {
            if (t.imag() <= 1e-8) continue;
            bool spurious = std::abs(t - I) < 1e-6;
            for (const auto& p : g.poles) spurious = spurious || std::abs(t - p) < 1e-6;
            if (!spurious) expect.push_back(t);
        }
        ASSERT_EQ(found.size(), expect.size()) << k;
        for (const auto& t : expect) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& s : found) best = std::min(best, std::abs(s - t));
            EXPECT_LT(best, 1e-8 * (1.0 + std::abs(t))) << k;
        }
        for (const auto& t : found) {
            EXPECT_LT(std::abs(dz_dt(g, t)), 1e-8 * (1.0 + std::abs(eval_df(g, t)))) << k;
            ++checked;
        }
    }
    EXPECT_GT(checked, 0);
}

TEST(AffineTransform, CurveAndGeneratorAgree) {
    std::mt19937_64 rng(43);
    for (int k = 0; k < 10; ++k) {
        const auto g = random_generator(rng);
        for (const auto& [g1, g2] : {std::pair{0.7, 0.3}, std::pair{1.5, -0.4}, std::pair{1.0, 0.0}}) {
            const auto a = affine_transform(boundary_curve(g, 257), g1, g2);
            const auto b = boundary_curve(affine_transform(g, g1, g2), 257);
            for (std::size_t i = 0; i < a.y.size(); ++i) {
                EXPECT_NEAR(a.x_plus[i], b.x_plus[i], 1e-12);
                EXPECT_NEAR(a.x_minus[i], b.x_minus[i], 1e-12);
            }
        }
    }
}

TEST(AffineTransform, NonPositiveGammaRejected) {
    try {
        affine_transform(ellipse_generator(1.0), 0.0, 0.5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateGamma);
    }
}

TEST(InverseMap, RoundTrip) {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> A(0.0, 2.0 * std::numbers::pi), R(1.05, 4.0);
    for (double b : {0.5, 1.0, 2.0}) {
        const auto g = ellipse_generator(b);
        for (int k = 0; k < 20; ++k) {
            const double a = A(rng), r = R(rng);
            const cplx z(r * b * std::cos(a), r * std::sin(a));
            const cplx t = invert_map(g, z);
            EXPECT_GT(t.imag(), 0.0);
            EXPECT_LT(std::abs(z_of_t(g, t) - z), 1e-10 * (1.0 + std::abs(z)));
        }
    }
}

TEST(Potentials, ContinuousAcrossInclusionBoundary) {
    const auto g = ellipse_generator(1.5);
    const double s = 3.0;
    for (double th : {-1.2, -0.4, 0.3, 1.0}) {
        const double x = f_theta(g, th), y = std::cos(2.0 * th);
        // step outward along the ellipse normal
        const Vec2 n = Vec2(x / 2.25, y).normalized();
        const Vec2 p = Vec2(x, y) + 1e-7 * n;
        const auto pot = exterior_potentials(g, s, cplx(p.x(), p.y()));
        EXPECT_NEAR(pot.V, x, 1e-6);
        EXPECT_NEAR(pot.W, s * y, 1e-6);
    }
}

TEST(Potentials, GradientAndHarmonicity) {
    const auto g = ellipse_generator(0.7);
    const double s = 0.4, e = 1e-4;
    for (const Vec2& p : {Vec2(1.5, 0.3), Vec2(-0.2, 1.8), Vec2(-1.1, -1.4)}) {
        auto V = [&](double dx, double dy) { return exterior_potentials(g, s, cplx(p.x() + dx, p.y() + dy)).V; };
        const auto pot = exterior_potentials(g, s, cplx(p.x(), p.y()));
        EXPECT_NEAR(pot.gradV.x(), (V(e, 0) - V(-e, 0)) / (2 * e), 1e-7);
        EXPECT_NEAR(pot.gradV.y(), (V(0, e) - V(0, -e)) / (2 * e), 1e-7);
        const double lap = (V(e, 0) + V(-e, 0) + V(0, e) + V(0, -e) - 4 * V(0, 0)) / (e * e);
        EXPECT_NEAR(lap, 0.0, 1e-4);
    }
}

TEST(Potentials, PointInsideInclusionRejected) {
    try {
        orthogonal_potentials(ellipse_generator(1.0), 2.0, {0.1, 0.2});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::PointInsideInclusion);
    }
}

TEST(Potentials, ElasticDenominator) {
    EXPECT_NEAR(elastic_sigma(1.0, 1.0, 1.0, 1.0), 1.0, 1e-15);
    try {
        elastic_sigma(1.0, 1.0, 2.0, -1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateDenominator);
    }
}

TEST(Synthesis, InteriorFieldRecoveredFromBoundaryData) {
    for (double b : {0.5, 1.0, 2.0}) {
        SynthesisOptions o;
        o.sigma1 = 3.0;
        o.sigma2 = 1.0;
        o.e0 = 0.8;
        o.radius = 3.0 + b;
        const auto s = synthesize(ellipse_generator(b), o);
        EXPECT_NEAR(s.inclusion_area, std::numbers::pi * b, 1e-10);
        const auto m = boundary::moments(s.data);
        const PhasePair p{o.sigma1, o.sigma2, o.e0, 10.0, s.f1, 1.0 - s.f1};
        const auto r = real::phase_average_criterion(m, p);
        EXPECT_NEAR(r.averages.E1.x(), o.e0, 1e-8) << b;
        EXPECT_NEAR(r.averages.E1.y(), 0.0, 1e-8) << b;
        EXPECT_LT(std::abs(r.margin1), 1e-6) << b;
    }
}

TEST(Synthesis, GeneralGeneratorSharpness) {
    const auto g = generator_with_critical_point(45);
    ASSERT_TRUE(g.has_value());
    const auto poly = curve_polygon(*g);
    Vec2 c = Vec2::Zero();
    for (const auto& p : poly) c += p;
    c /= static_cast<double>(poly.size());
    double rin = 0.0;
    for (const auto& p : poly) rin = std::max(rin, (p - c).norm());
    double rcrit = std::numeric_limits<double>::infinity();
    for (const auto& t : critical_points(*g)) {
        const cplx z = z_of_t(*g, t);
        rcrit = std::min(rcrit, (Vec2(z.real(), z.imag()) - c).norm());
    }
    if (!(rcrit > rin * 1.05)) GTEST_SKIP() << "no annulus between inclusion and critical images";
    SynthesisOptions o;
    o.center = c;
    o.radius = 0.5 * (rin + rcrit);
    const auto s = synthesize(*g, o);
    const auto m = boundary::moments(s.data);
    const auto r = real::phase_average_criterion(m, {o.sigma1, o.sigma2, o.e0, 10.0, s.f1, 1.0 - s.f1});
    EXPECT_LT(std::abs(r.margin1), 1e-6);
}

TEST(Synthesis, OmegaTooLarge) {
    const auto g = generator_with_critical_point(46);
    ASSERT_TRUE(g.has_value());
    const cplx z = z_of_t(*g, critical_points(*g).front());
    SynthesisOptions o;
    o.center = {z.real(), z.imag()};
    o.radius = 50.0;
    try {
        synthesize(*g, o);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OmegaTooLarge);
    }
}

TEST(Synthesis, CircleMustEncloseInclusion) {
    SynthesisOptions o;
    o.radius = 0.5;
    try {
        synthesize(ellipse_generator(1.0), o);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
    }
}

TEST(Synthesis, MatrixFieldMaximumOnBoundaries) {
    // the matrix field is harmonic, so interior samples never exceed the
    // reported maximum over the two boundaries
    const auto g = ellipse_generator(1.3);
    SynthesisOptions o;
    o.radius = 3.0;
    const auto s = synthesize(g, o);
    const auto poly = curve_polygon(g);
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        const Vec2 p(U(rng), U(rng));
        if (p.norm() > 2.95 || point_in_polygon(poly, p) || dist_to_curve(poly, p) < 0.02) continue;
        const auto pot = exterior_potentials(g, o.sigma1 / o.sigma2, cplx(p.x(), p.y()));
        EXPECT_LE(o.e0 * pot.gradV.norm(), s.max_matrix_field * (1.0 + 1e-9));
    }
}

TEST(RandomGenerators, SomeValidShapes) {
    std::mt19937_64 rng(48);
    int valid = 0;
    for (int k = 0; k < 60; ++k) valid += validate(random_generator(rng)).valid;
    EXPECT_GT(valid, 10);
}
