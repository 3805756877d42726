#include "breakdown/criteria_real.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace breakdown;
using namespace breakdown::real;

TEST(BreakdownOrder, EqualPhasesAreIndeterminate) {
    EXPECT_EQ(breakdown_order({1.0, 1.0, 1.0, 1.0, 0.5, 0.5}), BreakdownOrder::Indeterminate);
}

TEST(BreakdownOrder, ContrastTwoMidThreshold) {
    // c2^2 = 2.25 lies between c1^2 = 1 and (sigma1/sigma2)^2 c1^2 = 4
    EXPECT_EQ(breakdown_order({2.0, 1.0, 1.0, 1.5, 0.5, 0.5}), BreakdownOrder::Indeterminate);
}

TEST(BreakdownOrder, ClearCases) {
    EXPECT_EQ(breakdown_order({2.0, 1.0, 1.0, 2.5, 0.5, 0.5}), BreakdownOrder::Phase1First);
    EXPECT_EQ(breakdown_order({2.0, 1.0, 1.0, 0.9, 0.5, 0.5}), BreakdownOrder::Phase2First);
    EXPECT_EQ(breakdown_order({0.5, 1.0, 1.0, 1.1, 0.5, 0.5}), BreakdownOrder::Phase1First);
    EXPECT_EQ(breakdown_order({0.5, 1.0, 1.0, 0.4, 0.5, 0.5}), BreakdownOrder::Phase2First);
}

TEST(BreakdownOrder, AgreesWithLaminateFieldRatios) {
    // In a laminate loaded normal to the layers E1/E2 = sigma2/sigma1; loaded
    // along the layers E1 = E2. Which phase hits its threshold first under
    // each loading must agree with a definite verdict.
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0.2, 3.0);
    for (int k = 0; k < 500; ++k) {
        const PhasePair p{U(rng), U(rng), U(rng), U(rng), 0.5, 0.5};
        const auto order = breakdown_order(p);
        if (order == BreakdownOrder::Indeterminate) continue;
        for (const Vec2& E : {Vec2(1.0, 0.0), Vec2(0.0, 1.0)}) {
            const oracle::Laminate lam{p.sigma1, p.sigma2, 0.5, E};
            const double t1 = p.c1 / lam.field(1).norm(); // load scale at which phase 1 breaks
            const double t2 = p.c2 / lam.field(2).norm();
            if (order == BreakdownOrder::Phase1First) EXPECT_LE(t1, t2 * (1 + 1e-12));
            else EXPECT_LE(t2, t1 * (1 + 1e-12));
        }
    }
}

TEST(BoundaryField, UniformBelowThreshold) {
    auto d = oracle::uniform(boundary::circle_geometry(256, {0.0, 0.0}, 1.0), {0.3, 0.4}, 1.0);
    for (auto& s : d.samples) s.phase = 1;
    const auto r = boundary_field_criterion(d, {1.0, 2.0, 1.0, 1.0, 0.5, 0.5});
    EXPECT_FALSE(r.verdict.violated);
    EXPECT_NEAR(r.verdict.margin, 0.5, 1e-4);
}

TEST(BoundaryField, UniformAboveThresholdEverywhere) {
    auto d = oracle::uniform(boundary::circle_geometry(256, {0.0, 0.0}, 1.0), {1.2, 0.0}, 1.0);
    for (auto& s : d.samples) s.phase = 1;
    const auto r = boundary_field_criterion(d, {1.0, 2.0, 1.0, 5.0, 0.5, 0.5});
    EXPECT_TRUE(r.verdict.violated);
    for (double m : r.margin) EXPECT_LT(m, 0.0);
}

TEST(BoundaryField, LaminateJustBelowThreshold) {
    const oracle::Laminate lam{1.0, 2.0, 0.5, {1.0, 0.5}};
    const auto d = lam.dataset(200);
    const double c = lam.max_field() * (1.0 + 1e-3);
    const auto r = boundary_field_criterion(d, {1.0, 2.0, c, c, 0.5, 0.5});
    EXPECT_FALSE(r.verdict.violated);
    EXPECT_NEAR(r.field_magnitude[r.worst_index], lam.max_field(), 1e-8);
}

TEST(BoundaryField, MissingPhaseLabel) {
    const auto d = oracle::uniform(boundary::circle_geometry(16, {0.0, 0.0}, 1.0), {1.0, 0.0}, 1.0);
    try {
        boundary_field_criterion(d, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownBoundaryPhase);
    }
}

TEST(PhaseAverages, CurrentMatchingMatrix) {
    const PhasePair p{3.0, 2.0, 1.0, 1.0, 0.25, 0.75};
    const MomentSet m{{1.0, 0.0}, {2.0, 0.0}, 0.0};
    const auto a = phase_averages(m, p);
    EXPECT_NEAR(a.E1.norm(), 0.0, 1e-15);
    EXPECT_NEAR(a.E2.x(), 1.0 / p.f2, 1e-15);
    // f1 <E>_1 + f2 <E>_2 = <E> and sigma1 f1 <E>_1 + sigma2 f2 <E>_2 = <J>
    EXPECT_NEAR((p.f1 * a.E1 + p.f2 * a.E2 - m.E).norm(), 0.0, 1e-15);
    EXPECT_NEAR((p.sigma1 * p.f1 * a.E1 + p.sigma2 * p.f2 * a.E2 - m.J).norm(), 0.0, 1e-15);
}

TEST(PhaseAverages, ZeroMoments) {
    const auto a = phase_averages({}, {1.0, 2.0, 1.0, 1.0, 0.5, 0.5});
    EXPECT_EQ(a.E1.norm(), 0.0);
    EXPECT_EQ(a.E2.norm(), 0.0);
}

TEST(PhaseAverages, LaminateLayerFields) {
    for (const Vec2& E : {Vec2(1.0, 0.0), Vec2(0.3, -0.8)}) {
        const oracle::Laminate lam{1.0, 2.0, 0.5, E};
        const auto m = boundary::moments(lam.dataset(200));
        const auto a = phase_averages(m, {1.0, 2.0, 1.0, 1.0, 0.5, 0.5});
        EXPECT_NEAR((a.E1 - lam.field(1)).norm(), 0.0, 1e-8);
        EXPECT_NEAR((a.E2 - lam.field(2)).norm(), 0.0, 1e-8);
    }
}

TEST(PhaseAverages, EqualConductivitiesRejected) {
    try {
        phase_averages({}, {1.0, 1.0, 1.0, 1.0, 0.5, 0.5});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EqualConductivities);
    }
}

TEST(PhaseAverageCriterion, Margins) {
    const PhasePair p{2.0, 1.0, 1.0, 1.0, 0.5, 0.5};
    // <E>_1 = 0 when <J> = sigma2 <E>
    auto r = phase_average_criterion({{0.4, 0.0}, {0.4, 0.0}, 0.0}, p);
    EXPECT_DOUBLE_EQ(r.margin1, p.c1);
    EXPECT_FALSE(r.verdict.violated);
    // <E>_2 = (2 c2, 0): f2 <E>_2 = <E> - f1 <E>_1 with <E>_1 = 0
    r = phase_average_criterion({{1.0, 0.0}, {1.0, 0.0}, 0.0}, p);
    EXPECT_NEAR(r.averages.E2.x(), 2.0 * p.c2, 1e-15);
    EXPECT_TRUE(r.verdict.violated);
    EXPECT_EQ(r.verdict.which, "phase 2 average");
}

TEST(PowerCriterion, Margins) {
    const PhasePair p{2.0, 1.0, 1.0, 0.5, 0.5, 0.5};
    const double budget = 2.0 * 0.5 + 1.0 * 0.25 * 0.5;
    EXPECT_DOUBLE_EQ(power_criterion({{}, {}, 0.0}, p).margin, budget);
    // homogeneous sigma with |E| = c everywhere: power equals the budget
    const PhasePair h{1.5, 1.5, 0.8, 0.8, 0.3, 0.7};
    const auto d = oracle::uniform(boundary::circle_geometry(1024, {0.0, 0.0}, 1.0), {0.8, 0.0}, 1.5);
    EXPECT_NEAR(power_criterion(boundary::moments(d), h).margin, 0.0, 1e-4);
}

TEST(PowerCriterion, LaminateBelowThreshold) {
    const oracle::Laminate lam{1.0, 2.0, 0.5, {1.0, 0.0}};
    const PhasePair p{1.0, 2.0, 1.5, 1.5, 0.5, 0.5};
    const double exact = (p.sigma1 * p.f1 + p.sigma2 * p.f2) * 2.25 - lam.power();
    const auto v = power_criterion(boundary::moments(lam.dataset(200)), p);
    EXPECT_FALSE(v.violated);
    EXPECT_NEAR(v.margin, exact, 1e-8);
}

TEST(Perturbation, ProportionalPerturbationIsSingular) {
    try {
        perturbation_criterion(1.0, 1.1, 0.1, 0.2, 1.0, {1.0, 2.0, 1.0, 1.0, 0.5, 0.5});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularPerturbation);
    }
}

TEST(Perturbation, HomogeneousBodyRecoversPhaseEnergies) {
    const PhasePair p{1.0, 1.0, 1.0, 1.0, 0.5, 0.5};
    const double area = 2.0;
    // |E| = 1: int over each phase of |E|^2 = area / 2
    const double W1 = area / 2.0, W2 = area / 2.0;
    const double base = (p.sigma1 * W1 + p.sigma2 * W2) / area;
    const double perturbed = ((p.sigma1 + 0.1) * W1 + (p.sigma2 + 0.2) * W2) / area;
    const auto r = perturbation_criterion(base, perturbed, 0.1, 0.2, area, p);
    EXPECT_NEAR(r.energy1, W1, 1e-12);
    EXPECT_NEAR(r.energy2, W2, 1e-12);
    EXPECT_NEAR(r.margin1, 0.0, 1e-12);
}

TEST(Perturbation, ExcessEnergyViolatesPhaseOne) {
    const PhasePair p{1.0, 2.0, 0.5, 5.0, 0.5, 0.5};
    const double W1 = 1.0, W2 = 0.2;
    const double base = p.sigma1 * W1 + p.sigma2 * W2;
    const double perturbed = (p.sigma1 + 0.3) * W1 + (p.sigma2 - 0.1) * W2;
    const auto r = perturbation_criterion(base, perturbed, 0.3, -0.1, 1.0, p);
    EXPECT_NEAR(r.energy1, W1, 1e-12);
    EXPECT_TRUE(r.verdict.violated);
    EXPECT_EQ(r.verdict.which, "phase 1 energy");
}
