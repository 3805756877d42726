#pragma once

#include "breakdown/boundary_data.hpp"
#include "breakdown/region.hpp"

#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <optional>

namespace breakdown::elastic {

/// Isotropic two-phase elastic body: bulk kappa, shear mu (2D), yield
/// thresholds k on eps2^2 + eps3^2 (squared deviatoric strain).
struct ElasticPair {
    double kappa1 = 1.0, kappa2 = 1.0;
    double mu1 = 1.0, mu2 = 1.0;
    double f1 = 0.5, f2 = 0.5;
    double k1 = 0.0, k2 = 0.0;
    std::optional<double> lambda1, lambda2;
};

/// tau = mu (grad u + grad u^T) + (kappa - mu) tr(grad u) I
inline Mat2 stress(const Mat2& grad, double kappa, double mu) {
    return mu * (grad + grad.transpose()) + (kappa - mu) * grad.trace() * Mat2::Identity();
}

/// Von Mises type invariant tau2^2 + tau3^2 of a symmetric stress.
inline double vmt(const Mat2& tau) {
    const auto v = boundary::basis_coordinates(tau);
    return v[2] * v[2] + v[3] * v[3];
}

/// Energies split into bulk and shear parts of each phase:
/// E1b = 2 kappa1 <chi1 eps1^2>, E1s = 2 mu1 <chi1 (eps2^2 + eps3^2)>, etc.
struct EnergySplit {
    double E1b = 0.0, E1s = 0.0, E2b = 0.0, E2s = 0.0;
};

inline void check_moduli(const ElasticPair& p) {
    if (p.kappa2 + p.mu2 == 0.0) throw Error(ErrorCode::DegenerateDenominator, "kappa2 + mu2 = 0");
}

/// Phase-2 energies from phase-1 energies and the measured E = <tau . grad u>,
/// a = <det tau>.
inline std::pair<double, double> complete_split(double E1b, double E1s, double E, double a, const ElasticPair& p) {
    check_moduli(p);
    const double den = p.kappa2 + p.mu2;
    const double E2b = (a + E * p.mu2 - E1b * (p.kappa1 + p.mu2) + E1s * (p.mu1 - p.mu2)) / den;
    const double E2s = ((p.kappa1 - p.kappa2) * E1b - (p.mu1 + p.kappa2) * E1s - a + E * p.kappa2) / den;
    return {E2b, E2s};
}

/// Lower-bound anchors from the mean strain and stress:
/// A_b = 2 kappa <chi eps1>^2, A_s = 2 mu (<chi eps2>^2 + <chi eps3>^2).
struct Anchors {
    double A1b = 0.0, A1s = 0.0, A2b = 0.0, A2s = 0.0;
    Eigen::Vector4d chi1_eps = Eigen::Vector4d::Zero(); // <chi1 eps_k>, k = 0..3
    Eigen::Vector4d chi2_eps = Eigen::Vector4d::Zero();
};

inline Anchors lower_bound_anchors(const Mat2& mean_grad, const Mat2& mean_stress, const ElasticPair& p) {
    if (p.kappa1 == p.kappa2 || p.mu1 == p.mu2)
        throw Error(ErrorCode::EqualModuli, "phase moduli must differ");
    const auto e = boundary::basis_coordinates(mean_grad);
    const auto t = boundary::basis_coordinates(0.5 * (mean_stress + mean_stress.transpose()));
    Anchors A;
    A.chi1_eps[1] = (2.0 * p.kappa2 * e[1] - t[1]) / (2.0 * (p.kappa2 - p.kappa1));
    A.chi2_eps[1] = (2.0 * p.kappa1 * e[1] - t[1]) / (2.0 * (p.kappa1 - p.kappa2));
    for (int j : {2, 3}) {
        A.chi1_eps[j] = (2.0 * p.mu2 * e[j] - t[j]) / (2.0 * (p.mu2 - p.mu1));
        A.chi2_eps[j] = (2.0 * p.mu1 * e[j] - t[j]) / (2.0 * (p.mu1 - p.mu2));
    }
    A.A1b = 2.0 * p.kappa1 * A.chi1_eps[1] * A.chi1_eps[1];
    A.A2b = 2.0 * p.kappa2 * A.chi2_eps[1] * A.chi2_eps[1];
    A.A1s = 2.0 * p.mu1 * (A.chi1_eps[2] * A.chi1_eps[2] + A.chi1_eps[3] * A.chi1_eps[3]);
    A.A2s = 2.0 * p.mu2 * (A.chi2_eps[2] * A.chi2_eps[2] + A.chi2_eps[3] * A.chi2_eps[3]);
    return A;
}

/// Swap phase labels so that phase-2 analysis reuses the phase-1 formulas.
inline ElasticPair swapped(const ElasticPair& p) {
    ElasticPair q = p;
    std::swap(q.kappa1, q.kappa2);
    std::swap(q.mu1, q.mu2);
    std::swap(q.f1, q.f2);
    std::swap(q.k1, q.k2);
    std::swap(q.lambda1, q.lambda2);
    return q;
}

inline Anchors swapped(const Anchors& a) {
    Anchors b = a;
    std::swap(b.A1b, b.A2b);
    std::swap(b.A1s, b.A2s);
    std::swap(b.chi1_eps, b.chi2_eps);
    return b;
}

/// Feasible (E1b, E1s) region: Cauchy-Schwarz lower bounds for all four
/// energies plus the bound c >= sum E_b/(4 kappa) - E_s/(4 mu) with phase 2
/// eliminated.
inline geom::Region2 feasible_region(double E, double a, double c, const Anchors& A, const ElasticPair& p) {
    check_moduli(p);
    const double den = p.kappa2 + p.mu2;
    geom::Region2 r;
    r.label = "feasible energies";
    r.linear.push_back({-1.0, 0.0, -A.A1b / p.f1, "E1b >= A1b/f1"});
    r.linear.push_back({0.0, -1.0, -A.A1s / p.f1, "E1s >= A1s/f1"});
    // E2b(E1b, E1s) >= A2b/f2
    r.linear.push_back({(p.kappa1 + p.mu2) / den, -(p.mu1 - p.mu2) / den,
                        (a + E * p.mu2) / den - A.A2b / p.f2, "E2b >= A2b/f2"});
    // E2s(E1b, E1s) >= A2s/f2
    r.linear.push_back({-(p.kappa1 - p.kappa2) / den, (p.mu1 + p.kappa2) / den,
                        (E * p.kappa2 - a) / den - A.A2s / p.f2, "E2s >= A2s/f2"});
    // 4 kappa2 mu2 c >= E(mu2-kappa2) - (E1b/kappa1)(mu2+kappa1)(kappa1-kappa2)
    //                   + (E1s/mu1)(mu1+kappa2)(mu1-mu2) + a
    r.linear.push_back({-(p.mu2 + p.kappa1) * (p.kappa1 - p.kappa2) / p.kappa1,
                        (p.mu1 + p.kappa2) * (p.mu1 - p.mu2) / p.mu1,
                        4.0 * p.kappa2 * p.mu2 * c - E * (p.mu2 - p.kappa2) - a, "determinant bound on c"});
    return r;
}

/// E1s <= 2 mu1 f1 k1
inline geom::Region2 compatible_region(const ElasticPair& p) {
    geom::Region2 r;
    r.label = "compatible";
    r.linear.push_back({0.0, 1.0, 2.0 * p.mu1 * p.f1 * p.k1, "E1s <= 2 mu1 f1 k1"});
    return r;
}

struct YieldCertificate {
    CriterionVerdict verdict;   // combined
    CriterionVerdict phase1;    // analysis in (E1b, E1s)
    CriterionVerdict phase2;    // mirrored analysis in (E2b, E2s)
    geom::EmptinessResult<2> emptiness1, emptiness2;
};

namespace detail {
inline CriterionVerdict region_verdict(const geom::EmptinessResult<2>& e, const char* which) {
    if (e.status == geom::Emptiness::Inconclusive)
        throw Error(ErrorCode::NumericalInconclusive, "yield region test inconclusive");
    const bool empty = e.status == geom::Emptiness::Empty;
    double m = empty ? std::min(e.depth, -geom::kSlackTol) : std::max(0.0, e.depth);
    if (!std::isfinite(m)) m = empty ? -1.0 : 1.0;
    return {empty, m, empty ? which : ""};
}
} // namespace detail

/// Violated iff some phase cannot keep its shear energy within the yield
/// budget while matching the measured E, a and c.
inline YieldCertificate yield_certificate(double E, double a, double c, const Anchors& A, const ElasticPair& p) {
    YieldCertificate y;
    y.emptiness1 = geom::is_empty(geom::intersect(feasible_region(E, a, c, A, p), compatible_region(p)));
    const auto q = swapped(p);
    y.emptiness2 =
        geom::is_empty(geom::intersect(feasible_region(E, a, c, swapped(A), q), compatible_region(q)));
    y.phase1 = detail::region_verdict(y.emptiness1, "phase 1 yield");
    y.phase2 = detail::region_verdict(y.emptiness2, "phase 2 yield");
    y.verdict = y.phase1.margin <= y.phase2.margin ? y.phase1 : y.phase2;
    y.verdict.violated = y.phase1.violated || y.phase2.violated;
    return y;
}

/// Complex perturbation of all moduli: delta E = sum (delta kappa/kappa) E_b
/// + (delta mu/mu) E_s. Together with E and a this gives four real equations.
struct ViscoelasticInput {
    double E = 0.0, a = 0.0;
    cplx dE;
    cplx dkappa1, dkappa2, dmu1, dmu2;
};

inline Eigen::Matrix4d viscoelastic_matrix(const ViscoelasticInput& in, const ElasticPair& p) {
    // unknown order: E1b, E1s, E2b, E2s
    Eigen::Matrix4d M;
    const cplx r1b = in.dkappa1 / p.kappa1, r1s = in.dmu1 / p.mu1;
    const cplx r2b = in.dkappa2 / p.kappa2, r2s = in.dmu2 / p.mu2;
    M << 1.0, 1.0, 1.0, 1.0, p.kappa1, -p.mu1, p.kappa2, -p.mu2, r1b.real(), r1s.real(), r2b.real(), r2s.real(),
        r1b.imag(), r1s.imag(), r2b.imag(), r2s.imag();
    return M;
}

inline EnergySplit viscoelastic_solve(const ViscoelasticInput& in, const ElasticPair& p) {
    const Eigen::Matrix4d M = viscoelastic_matrix(in, p);
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto s = svd.singularValues();
    if (!(s[3] > 0.0) || s[0] / s[3] > 1e12)
        throw Error(ErrorCode::DegeneratePerturbation, "perturbation does not separate the four energies");
    const Eigen::Vector4d rhs(in.E, in.a, in.dE.real(), in.dE.imag());
    const Eigen::Vector4d x = svd.solve(rhs);
    return {x[0], x[1], x[2], x[3]};
}

inline Eigen::Vector4d viscoelastic_forward(const EnergySplit& e, const ViscoelasticInput& in, const ElasticPair& p) {
    return viscoelastic_matrix(in, p) * Eigen::Vector4d(e.E1b, e.E1s, e.E2b, e.E2s);
}

} // namespace breakdown::elastic
