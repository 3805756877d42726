#pragma once

#include "breakdown/boundary_data.hpp"
#include "breakdown/region.hpp"
#include "breakdown/two_bc.hpp"

#include <cmath>
#include <numbers>
#include <optional>

namespace breakdown::cplx_qs {

using CVec2 = Eigen::Vector2cd;

/// A time-harmonic field E(t) = E1 cos(wt) + E2 sin(wt) traces an ellipse.
struct EllipseInvariants {
    double phase = 0.0; // w t0, in (-pi/4, pi/4]
    double t0 = 0.0;
    Vec2 E1p = Vec2::Zero(); // field at time t0
    Vec2 E2p = Vec2::Zero(); // field a quarter period later
    double axis1 = 0.0, axis2 = 0.0;
    double intensity = 0.0; // |E1|^2 + |E2|^2
};

inline EllipseInvariants ellipse_invariants(const Vec2& E1, const Vec2& E2, double omega = 1.0) {
    EllipseInvariants r;
    const double num = 2.0 * E1.dot(E2);
    const double den = E1.squaredNorm() - E2.squaredNorm();
    double two = 0.0;
    if (den != 0.0) two = std::atan(num / den);
    else if (num != 0.0) two = 0.5 * std::numbers::pi;
    r.phase = 0.5 * two;
    r.t0 = omega != 0.0 ? r.phase / omega : 0.0;
    const double c = std::cos(r.phase), s = std::sin(r.phase);
    r.E1p = c * E1 + s * E2;
    r.E2p = c * E2 - s * E1;
    r.axis1 = r.E1p.norm();
    r.axis2 = r.E2p.norm();
    r.intensity = E1.squaredNorm() + E2.squaredNorm();
    return r;
}

/// Time average of j . e over a period for J = sigma E: sigma_real I / 2.
inline double time_averaged_dissipation(double sigma_real, const Vec2& E1, const Vec2& E2) {
    return 0.5 * sigma_real * (E1.squaredNorm() + E2.squaredNorm());
}

/// Boundary measurements of one complex potential, split into its real and
/// imaginary parts (each a real dataset with the same geometry).
struct ComplexMeasurement {
    MomentSet re, im;
    Mat2 P = Mat2::Zero(); // P(k,l) = <E_k . J_l>, k,l in {re, im}
    NullLagrangians nl;
};

inline ComplexMeasurement measure(const BoundaryDataset& re, const BoundaryDataset& im) {
    ComplexMeasurement m;
    m.re = boundary::moments(re);
    m.im = boundary::moments(im);
    m.P = boundary::cross_powers(re, im);
    m.nl = boundary::null_lagrangians(re, im);
    return m;
}

/// <chi_alpha E> split into real (index 0) and imaginary (index 1) parts.
inline twobc::PhaseMoments phase_moments(const ComplexMeasurement& m, const ComplexPhasePair& p) {
    if (p.sigma1 == p.sigma2) throw Error(ErrorCode::EqualConductivities, "sigma1 must differ from sigma2");
    const CVec2 E(cplx(m.re.E.x(), m.im.E.x()), cplx(m.re.E.y(), m.im.E.y()));
    const CVec2 J(cplx(m.re.J.x(), m.im.J.x()), cplx(m.re.J.y(), m.im.J.y()));
    const CVec2 e1 = (J - p.sigma2 * E) / (p.sigma1 - p.sigma2);
    const CVec2 e2 = (J - p.sigma1 * E) / (p.sigma2 - p.sigma1);
    twobc::PhaseMoments pm;
    pm.e[0] = {e1.real(), e1.imag()};
    pm.e[1] = {e2.real(), e2.imag()};
    return pm;
}

/// Coefficients of the closed-form split; sigma^(alpha) = s_r + i s_i.
struct SplitCoefficients {
    double beta = 0.0, gamma = 0.0, psi1 = 0.0, psi2 = 0.0;
    double xi1 = 0.0, xi2 = 0.0, eta1 = 0.0, eta2 = 0.0;
};

inline SplitCoefficients split_coefficients(const ComplexPhasePair& p, const Mat2& P, double tol = 1e-14) {
    const double r1 = p.sigma1.real(), i1 = p.sigma1.imag();
    const double r2 = p.sigma2.real(), i2 = p.sigma2.imag();
    SplitCoefficients k;
    k.beta = r1 * i2 - i1 * r2;
    if (!(std::abs(k.beta) > tol * std::norm(p.sigma1) + tol * std::norm(p.sigma2)) || k.beta == 0.0)
        throw Error(ErrorCode::SingularBeta, "phase conductivities are real multiples of each other");
    const double p11 = P(0, 0), p12 = P(0, 1), p21 = P(1, 0), p22 = P(1, 1);
    k.gamma = (r1 * r2 + i1 * i2) / k.beta;
    k.psi1 = std::norm(p.sigma2) / k.beta;
    k.psi2 = std::norm(p.sigma1) / k.beta;
    k.xi1 = (i2 * p12 + r2 * p11) / k.beta;
    k.xi2 = (i1 * p12 + r1 * p11) / k.beta;
    k.eta1 = (r2 * (p21 - p12) + i2 * (p11 + p22)) / k.beta;
    k.eta2 = (r1 * (p12 - p21) - i1 * (p11 + p22)) / k.beta;
    return k;
}

/// Phase energy moments A_ik^(alpha) = <chi_alpha E_i . E_k> with the free
/// pair x = A11^(1), y = A11^(2).
struct SplitSolution {
    double A11_1 = 0.0, A11_2 = 0.0;
    double A21_1 = 0.0, A21_2 = 0.0;
    double A22_1 = 0.0, A22_2 = 0.0;
};

inline SplitSolution split_solve(const SplitCoefficients& k, double x, double y) {
    SplitSolution s;
    s.A11_1 = x;
    s.A11_2 = y;
    s.A21_1 = k.xi1 - k.gamma * x - k.psi1 * y;
    s.A21_2 = k.psi2 * x + k.gamma * y - k.xi2;
    s.A22_1 = k.eta1 - x;
    s.A22_2 = k.eta2 - y;
    return s;
}

/// Powers <E_i . J_k> produced by given phase energy moments.
inline Mat2 forward_powers(const ComplexPhasePair& p, const SplitSolution& s) {
    const double r1 = p.sigma1.real(), i1 = p.sigma1.imag();
    const double r2 = p.sigma2.real(), i2 = p.sigma2.imag();
    Mat2 P;
    P(0, 0) = r1 * s.A11_1 - i1 * s.A21_1 + r2 * s.A11_2 - i2 * s.A21_2;
    P(0, 1) = i1 * s.A11_1 + r1 * s.A21_1 + i2 * s.A11_2 + r2 * s.A21_2;
    P(1, 0) = r1 * s.A21_1 - i1 * s.A22_1 + r2 * s.A21_2 - i2 * s.A22_2;
    P(1, 1) = i1 * s.A21_1 + r1 * s.A22_1 + i2 * s.A21_2 + r2 * s.A22_2;
    return P;
}

/// Per-phase intensity bounds A11 + A22 <= f c^2 together with x, y >= 0.
/// Since A22^(alpha) = eta^(alpha) - A11^(alpha), each bound has zero
/// coefficients in (x, y) and acts as the constant test eta <= f c^2.
inline geom::Region2 compatible_region(const ComplexPhasePair& p, const SplitCoefficients& k) {
    geom::Region2 r;
    r.label = "compatible";
    r.linear.push_back({0.0, 0.0, p.f1 * p.c1 * p.c1 - k.eta1, "phase 1 intensity <= f1 c1^2"});
    r.linear.push_back({0.0, 0.0, p.f2 * p.c2 * p.c2 - k.eta2, "phase 2 intensity <= f2 c2^2"});
    r.linear.push_back({-1.0, 0.0, 0.0, "x >= 0", true});
    r.linear.push_back({0.0, -1.0, 0.0, "y >= 0", true});
    return r;
}

/// Variance matrices in the (x, y) plane:
/// S1 = [[x - a1, s1], [s1, eta1 - x - b1]], S2 likewise in y.
struct VarianceForms {
    geom::Affine2 diag11[2], diag22[2], offdiag[2];
};

inline VarianceForms variance_forms(const ComplexPhasePair& p, const SplitCoefficients& k,
                                    const twobc::PhaseMoments& pm) {
    const double f[2] = {p.f1, p.f2};
    double a[2], b[2], d[2];
    for (int al = 0; al < 2; ++al) {
        a[al] = pm.e[al][0].squaredNorm() / f[al];
        b[al] = pm.e[al][1].squaredNorm() / f[al];
        d[al] = pm.e[al][0].dot(pm.e[al][1]) / f[al];
    }
    VarianceForms v;
    v.diag11[0] = {1.0, 0.0, -a[0]};
    v.diag22[0] = {-1.0, 0.0, k.eta1 - b[0]};
    v.offdiag[0] = {-k.gamma, -k.psi1, k.xi1 - d[0]};
    v.diag11[1] = {0.0, 1.0, -a[1]};
    v.diag22[1] = {0.0, -1.0, k.eta2 - b[1]};
    v.offdiag[1] = {k.psi2, k.gamma, -k.xi2 - d[1]};
    return v;
}

inline Mat2 variance_at(const VarianceForms& v, int phase, const Vec2& xy) {
    Mat2 S;
    const double o = geom::eval_affine(v.offdiag[phase], xy);
    S << geom::eval_affine(v.diag11[phase], xy), o, o, geom::eval_affine(v.diag22[phase], xy);
    return S;
}

/// det S^(alpha) >= tau^(alpha) for both phases, with the diagonal entries of
/// S nonnegative. tau defaults to zero.
inline geom::Region2 feasible_ellipses(const ComplexPhasePair& p, const SplitCoefficients& k,
                                       const twobc::PhaseMoments& pm,
                                       std::optional<std::array<double, 2>> tau = std::nullopt) {
    const auto v = variance_forms(p, k, pm);
    geom::Region2 r;
    r.label = tau ? "feasible (rotation-sharpened)" : "feasible";
    for (int al = 0; al < 2; ++al) {
        geom::QuadraticIneq2 q;
        q.M = geom::product_form(v.diag11[al], v.diag22[al]) - geom::product_form(v.offdiag[al], v.offdiag[al]);
        if (tau) q.M(2, 2) -= (*tau)[al];
        q.label = al == 0 ? "det S1 >= tau1" : "det S2 >= tau2";
        r.quadratic.push_back(q);
        const std::string ph = al == 0 ? "S1" : "S2";
        r.linear.push_back({-v.diag11[al][0], -v.diag11[al][1], v.diag11[al][2], ph + " (1,1) >= 0"});
        r.linear.push_back({-v.diag22[al][0], -v.diag22[al][1], v.diag22[al][2], ph + " (2,2) >= 0"});
    }
    return r;
}

/// tau^(alpha) from the rotation null Lagrangians, using |sigma|^2.
inline std::array<double, 2> tau(const ComplexPhasePair& p, const ComplexMeasurement& m,
                                 const twobc::PhaseMoments& pm) {
    const auto B = twobc::rotation_moments(std::norm(p.sigma1), std::norm(p.sigma2), m.nl);
    return twobc::tau(B, pm, p.f1, p.f2);
}

struct Certificate {
    CriterionVerdict verdict;
    geom::EmptinessResult<2> emptiness;
};

/// Violated iff the compatible and feasible regions do not meet.
inline Certificate nonlinearity_certificate(const geom::Region2& compat, const geom::Region2& feas) {
    Certificate c;
    c.emptiness = geom::is_empty(geom::intersect(compat, feas));
    if (c.emptiness.status == geom::Emptiness::Inconclusive)
        throw Error(ErrorCode::NumericalInconclusive, "could not decide whether the regions meet");
    const bool empty = c.emptiness.status == geom::Emptiness::Empty;
    double margin = empty ? std::min(c.emptiness.depth, -geom::kSlackTol) : std::max(0.0, c.emptiness.depth);
    if (!std::isfinite(margin)) margin = empty ? -1.0 : 1.0;
    c.verdict = {empty, margin, empty ? c.emptiness.binding : std::string{}};
    return c;
}

} // namespace breakdown::cplx_qs
