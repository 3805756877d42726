#pragma once

#include "breakdown/criteria_real.hpp"
#include "breakdown/region.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace breakdown::twobc {

/// Measured cross powers p_kl = <E_k . J_l> for two boundary conditions.
struct SplitPowers {
    double p11 = 0.0, p12 = 0.0, p22 = 0.0;
};

inline SplitPowers split_powers(const Mat2& P) {
    const double scale = P.cwiseAbs().maxCoeff();
    if (std::abs(P(0, 1) - P(1, 0)) > 1e-6 * (scale + 1e-300))
        throw Error(ErrorCode::InvalidInput, "cross powers are not symmetric");
    return {P(0, 0), 0.5 * (P(0, 1) + P(1, 0)), P(1, 1)};
}

/// Volume moments e[alpha][m] = <chi_alpha E_m> for both loadings.
struct PhaseMoments {
    std::array<std::array<Vec2, 2>, 2> e{{{Vec2::Zero(), Vec2::Zero()}, {Vec2::Zero(), Vec2::Zero()}}};

    Mat2 D(int phase) const {
        const auto& a = e[phase];
        Mat2 d;
        d << a[0].dot(a[0]), a[0].dot(a[1]), a[1].dot(a[0]), a[1].dot(a[1]);
        return d;
    }
};

inline PhaseMoments phase_moments(const MomentSet& m1, const MomentSet& m2, const PhasePair& p) {
    PhaseMoments pm;
    const auto a = real::phase_moments(m1, p);
    const auto b = real::phase_moments(m2, p);
    pm.e[0] = {a.first, b.first};
    pm.e[1] = {a.second, b.second};
    return pm;
}

/// Phase-2 unknowns from phase-1 unknowns through p_kl = sigma1 A1 + sigma2 A2.
inline Vec3 second_phase(const PhasePair& p, const SplitPowers& sp, const Vec3& v1) {
    if (p.sigma2 == 0.0) throw Error(ErrorCode::ZeroSigma2, "sigma2 must be nonzero");
    return {(sp.p11 - p.sigma1 * v1.x()) / p.sigma2, (sp.p12 - p.sigma1 * v1.y()) / p.sigma2,
            (sp.p22 - p.sigma1 * v1.z()) / p.sigma2};
}

/// S^(alpha) = [[x, y], [y, z]] - D^(alpha) / f_alpha
inline Mat2 variance_matrix(const Vec3& xyz, const Mat2& D, double f) {
    Mat2 S;
    S << xyz.x(), xyz.y(), xyz.y(), xyz.z();
    return S - D / f;
}

namespace detail {

inline Mat2 unit(int i, int j) {
    Mat2 m = Mat2::Zero();
    m(i, j) = 1.0;
    m(j, i) = 1.0;
    return m;
}

/// Affine PSD constraint on the phase-2 matrix [[x2,y2],[y2,z2]] - offset.
inline geom::PsdIneq3 phase2_psd(const PhasePair& p, const SplitPowers& sp, const Mat2& offset,
                                 std::string label) {
    geom::PsdIneq3 q;
    Mat2 base;
    base << sp.p11, sp.p12, sp.p12, sp.p22;
    q.M[0] = base / p.sigma2 - offset;
    const double k = -p.sigma1 / p.sigma2;
    q.M[1] = k * unit(0, 0);
    q.M[2] = k * unit(0, 1);
    q.M[3] = k * unit(1, 1);
    q.label = std::move(label);
    return q;
}

inline geom::PsdIneq3 phase1_psd(const Mat2& offset, std::string label) {
    geom::PsdIneq3 q;
    q.M[0] = -offset;
    q.M[1] = unit(0, 0);
    q.M[2] = unit(0, 1);
    q.M[3] = unit(1, 1);
    q.label = std::move(label);
    return q;
}

/// (p - sigma1 v) / sigma2 <= K as a linear inequality in v (coordinate i).
inline geom::LinearIneq3 phase2_upper(const PhasePair& p, double pval, double K, int i, std::string label) {
    geom::LinearIneq3 l;
    if (p.sigma2 > 0) {
        l.a[i] = -p.sigma1;
        l.c = K * p.sigma2 - pval;
    } else {
        l.a[i] = p.sigma1;
        l.c = pval - K * p.sigma2;
    }
    l.label = std::move(label);
    return l;
}

} // namespace detail

/// Thresholds bound every entry of the phase energy matrices:
/// x, y, z <= c_alpha^2 f_alpha. With tighten, also x, z >= 0 and
/// [[x,y],[y,z]] PSD for each phase (flagged as tightenings).
inline geom::Region3 compatible_prism(const PhasePair& p, const SplitPowers& sp, bool tighten = true) {
    if (p.sigma2 == 0.0) throw Error(ErrorCode::ZeroSigma2, "sigma2 must be nonzero");
    geom::Region3 r;
    r.label = tighten ? "compatible prism (tightened)" : "compatible prism";
    const double k1 = p.c1 * p.c1 * p.f1, k2 = p.c2 * p.c2 * p.f2;
    const char* names[3] = {"x", "y", "z"};
    const double pv[3] = {sp.p11, sp.p12, sp.p22};
    for (int i = 0; i < 3; ++i) {
        geom::LinearIneq3 l;
        l.a[i] = 1.0;
        l.c = k1;
        l.label = std::string("phase 1 ") + names[i] + " <= c1^2 f1";
        r.linear.push_back(l);
        r.linear.push_back(detail::phase2_upper(p, pv[i], k2, i, std::string("phase 2 ") + names[i] + " <= c2^2 f2"));
    }
    if (tighten) {
        for (int i : {0, 2}) {
            geom::LinearIneq3 l;
            l.a[i] = -1.0;
            l.c = 0.0;
            l.label = std::string("phase 1 ") + names[i] + " >= 0";
            l.tightening = true;
            r.linear.push_back(l);
            auto l2 = detail::phase2_upper(p, pv[i], 0.0, i, "");
            // (p - sigma1 v)/sigma2 >= 0  <=>  -(p - sigma1 v)/sigma2 <= 0
            l2.a = -l2.a;
            l2.c = -l2.c;
            l2.label = std::string("phase 2 ") + names[i] + " >= 0";
            l2.tightening = true;
            r.linear.push_back(l2);
        }
        auto q1 = detail::phase1_psd(Mat2::Zero(), "phase 1 energy matrix PSD");
        q1.tightening = true;
        auto q2 = detail::phase2_psd(p, sp, Mat2::Zero(), "phase 2 energy matrix PSD");
        q2.tightening = true;
        r.psd.push_back(q1);
        r.psd.push_back(q2);
    }
    return r;
}

/// Both variance matrices S^(1), S^(2) positive semidefinite.
inline geom::Region3 psd_feasible_region(const PhasePair& p, const SplitPowers& sp, const PhaseMoments& pm) {
    if (p.sigma2 == 0.0) throw Error(ErrorCode::ZeroSigma2, "sigma2 must be nonzero");
    geom::Region3 r;
    r.label = "variance PSD";
    r.psd.push_back(detail::phase1_psd(pm.D(0) / p.f1, "S1 PSD"));
    r.psd.push_back(detail::phase2_psd(p, sp, pm.D(1) / p.f2, "S2 PSD"));
    return r;
}

/// Margins of the y-free scalar consequences for one phase.
struct ScalarChecks {
    double tr11 = 0.0; // c^2 f^2 - D11
    double tr22 = 0.0;
    double product = 0.0; // (c^2 f - D11/f)(c^2 f - D22/f)
};

inline ScalarChecks scalar_checks(double c, double f, const Mat2& D) {
    ScalarChecks s;
    s.tr11 = c * c * f * f - D(0, 0);
    s.tr22 = c * c * f * f - D(1, 1);
    s.product = (c * c * f - D(0, 0) / f) * (c * c * f - D(1, 1) / f);
    return s;
}

/// Weighted determinant inequality with y2 eliminated through
/// p12 = sigma1 y1 + sigma2 y2:
///   sum w_a (y_a - d_a)^2 + w_a tau_a <= sum w_a P_a,
/// minimised over y1. Returns (sum w P) - min(rhs) and the minimiser y1.
inline std::pair<double, double> weighted_margin(const PhasePair& p, double p12, const std::array<double, 2>& P,
                                                 const std::array<double, 2>& d,
                                                 const std::array<double, 2>& tau,
                                                 const std::array<double, 2>& w) {
    const double k = -p.sigma1 / p.sigma2;
    const double m = p12 / p.sigma2 - d[1];
    const double den = w[0] + w[1] * k * k;
    double y1 = d[0];
    if (den > 0.0) y1 = (w[0] * d[0] - w[1] * k * m) / den;
    const double y2 = k * y1 + m; // (y2 - d2)
    const double rhs = w[0] * ((y1 - d[0]) * (y1 - d[0]) + tau[0]) + w[1] * (y2 * y2 + tau[1]);
    return {w[0] * P[0] + w[1] * P[1] - rhs, y1};
}

struct Certificate3 {
    CriterionVerdict verdict;
    geom::EmptinessResult<3> emptiness;
    std::array<ScalarChecks, 2> scalar{};
    double weighted_det_margin = 0.0;
};

/// Breakdown certificate: violated iff the compatible prism and the PSD
/// feasible region do not intersect.
inline Certificate3 breakdown_certificate_3d(const PhasePair& p, const SplitPowers& sp, const PhaseMoments& pm,
                                             bool tighten = true) {
    Certificate3 c;
    const auto region = geom::intersect(compatible_prism(p, sp, tighten), psd_feasible_region(p, sp, pm));
    c.emptiness = geom::is_empty(region);
    if (c.emptiness.status == geom::Emptiness::Inconclusive)
        throw Error(ErrorCode::NumericalInconclusive, "could not decide whether the prism meets the PSD region");
    const Mat2 D1 = pm.D(0), D2 = pm.D(1);
    c.scalar[0] = scalar_checks(p.c1, p.f1, D1);
    c.scalar[1] = scalar_checks(p.c2, p.f2, D2);
    c.weighted_det_margin =
        weighted_margin(p, sp.p12, {c.scalar[0].product, c.scalar[1].product},
                        {D1(0, 1) / p.f1, D2(0, 1) / p.f2}, {0.0, 0.0}, {1.0, 1.0})
            .first;
    const bool empty = c.emptiness.status == geom::Emptiness::Empty;
    double margin = c.emptiness.depth;
    if (!empty) margin = std::max(0.0, margin);
    if (empty && margin >= 0.0) margin = -geom::kSlackTol;
    c.verdict = {empty, margin, empty ? c.emptiness.binding : std::string{}};
    return c;
}

/// B12^(alpha) = <chi_alpha E1 . R_perp E2> from the two null Lagrangians.
/// The formula uses |sigma|^2 so it serves complex conductivities as well.
inline std::array<double, 2> rotation_moments(double s1sq, double s2sq, const NullLagrangians& nl) {
    if (s1sq == s2sq) throw Error(ErrorCode::EqualConductivities, "|sigma1| must differ from |sigma2|");
    const double den = s2sq - s1sq;
    return {(s2sq * nl.e_rperp_e - nl.j_rperp_j) / den, (-s1sq * nl.e_rperp_e + nl.j_rperp_j) / den};
}

/// tau^(alpha) = [B12 - <chi E1> . R_perp <chi E2> / f]^2
inline std::array<double, 2> tau(const std::array<double, 2>& B, const PhaseMoments& pm, double f1, double f2) {
    const double f[2] = {f1, f2};
    std::array<double, 2> t{};
    for (int a = 0; a < 2; ++a) {
        const double v = B[a] - cross2(pm.e[a][0], pm.e[a][1]) / f[a];
        t[a] = v * v;
    }
    return t;
}

struct Certificate2 {
    CriterionVerdict verdict;
    std::array<double, 2> tau{};
    std::array<double, 2> yfree_margin{}; // per-phase P - tau (or a negative trace factor)
    double weighted_margin = 0.0;
    double weighted_y1 = 0.0;
    std::array<double, 2> weights{1.0, 1.0};
};

/// Determinant bounds sharpened by the rotation null Lagrangian: per-phase
/// P_alpha >= tau_alpha and the weighted sum with y eliminated. With
/// optimize_weights the weighted check is maximised over w on the unit
/// quarter circle.
inline Certificate2 improved_certificate_2d(const PhasePair& p, const SplitPowers& sp, const PhaseMoments& pm,
                                            const NullLagrangians& nl, std::array<double, 2> weights = {1.0, 1.0},
                                            bool optimize_weights = false) {
    if (p.sigma2 == 0.0) throw Error(ErrorCode::ZeroSigma2, "sigma2 must be nonzero");
    Certificate2 c;
    const auto B = rotation_moments(p.sigma1 * p.sigma1, p.sigma2 * p.sigma2, nl);
    c.tau = tau(B, pm, p.f1, p.f2);
    const double cc[2] = {p.c1, p.c2}, ff[2] = {p.f1, p.f2};
    std::array<double, 2> P{}, d{};
    for (int a = 0; a < 2; ++a) {
        const Mat2 D = pm.D(a);
        const double g11 = cc[a] * cc[a] * ff[a] - D(0, 0) / ff[a];
        const double g22 = cc[a] * cc[a] * ff[a] - D(1, 1) / ff[a];
        P[a] = g11 * g22;
        d[a] = D(0, 1) / ff[a];
        c.yfree_margin[a] = std::min(g11, g22) < 0.0 ? std::min(g11, g22) : P[a] - c.tau[a];
    }
    auto eval = [&](const std::array<double, 2>& w) { return weighted_margin(p, sp.p12, P, d, c.tau, w); };
    if (optimize_weights) {
        double best = geom::kInf;
        for (int k = 0; k <= 4096; ++k) {
            const double th = 0.5 * std::numbers::pi * k / 4096.0;
            const std::array<double, 2> w{std::cos(th), std::sin(th)};
            const auto r = eval(w);
            if (r.first < best) {
                best = r.first;
                c.weights = w;
            }
        }
    } else {
        c.weights = weights;
    }
    const auto wm = eval(c.weights);
    c.weighted_margin = wm.first;
    c.weighted_y1 = wm.second;
    const double margin = std::min({c.yfree_margin[0], c.yfree_margin[1], c.weighted_margin});
    std::string which = margin == c.weighted_margin ? "weighted determinant bound"
                        : margin == c.yfree_margin[0] ? "phase 1 determinant bound"
                                                      : "phase 2 determinant bound";
    c.verdict = CriterionVerdict::from_margin(margin, which);
    return c;
}

} // namespace breakdown::twobc
