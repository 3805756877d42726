#pragma once

#include "breakdown/core.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace breakdown {

/// One quadrature node on a closed boundary. The node sits at the center of a
/// boundary element of length ds; consecutive nodes are adjacent elements,
/// ordered counterclockwise, with n the outward normal.
struct BoundarySample {
    Vec2 x = Vec2::Zero();
    Vec2 n = Vec2::Zero();
    Vec2 t = Vec2::Zero();
    double ds = 0.0;
    double V = 0.0;
    double JdotN = 0.0;
    std::optional<Vec2> u;
    std::optional<Vec2> traction;
    int phase = 0; // 1 or 2 when known, 0 otherwise
};

struct BoundaryDataset {
    std::vector<BoundarySample> samples;
    double area = 0.0;
    std::string label;
};

struct MomentSet {
    Vec2 E = Vec2::Zero();
    Vec2 J = Vec2::Zero();
    double power = 0.0;
};

struct NullLagrangians {
    double e_rperp_e = 0.0; // <E1 . R_perp E2>
    double j_rperp_j = 0.0; // <J1 . R_perp J2>
};

struct ElasticMoments {
    double E = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double F0 = 0.0;
    Mat2 mean_grad = Mat2::Zero();   // (grad u)_ij = d u_j / d x_i
    Mat2 mean_stress = Mat2::Zero();
};

namespace boundary {

inline constexpr double kDefaultFluxTolerance = 1e-9;

inline void validate(const BoundaryDataset& d) {
    if (d.samples.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no samples");
    if (d.samples.size() < 3)
        throw Error(ErrorCode::InsufficientSamples, "need at least 3 boundary samples");
    if (!(d.area > 0.0)) throw Error(ErrorCode::NonpositiveArea, "domain area must be positive");
    for (const auto& s : d.samples)
        if (!(s.ds > 0.0)) throw Error(ErrorCode::InvalidInput, "arc weight must be positive");
}

inline void check_same_geometry(const BoundaryDataset& a, const BoundaryDataset& b) {
    if (a.samples.size() != b.samples.size())
        throw Error(ErrorCode::GeometryMismatch, "sample counts differ");
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const Vec2& p = a.samples[i].x;
        const Vec2& q = b.samples[i].x;
        if ((p - q).norm() > 1e-12 * (1.0 + p.norm()))
            throw Error(ErrorCode::GeometryMismatch, "sample positions differ at index " + std::to_string(i));
    }
    if (std::abs(a.area - b.area) > 1e-12 * a.area)
        throw Error(ErrorCode::GeometryMismatch, "domain areas differ");
}

/// <E> = (1/|Omega|) oint -V n ds
inline Vec2 average_field(const BoundaryDataset& d) {
    validate(d);
    Vec2 acc = Vec2::Zero();
    for (const auto& s : d.samples) acc -= s.V * s.n * s.ds;
    return acc / d.area;
}

inline double net_flux(const BoundaryDataset& d) {
    double acc = 0.0;
    for (const auto& s : d.samples) acc += s.JdotN * s.ds;
    return acc;
}

inline void check_flux(const BoundaryDataset& d, double tol = kDefaultFluxTolerance) {
    double scale = 0.0;
    for (const auto& s : d.samples) scale += std::abs(s.JdotN) * s.ds;
    const double net = net_flux(d);
    if (std::abs(net) > tol * scale + 1e-300)
        throw Error(ErrorCode::FluxNotConserved,
                    "net boundary flux " + std::to_string(net) + " exceeds tolerance");
}

/// <J> = (1/|Omega|) oint x (J.n) ds; requires zero net flux.
inline Vec2 average_current(const BoundaryDataset& d, double flux_tol = kDefaultFluxTolerance) {
    validate(d);
    check_flux(d, flux_tol);
    Vec2 acc = Vec2::Zero();
    for (const auto& s : d.samples) acc += s.x * s.JdotN * s.ds;
    return acc / d.area;
}

/// <J.E> = -(1/|Omega|) oint V (J.n) ds
inline double average_power(const BoundaryDataset& d) {
    validate(d);
    double acc = 0.0;
    for (const auto& s : d.samples) acc -= s.V * s.JdotN * s.ds;
    return acc / d.area;
}

inline MomentSet moments(const BoundaryDataset& d, double flux_tol = kDefaultFluxTolerance) {
    return {average_field(d), average_current(d, flux_tol), average_power(d)};
}

/// P(k,l) = <E_k . J_l> = -(1/|Omega|) oint V_k (J_l . n) ds
inline Mat2 cross_powers(const BoundaryDataset& d1, const BoundaryDataset& d2) {
    validate(d1);
    validate(d2);
    check_same_geometry(d1, d2);
    const BoundaryDataset* d[2] = {&d1, &d2};
    Mat2 P = Mat2::Zero();
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
            double acc = 0.0;
            for (std::size_t i = 0; i < d1.samples.size(); ++i)
                acc -= d[k]->samples[i].V * d[l]->samples[i].JdotN * d1.samples[i].ds;
            P(k, l) = acc / d1.area;
        }
    return P;
}

/// sum_i 1/2 (a_i b_{i+1} - a_{i+1} b_i) around the closed ring, i.e.
/// 1/2 oint (a db - b da). Exactly antisymmetric in (a, b).
inline double shoelace(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        acc += 0.5 * (a[i] * b[j] - a[j] * b[i]);
    }
    return acc;
}

/// Cumulative integral of g ds between consecutive element centers, starting at 0.
inline std::vector<double> cumulative_integral(const BoundaryDataset& d, const std::vector<double>& g) {
    const std::size_t n = d.samples.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
        out[i + 1] = out[i] + 0.5 * (g[i] * d.samples[i].ds + g[i + 1] * d.samples[i + 1].ds);
    return out;
}

/// Stream function W with grad W = R_perp J, up to sign and constant.
inline std::vector<double> stream_function(const BoundaryDataset& d) {
    std::vector<double> g(d.samples.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = -d.samples[i].JdotN;
    return cumulative_integral(d, g);
}

/// dV/ds by a three-point stencil with spacing measured along the sample
/// tangent. A neighbour across a corner (tangents turning by more than 45
/// degrees) is dropped and the difference becomes one-sided. When samples
/// carry phase labels, a neighbour of the other phase is dropped too as long
/// as one same-phase neighbour remains: the field jumps at the interface.
inline std::vector<double> tangential_derivative(const BoundaryDataset& d) {
    validate(d);
    const std::size_t n = d.samples.size();
    constexpr double kSmooth = 0.7071;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = d.samples[(i + n - 1) % n];
        const auto& c = d.samples[i];
        const auto& q = d.samples[(i + 1) % n];
        const double hm = (c.x - p.x).dot(c.t);
        const double hp = (q.x - c.x).dot(c.t);
        bool use_p = hm > 0.0 && p.t.dot(c.t) > kSmooth;
        bool use_q = hp > 0.0 && q.t.dot(c.t) > kSmooth;
        const bool same_p = p.phase == c.phase, same_q = q.phase == c.phase;
        if ((use_p && same_p) || (use_q && same_q)) {
            use_p = use_p && same_p;
            use_q = use_q && same_q;
        }
        if (use_p && use_q) {
            // second-order three-point formula on a nonuniform stencil
            out[i] = (-hp / (hm * (hm + hp))) * p.V + ((hp - hm) / (hm * hp)) * c.V +
                     (hm / (hp * (hm + hp))) * q.V;
        } else if (use_q) {
            out[i] = (q.V - c.V) / hp;
        } else if (use_p) {
            out[i] = (c.V - p.V) / hm;
        } else {
            out[i] = 0.0;
        }
    }
    return out;
}

inline NullLagrangians null_lagrangians(const BoundaryDataset& d1, const BoundaryDataset& d2) {
    validate(d1);
    validate(d2);
    check_same_geometry(d1, d2);
    const std::size_t n = d1.samples.size();
    std::vector<double> v1(n), v2(n);
    for (std::size_t i = 0; i < n; ++i) {
        v1[i] = d1.samples[i].V;
        v2[i] = d2.samples[i].V;
    }
    check_flux(d1);
    check_flux(d2);
    const auto w1 = stream_function(d1);
    const auto w2 = stream_function(d2);
    return {shoelace(v1, v2) / d1.area, shoelace(w1, w2) / d1.area};
}

/// Frobenius coordinates of a 2x2 matrix in the basis
/// (1/sqrt2)([[0,1],[-1,0]], I, diag(1,-1), [[0,1],[1,0]]).
inline Eigen::Vector4d basis_coordinates(const Mat2& M) {
    const double r = 1.0 / std::numbers::sqrt2;
    return {r * (M(0, 1) - M(1, 0)), r * (M(0, 0) + M(1, 1)), r * (M(0, 0) - M(1, 1)),
            r * (M(0, 1) + M(1, 0))};
}

inline Mat2 from_basis_coordinates(const Eigen::Vector4d& v) {
    const double r = 1.0 / std::numbers::sqrt2;
    Mat2 M;
    M << r * (v[1] + v[2]), r * (v[0] + v[3]), r * (v[3] - v[0]), r * (v[1] - v[2]);
    return M;
}

inline void check_traction_balance(const BoundaryDataset& d, double tol) {
    Vec2 force = Vec2::Zero();
    double torque = 0.0, fscale = 0.0, tscale = 0.0;
    for (const auto& s : d.samples) {
        force += *s.traction * s.ds;
        torque += cross2(s.x, *s.traction) * s.ds;
        fscale += s.traction->norm() * s.ds;
        tscale += s.x.norm() * s.traction->norm() * s.ds;
    }
    if (force.norm() > tol * fscale + 1e-300)
        throw Error(ErrorCode::TractionImbalance, "net boundary force is not zero");
    if (std::abs(torque) > tol * tscale + 1e-300)
        throw Error(ErrorCode::TractionImbalance, "net boundary torque is not zero");
}

/// Energy and determinant moments from boundary displacement and traction.
/// a = <det tau> uses the Airy gradient (psi_x, psi_y) rebuilt from traction.
inline ElasticMoments elastic_moments(const BoundaryDataset& d, double tol = kDefaultFluxTolerance) {
    validate(d);
    for (const auto& s : d.samples)
        if (!s.u || !s.traction)
            throw Error(ErrorCode::InvalidInput, "elastic moments need displacement and traction at every sample");
    check_traction_balance(d, tol);
    const std::size_t n = d.samples.size();
    ElasticMoments m;
    std::vector<double> u1(n), u2(n), tn1(n), tn2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = d.samples[i];
        m.E += s.u->dot(*s.traction) * s.ds;
        m.mean_grad += s.n * s.u->transpose() * s.ds;
        m.mean_stress += s.x * s.traction->transpose() * s.ds;
        u1[i] = s.u->x();
        u2[i] = s.u->y();
        tn1[i] = s.traction->x();
        tn2[i] = -s.traction->y();
    }
    m.E /= d.area;
    m.mean_grad /= d.area;
    m.mean_stress /= d.area;
    m.b = shoelace(u1, u2) / d.area;
    const auto psi_y = cumulative_integral(d, tn1);
    const auto psi_x = cumulative_integral(d, tn2);
    m.a = shoelace(psi_x, psi_y) / d.area;
    m.F0 = basis_coordinates(m.mean_grad)[0];
    m.c = m.b - 0.5 * m.F0 * m.F0;
    return m;
}

/// Element-center geometry for a circle of radius R, counterclockwise.
inline BoundaryDataset circle_geometry(std::size_t count, const Vec2& center, double R) {
    BoundaryDataset d;
    d.area = std::numbers::pi * R * R;
    d.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
        auto& s = d.samples[i];
        s.n = {std::cos(th), std::sin(th)};
        s.t = {-s.n.y(), s.n.x()};
        s.x = center + R * s.n;
        s.ds = 2.0 * std::numbers::pi * R / static_cast<double>(count);
    }
    return d;
}

/// Element-center geometry for the rectangle [x0, x0+w] x [y0, y0+h] with nx
/// elements on horizontal sides and ny on vertical ones, counterclockwise from
/// the lower-left corner.
inline BoundaryDataset rectangle_geometry(std::size_t nx, std::size_t ny, double x0, double y0, double w,
                                          double h) {
    BoundaryDataset d;
    d.area = w * h;
    const double hx = w / static_cast<double>(nx);
    const double hy = h / static_cast<double>(ny);
    auto push = [&](Vec2 x, Vec2 n, double ds) {
        BoundarySample s;
        s.x = x;
        s.n = n;
        s.t = {-n.y(), n.x()};
        s.ds = ds;
        d.samples.push_back(s);
    };
    for (std::size_t i = 0; i < nx; ++i) push({x0 + (i + 0.5) * hx, y0}, {0.0, -1.0}, hx);
    for (std::size_t j = 0; j < ny; ++j) push({x0 + w, y0 + (j + 0.5) * hy}, {1.0, 0.0}, hy);
    for (std::size_t i = 0; i < nx; ++i) push({x0 + w - (i + 0.5) * hx, y0 + h}, {0.0, 1.0}, hx);
    for (std::size_t j = 0; j < ny; ++j) push({x0, y0 + h - (j + 0.5) * hy}, {-1.0, 0.0}, hy);
    return d;
}

} // namespace boundary
} // namespace breakdown
