#pragma once

#include "breakdown/boundary_data.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace breakdown::eomega {

inline const cplx I{0.0, 1.0};

/// f(t) = sum_a [b_a/(t - t_a) + conj(b_a)/(t - conj(t_a))] + c, real on the real axis.
struct RationalGenerator {
    std::vector<cplx> poles;
    std::vector<cplx> residues;
    double c = 0.0;

    void check() const {
        if (poles.size() != residues.size())
            throw Error(ErrorCode::InvalidGenerator, "poles and residues differ in count");
        for (const auto& p : poles)
            if (!(std::abs(p.imag()) > 0.0)) throw Error(ErrorCode::InvalidGenerator, "poles must be off the real axis");
    }
};

/// Ellipse x^2/b^2 + y^2 = 1: f(t) = 2 b t / (t^2 + 1).
inline RationalGenerator ellipse_generator(double b) { return {{I}, {cplx(b, 0.0)}, 0.0}; }

inline cplx eval_f(const RationalGenerator& g, cplx t) {
    cplx acc = g.c;
    for (std::size_t k = 0; k < g.poles.size(); ++k) {
        const cplx p = g.poles[k], q = std::conj(p);
        const double scale = 1.0 + std::abs(p);
        if (std::abs(t - p) < 1e-14 * scale || std::abs(t - q) < 1e-14 * scale)
            throw Error(ErrorCode::PoleEvaluation, "evaluation at a pole of the generator");
        acc += g.residues[k] / (t - p) + std::conj(g.residues[k]) / (t - q);
    }
    return acc;
}

inline cplx eval_df(const RationalGenerator& g, cplx t) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < g.poles.size(); ++k) {
        const cplx p = g.poles[k], q = std::conj(p);
        acc -= g.residues[k] / ((t - p) * (t - p)) + std::conj(g.residues[k]) / ((t - q) * (t - q));
    }
    return acc;
}

/// f on the real axis via t = tan(theta), theta in [-pi/2, pi/2]; finite at the ends.
inline double f_theta(const RationalGenerator& g, double theta) {
    const double c = std::cos(theta);
    if (std::abs(c) < 1e-300) return g.c;
    return eval_f(g, cplx(std::tan(theta), 0.0)).real();
}

/// beta_1 = lim t (f(t) - c) = 2 sum Re(b_a)
inline double beta1(const RationalGenerator& g) {
    double s = 0.0;
    for (const auto& b : g.residues) s += 2.0 * b.real();
    return s;
}

inline cplx h_of_t(cplx t) { return (1.0 - t * t) / (1.0 + t * t); }
inline cplx dh_dt(cplx t) { return -4.0 * t / ((1.0 + t * t) * (1.0 + t * t)); }

inline cplx z_of_t(const RationalGenerator& g, cplx t) { return I * h_of_t(t) + eval_f(g, t); }
inline cplx dz_dt(const RationalGenerator& g, cplx t) { return I * dh_dt(t) + eval_df(g, t); }

/// sqrt with the branch cut on the positive real axis: arg in [0, 2 pi),
/// so the result lies in the closed upper half plane.
inline cplx sqrt_upper(cplx s) {
    double a = std::arg(s);
    if (a < 0) a += 2.0 * std::numbers::pi;
    return std::polar(std::sqrt(std::abs(s)), 0.5 * a);
}

/// z(h) = i h + f(sqrt((1-h)/(1+h)))
inline cplx eval_z(const RationalGenerator& g, cplx h) {
    if (std::abs(h - 1.0) < 1e-14 || std::abs(h + 1.0) < 1e-14)
        throw Error(ErrorCode::BranchPointEvaluation, "h = +-1 is a branch point");
    return I * h + eval_f(g, sqrt_upper((1.0 - h) / (1.0 + h)));
}

// ------------------------------------------------------------- curve

/// Inclusion boundary sampled as two graphs x = x_plus(y), x_minus(y).
struct InclusionCurve {
    std::vector<double> y, x_plus, x_minus;

    /// Closed counterclockwise polygon.
    std::vector<Vec2> polygon() const {
        std::vector<Vec2> p;
        for (std::size_t k = 0; k < y.size(); ++k) p.emplace_back(x_plus[k], y[k]);
        for (std::size_t k = y.size(); k-- > 0;) p.emplace_back(x_minus[k], y[k]);
        double a = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) a += cross2(p[k], p[(k + 1) % p.size()]);
        if (a < 0) std::reverse(p.begin(), p.end());
        return p;
    }
};

/// Cosine-spaced samples y_k = -cos(pi k/(n-1)); y = -1 is t = infinity and
/// y = 1 is t = 0, so both branches meet at the ends.
inline InclusionCurve boundary_curve(const RationalGenerator& g, std::size_t n = 1025) {
    g.check();
    if (n < 3) throw Error(ErrorCode::InvalidInput, "need at least 3 curve samples");
    InclusionCurve c;
    for (std::size_t k = 0; k < n; ++k) {
        const double phi = std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1);
        // y = cos(2 theta) with theta = (pi - phi)/2 in [0, pi/2]
        const double theta = 0.5 * (std::numbers::pi - phi);
        c.y.push_back(-std::cos(phi));
        c.x_plus.push_back(f_theta(g, theta));
        c.x_minus.push_back(f_theta(g, -theta));
    }
    c.y.front() = -1.0;
    c.y.back() = 1.0;
    return c;
}

/// Closed polygon of the curve parametrised by theta in (-pi/2, pi/2].
inline std::vector<Vec2> curve_polygon(const RationalGenerator& g, std::size_t n = 4096) {
    std::vector<Vec2> p;
    for (std::size_t k = 0; k < n; ++k) {
        const double th = -0.5 * std::numbers::pi + std::numbers::pi * (static_cast<double>(k) + 1.0) / n;
        p.emplace_back(f_theta(g, th), std::cos(2.0 * th));
    }
    double a = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) a += cross2(p[k], p[(k + 1) % p.size()]);
    if (a < 0) std::reverse(p.begin(), p.end());
    return p;
}

/// Area enclosed by the curve: |int f(tan th) (-2 sin 2th) dth| (periodic trapezoid).
inline double inclusion_area(const RationalGenerator& g, std::size_t n = 8192) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double th = -0.5 * std::numbers::pi + std::numbers::pi * (static_cast<double>(k) + 0.5) / n;
        acc += f_theta(g, th) * (-2.0 * std::sin(2.0 * th));
    }
    return std::abs(acc * std::numbers::pi / n);
}

inline bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (p.x() < x) in = !in;
        }
    }
    return in;
}

/// Shear-type map x' = gamma1 x + gamma2_re y, y' = y (Im gamma2 = 1 - gamma1).
inline InclusionCurve affine_transform(const InclusionCurve& c, double gamma1, double gamma2_re) {
    if (!(gamma1 > 0.0)) throw Error(ErrorCode::DegenerateGamma, "gamma1 must be positive");
    InclusionCurve o = c;
    for (std::size_t k = 0; k < c.y.size(); ++k) {
        o.x_plus[k] = gamma1 * c.x_plus[k] + gamma2_re * c.y[k];
        o.x_minus[k] = gamma1 * c.x_minus[k] + gamma2_re * c.y[k];
    }
    return o;
}

/// Same map acting on the generator: f' = gamma1 f + gamma2_re h, where
/// h(t) = -1 - i/(t - i) + i/(t + i).
inline RationalGenerator affine_transform(const RationalGenerator& g, double gamma1, double gamma2_re) {
    if (!(gamma1 > 0.0)) throw Error(ErrorCode::DegenerateGamma, "gamma1 must be positive");
    RationalGenerator o = g;
    for (auto& b : o.residues) b *= gamma1;
    o.c = gamma1 * g.c - gamma2_re;
    const cplx add = -I * gamma2_re;
    bool merged = false;
    for (std::size_t k = 0; k < o.poles.size(); ++k) {
        if (std::abs(o.poles[k] - I) < 1e-15) {
            o.residues[k] += add;
            merged = true;
        } else if (std::abs(o.poles[k] + I) < 1e-15) {
            o.residues[k] += std::conj(add);
            merged = true;
        }
        if (merged) break;
    }
    if (!merged && gamma2_re != 0.0) {
        o.poles.push_back(I);
        o.residues.push_back(add);
    }
    return o;
}

// ------------------------------------------------------- polynomials

using Poly = std::vector<cplx>; // ascending coefficients

inline Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

inline Poly poly_add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

inline Poly poly_scale(const Poly& a, cplx s) {
    Poly r = a;
    for (auto& v : r) v *= s;
    return r;
}

inline cplx poly_eval(const Poly& a, cplx x) {
    cplx r = 0.0;
    for (std::size_t k = a.size(); k-- > 0;) r = r * x + a[k];
    return r;
}

inline Poly poly_deriv(const Poly& a) {
    if (a.size() < 2) return {0.0};
    Poly r(a.size() - 1);
    for (std::size_t k = 1; k < a.size(); ++k) r[k - 1] = a[k] * static_cast<double>(k);
    return r;
}

inline void poly_trim(Poly& a) {
    double scale = 0.0;
    for (const auto& v : a) scale = std::max(scale, std::abs(v));
    while (a.size() > 1 && std::abs(a.back()) <= 1e-14 * scale) a.pop_back();
}

/// Numerator of dz/dt over the least common denominator prod (t - q)^2, q
/// running over the distinct points among +-i and the generator poles, so a
/// pole shared with h contributes no spurious factor.
inline Poly critical_numerator(const RationalGenerator& g) {
    std::vector<cplx> q = {I, -I};
    auto index_of = [&](cplx p) {
        for (std::size_t j = 0; j < q.size(); ++j)
            if (std::abs(q[j] - p) < 1e-14 * (1.0 + std::abs(p))) return j;
        q.push_back(p);
        return q.size() - 1;
    };
    // coefficient of 1/(t - q_j)^2 in dz/dt, plus the -4 i t/(1+t^2)^2 term
    std::vector<cplx> coef(2, 0.0);
    for (std::size_t a = 0; a < g.poles.size(); ++a) {
        for (const auto& [p, b] : {std::pair{g.poles[a], g.residues[a]}, std::pair{std::conj(g.poles[a]), std::conj(g.residues[a])}}) {
            const std::size_t j = index_of(p);
            if (coef.size() <= j) coef.resize(j + 1, 0.0);
            coef[j] -= b;
        }
    }
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < q.size(); ++j)
        if (j < 2 || std::abs(coef[j]) > 0.0) active.push_back(j);
    auto others = [&](std::initializer_list<std::size_t> skip) {
        Poly P = {1.0};
        for (std::size_t j : active) {
            if (std::find(skip.begin(), skip.end(), j) != skip.end()) continue;
            const Poly lin = {-q[j], 1.0};
            P = poly_mul(P, poly_mul(lin, lin));
        }
        return P;
    };
    // -4 i t / ((t - i)^2 (t + i)^2)
    Poly N = poly_mul(Poly{0.0, -4.0 * I}, others({0, 1}));
    for (std::size_t j : active)
        if (std::abs(coef[j]) > 0.0) N = poly_add(N, poly_scale(others({j}), coef[j]));
    poly_trim(N);
    return N;
}

/// G(r) = N(t(r)) (1 - r)^d with t(r) = i (1 + r)/(1 - r): zeros of G in the
/// unit disk are the zeros of N in the upper half plane.
inline Poly disk_polynomial(const Poly& N) {
    const std::size_t d = N.size() - 1;
    Poly G = {0.0};
    for (std::size_t k = 0; k <= d; ++k) {
        Poly term = {N[k] * std::pow(I, static_cast<int>(k))};
        for (std::size_t j = 0; j < k; ++j) term = poly_mul(term, Poly{1.0, 1.0});
        for (std::size_t j = k; j < d; ++j) term = poly_mul(term, Poly{1.0, -1.0});
        G = poly_add(G, term);
    }
    return G;
}

namespace detail {

/// Change of arg(p) along a segment, sampled finely enough that each step
/// turns less than 0.5 rad. Returns nullopt if p nearly vanishes on it.
inline std::optional<double> arg_change(const Poly& p, cplx a, cplx b, double zero_tol) {
    double total = 0.0;
    cplx vcur = poly_eval(p, a);
    if (std::abs(vcur) < zero_tol) return std::nullopt;
    double step = 1.0 / 16.0;
    double s = 0.0;
    while (s < 1.0) {
        double ds = std::min(step, 1.0 - s);
        for (int tries = 0;; ++tries) {
            const cplx nxt = a + (b - a) * (s + ds);
            const cplx vn = poly_eval(p, nxt);
            if (std::abs(vn) < zero_tol) return std::nullopt;
            const double d = std::arg(vn / vcur);
            if (std::abs(d) < 0.5 || ds * std::abs(b - a) < 1e-15) {
                total += d;
                s += ds;
                vcur = vn;
                step = std::min(1.0 / 16.0, ds * 2.0);
                break;
            }
            ds *= 0.5;
            if (tries > 200) return std::nullopt;
        }
    }
    return total;
}

inline std::optional<int> zero_count(const Poly& p, cplx lo, cplx hi, double zero_tol) {
    const cplx c[4] = {lo, cplx(hi.real(), lo.imag()), hi, cplx(lo.real(), hi.imag())};
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
        const auto d = arg_change(p, c[k], c[(k + 1) % 4], zero_tol);
        if (!d) return std::nullopt;
        total += *d;
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

} // namespace detail

/// Zeros of a polynomial inside the unit disk by recursive subdivision of
/// rectangles with winding-number counts, refined to box size `tol`.
inline std::vector<cplx> disk_zeros(const Poly& G, double tol = 1e-10) {
    double scale = 0.0;
    for (const auto& v : G) scale = std::max(scale, std::abs(v));
    const double zero_tol = 1e-280 * std::max(1.0, scale);
    struct Box {
        cplx lo, hi;
        int count;
    };
    std::vector<cplx> out;
    std::vector<Box> work;
    const cplx lo0(-1.0 - 1.3e-3, -1.0 - 0.7e-3), hi0(1.0 + 1.1e-3, 1.0 + 0.9e-3);
    const auto c0 = detail::zero_count(G, lo0, hi0, zero_tol);
    if (!c0) throw Error(ErrorCode::NumericalInconclusive, "zero on the search boundary");
    if (*c0 > 0) work.push_back({lo0, hi0, *c0});
    const Poly dG = poly_deriv(G);
    while (!work.empty()) {
        const Box b = work.back();
        work.pop_back();
        const double size = std::max(b.hi.real() - b.lo.real(), b.hi.imag() - b.lo.imag());
        // skip boxes entirely outside the unit disk
        const double nx = std::clamp(0.0, b.lo.real(), b.hi.real()), ny = std::clamp(0.0, b.lo.imag(), b.hi.imag());
        if (std::hypot(nx, ny) > 1.0 + 1e-12) continue;
        if (size < tol) {
            cplx r = 0.5 * (b.lo + b.hi);
            for (int it = 0; it < 5; ++it) {
                const cplx d = poly_eval(dG, r);
                if (std::abs(d) == 0.0) break;
                const cplx step = poly_eval(G, r) / d;
                if (std::abs(step) > size) break;
                r -= step;
            }
            for (int m = 0; m < b.count; ++m) out.push_back(r);
            continue;
        }
        bool done = false;
        for (int attempt = 0; attempt < 8 && !done; ++attempt) {
            const double fx = 0.5 + 0.0137 * (attempt + 1) * (attempt % 2 ? -1 : 1);
            const double fy = 0.5 + 0.0191 * (attempt + 1) * (attempt % 2 ? 1 : -1);
            const double mx = b.lo.real() + fx * (b.hi.real() - b.lo.real());
            const double my = b.lo.imag() + fy * (b.hi.imag() - b.lo.imag());
            const Box kids[4] = {{b.lo, cplx(mx, my), 0},
                                 {cplx(mx, b.lo.imag()), cplx(b.hi.real(), my), 0},
                                 {cplx(b.lo.real(), my), cplx(mx, b.hi.imag()), 0},
                                 {cplx(mx, my), b.hi, 0}};
            std::vector<Box> found;
            int sum = 0;
            bool ok = true;
            for (const auto& k : kids) {
                const auto n = detail::zero_count(G, k.lo, k.hi, zero_tol);
                if (!n || *n < 0) {
                    ok = false;
                    break;
                }
                sum += *n;
                if (*n > 0) found.push_back({k.lo, k.hi, *n});
            }
            if (!ok || sum != b.count) continue;
            for (const auto& f : found) work.push_back(f);
            done = true;
        }
        if (!done) {
            // could not split cleanly: report the box center
            for (int m = 0; m < b.count; ++m) out.push_back(0.5 * (b.lo + b.hi));
        }
    }
    std::vector<cplx> inside;
    for (const auto& r : out)
        if (std::abs(r) < 1.0 - 1e-12) inside.push_back(r);
    std::sort(inside.begin(), inside.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return inside;
}

inline cplx t_of_r(cplx r) { return I * (1.0 + r) / (1.0 - r); }

/// Critical points of z(t) in the upper half plane (zeros of dz/dt).
inline std::vector<cplx> critical_points(const RationalGenerator& g) {
    g.check();
    const Poly N = critical_numerator(g);
    if (N.size() < 2) return {};
    const auto rs = disk_zeros(disk_polynomial(N));
    std::vector<cplx> ts;
    for (const auto& r : rs) {
        cplx t = t_of_r(r);
        bool spurious = std::abs(t - I) < 1e-6;
        for (const auto& p : g.poles)
            spurious = spurious || std::abs(t - p) < 1e-6 || std::abs(t - std::conj(p)) < 1e-6;
        if (spurious) continue;
        // polish on dz/dt directly
        for (int it = 0; it < 3; ++it) {
            const cplx d = poly_eval(poly_deriv(N), t);
            if (std::abs(d) == 0.0) break;
            t -= poly_eval(N, t) / d;
        }
        if (t.imag() > 0) ts.push_back(t);
    }
    return ts;
}

// ------------------------------------------------------------ validate

struct ValidityReport {
    bool self_intersection_free = false;
    double min_separation = 0.0; // min of 2 (f(t) - f(-t)) / sin(2 theta) over theta in (0, pi/2)
    double theta_at_min = 0.0;
    bool derivative_ok = false;
    double fprime0 = 0.0;
    bool beta1_ok = false;
    double beta1 = 0.0;
    std::vector<cplx> critical_t, critical_z;
    bool univalence_ok = false;
    bool valid = false;
    std::vector<std::string> failures;
};

/// Normalised branch separation q(theta) = 2 (f(t) - f(-t)) / sin(2 theta),
/// t = tan(theta); q -> 2 f'(0) as theta -> 0 and 2 beta1 as theta -> pi/2.
inline double branch_separation(const RationalGenerator& g, double theta) {
    return 2.0 * (f_theta(g, theta) - f_theta(g, -theta)) / std::sin(2.0 * theta);
}

inline ValidityReport validate(const RationalGenerator& g, double tol = 1e-9) {
    g.check();
    ValidityReport r;
    // (i) the two branches x_plus, x_minus never meet for y in (-1, 1)
    constexpr int K = 4096;
    double best = std::numeric_limits<double>::infinity(), best_th = 0.0, qscale = 0.0;
    for (int k = 0; k < K; ++k) {
        const double th = 0.5 * std::numbers::pi * (k + 0.5) / K;
        const double q = branch_separation(g, th);
        qscale = std::max(qscale, std::abs(q));
        if (q < best) {
            best = q;
            best_th = th;
        }
    }
    {
        double a = std::max(1e-12, best_th - 0.5 * std::numbers::pi / K);
        double b = std::min(0.5 * std::numbers::pi - 1e-12, best_th + 0.5 * std::numbers::pi / K);
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 80; ++it) {
            const double m1 = b - gr * (b - a), m2 = a + gr * (b - a);
            if (branch_separation(g, m1) < branch_separation(g, m2)) b = m2;
            else a = m1;
        }
        const double th = 0.5 * (a + b);
        const double q = branch_separation(g, th);
        if (q < best) {
            best = q;
            best_th = th;
        }
    }
    r.min_separation = best;
    r.theta_at_min = best_th;
    r.self_intersection_free = best > tol * std::max(1.0, qscale);
    if (!r.self_intersection_free) r.failures.push_back("curve branches meet (f(t) = f(-t) for some t != 0)");
    // (ii) f'(0) != 0
    r.fprime0 = eval_df(g, 0.0).real();
    r.derivative_ok = std::abs(r.fprime0) > tol;
    if (!r.derivative_ok) r.failures.push_back("f'(0) vanishes");
    // (iii) beta1 real and positive
    r.beta1 = beta1(g);
    r.beta1_ok = r.beta1 > tol;
    if (!r.beta1_ok) r.failures.push_back("beta1 is not positive");
    // (iv) critical points of the map lie outside the inclusion
    r.critical_t = critical_points(g);
    const auto poly = curve_polygon(g);
    r.univalence_ok = true;
    for (const auto& t : r.critical_t) {
        const cplx z = z_of_t(g, t);
        r.critical_z.push_back(z);
        if (point_in_polygon(poly, {z.real(), z.imag()})) r.univalence_ok = false;
    }
    if (!r.univalence_ok) r.failures.push_back("a critical point maps inside the inclusion");
    r.valid = r.self_intersection_free && r.derivative_ok && r.beta1_ok && r.univalence_ok;
    return r;
}

// ----------------------------------------------------- field synthesis

/// Preimage t (upper half plane) of an exterior point z, by continuation from
/// the nearest boundary point. The continuation runs in the disk coordinate
/// r, t = i (1 + r)/(1 - r), which stays bounded near the bottom of the
/// inclusion where t goes to infinity.
inline cplx invert_map(const RationalGenerator& g, cplx z) {
    constexpr int K = 4096;
    double best = std::numeric_limits<double>::infinity();
    double th0 = 0.0;
    for (int k = 0; k < K; ++k) {
        const double th = -0.5 * std::numbers::pi + std::numbers::pi * (k + 0.5) / K;
        const cplx zb(f_theta(g, th), std::cos(2.0 * th));
        const double d = std::abs(zb - z);
        if (d < best) {
            best = d;
            th0 = th;
        }
    }
    {
        // refine to the true nearest boundary point so the path leaves along the normal
        auto dist = [&](double th) { return std::abs(cplx(f_theta(g, th), std::cos(2.0 * th)) - z); };
        double a = th0 - std::numbers::pi / K, b = th0 + std::numbers::pi / K;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 60; ++it) {
            const double m1 = b - gr * (b - a), m2 = a + gr * (b - a);
            if (dist(m1) < dist(m2)) b = m2;
            else a = m1;
        }
        const double th = 0.5 * (a + b);
        if (std::abs(std::cos(th)) > 1e-12 && dist(th) < best) th0 = th;
    }
    // real t = tan(theta) sits at r = -exp(2 i theta) on the unit circle
    const auto z_of_r = [&](cplx r) { return z_of_t(g, t_of_r(r)); };
    const auto dz_dr = [&](cplx r) { return dz_dt(g, t_of_r(r)) * 2.0 * I / ((1.0 - r) * (1.0 - r)); };
    cplx r = -std::exp(2.0 * I * th0);
    const cplx z0 = z_of_r(r);
    double s = 0.0, ds = 0.05;
    while (s < 1.0) {
        const double sn = std::min(1.0, s + ds);
        const cplx target = z0 + sn * (z - z0);
        cplx rn = r + (target - z_of_r(r)) / dz_dr(r);
        bool ok = false;
        for (int it = 0; it < 30; ++it) {
            if (std::abs(1.0 - rn) < 1e-300) break;
            const cplx step = (z_of_r(rn) - target) / dz_dr(rn);
            rn -= step;
            if (std::abs(step) < 1e-15) {
                ok = true;
                break;
            }
        }
        if (ok && std::abs(rn) <= 1.0 + 1e-12 && std::abs(rn - r) < 0.5) {
            r = rn;
            s = sn;
            ds = std::min(0.2, ds * 1.5);
        } else {
            ds *= 0.5;
            if (ds < 1e-9) throw Error(ErrorCode::NumericalInconclusive, "inverse map continuation failed");
        }
    }
    return t_of_r(r);
}

/// Solution of the uniform-field problem: inside the inclusion V = x,
/// W = sigma1 y; outside V + i W = z - i (1 - sigma1) h.
struct Potentials {
    double V = 0.0, W = 0.0;   // field with uniform interior gradient (1, 0)
    double Vp = 0.0, Wp = 0.0; // orthogonal field
    Vec2 gradV = Vec2::Zero();
    cplx h;
};

inline Potentials exterior_potentials(const RationalGenerator& g, double sigma1, cplx z) {
    const cplx t = invert_map(g, z);
    Potentials p;
    p.h = h_of_t(t);
    const cplx Phi = z - I * (1.0 - sigma1) * p.h;
    const cplx dPhi = 1.0 - I * (1.0 - sigma1) * dh_dt(t) / dz_dt(g, t);
    p.V = Phi.real();
    p.W = Phi.imag();
    p.Vp = -p.W + (1.0 + sigma1) * z.imag();
    p.Wp = p.V - (1.0 + sigma1) * z.real();
    p.gradV = {dPhi.real(), -dPhi.imag()};
    return p;
}

/// Potentials at an exterior point; throws PointInsideInclusion otherwise.
inline Potentials orthogonal_potentials(const RationalGenerator& g, double sigma1, const Vec2& x) {
    const auto poly = curve_polygon(g);
    if (point_in_polygon(poly, x)) throw Error(ErrorCode::PointInsideInclusion, "point lies inside the inclusion");
    return exterior_potentials(g, sigma1, cplx(x.x(), x.y()));
}

/// Equivalent conductivity ratio for the elastic problem with a hydrostatic
/// interior strain.
inline double elastic_sigma(double lambda1, double mu1, double lambda2, double mu2) {
    const double den = lambda2 + 2.0 * mu2;
    if (den == 0.0) throw Error(ErrorCode::DegenerateDenominator, "lambda2 + 2 mu2 = 0");
    return (2.0 * (lambda1 + mu1) - lambda2) / den;
}

/// Gradient of the exterior field on the inclusion boundary (approached from
/// outside), at real t.
inline Vec2 boundary_gradient(const RationalGenerator& g, double sigma1, double t) {
    const cplx tt(t, 0.0);
    const cplx dPhi = 1.0 - I * (1.0 - sigma1) * dh_dt(tt) / dz_dt(g, tt);
    return {dPhi.real(), -dPhi.imag()};
}

struct SynthesisOptions {
    double sigma1 = 2.0, sigma2 = 1.0; // inclusion and matrix conductivities
    double e0 = 1.0;                   // interior field is (e0, 0)
    Vec2 center = Vec2::Zero();
    double radius = 3.0;
    std::size_t samples = 1024;
};

struct Synthesis {
    BoundaryDataset data;
    double inclusion_area = 0.0;
    double f1 = 0.0;
    double max_matrix_field = 0.0; // max |E| over the matrix (boundary of Omega and of the inclusion)
};

/// Boundary data on a circle around a valid inclusion. Interior field is
/// exactly (e0, 0); the matrix field is the analytic exterior solution.
inline Synthesis synthesize(const RationalGenerator& g, const SynthesisOptions& o) {
    g.check();
    if (!(o.sigma2 > 0.0) || !(o.radius > 0.0)) throw Error(ErrorCode::InvalidInput, "bad synthesis options");
    const double ratio = o.sigma1 / o.sigma2;
    const auto poly = curve_polygon(g);
    for (const auto& p : poly)
        if ((p - o.center).norm() >= o.radius * (1.0 - 1e-9))
            throw Error(ErrorCode::InvalidInput, "inclusion is not inside the circle");
    for (const auto& t : critical_points(g)) {
        const cplx z = z_of_t(g, t);
        if ((Vec2(z.real(), z.imag()) - o.center).norm() <= o.radius)
            throw Error(ErrorCode::OmegaTooLarge, "a critical point of the map lies inside Omega");
    }
    Synthesis s;
    s.data = boundary::circle_geometry(o.samples, o.center, o.radius);
    s.data.label = "E_Omega synthesis";
    for (auto& smp : s.data.samples) {
        const auto p = exterior_potentials(g, ratio, cplx(smp.x.x(), smp.x.y()));
        smp.V = -o.e0 * p.V;
        smp.JdotN = o.sigma2 * o.e0 * p.gradV.dot(smp.n);
        smp.phase = 2;
        s.max_matrix_field = std::max(s.max_matrix_field, o.e0 * p.gradV.norm());
    }
    constexpr int K = 4096;
    for (int k = 0; k < K; ++k) {
        const double th = -0.5 * std::numbers::pi + std::numbers::pi * (k + 0.5) / K;
        s.max_matrix_field = std::max(s.max_matrix_field, o.e0 * boundary_gradient(g, ratio, std::tan(th)).norm());
    }
    s.inclusion_area = inclusion_area(g);
    s.f1 = s.inclusion_area / s.data.area;
    return s;
}

/// Random candidate: an ellipse pole at i plus a few perturbing poles.
inline RationalGenerator random_generator(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    RationalGenerator g;
    g.poles.push_back(I);
    g.residues.push_back(cplx(0.5 + 1.5 * U(rng), 0.0));
    const int extra = static_cast<int>(U(rng) * 3.0);
    for (int k = 0; k < extra; ++k) {
        g.poles.push_back(cplx(-1.5 + 3.0 * U(rng), 0.6 + 1.4 * U(rng)));
        g.residues.push_back(cplx(-0.25 + 0.5 * U(rng), -0.25 + 0.5 * U(rng)));
    }
    g.c = -0.5 + U(rng);
    return g;
}

} // namespace breakdown::eomega
