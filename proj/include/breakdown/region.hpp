#pragma once

#include "breakdown/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace breakdown::geom {

inline constexpr double kMembershipTol = 1e-12;
inline constexpr double kSlackTol = 1e-10;
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kMaxAxisRatio = 1e6; // ellipsoid search gives up beyond this

/// a x + b y <= c
struct LinearIneq2 {
    double a = 0.0, b = 0.0, c = 0.0;
    std::string label;
    bool tightening = false;
};

/// [x y 1] M [x y 1]^T >= 0, M symmetric
struct QuadraticIneq2 {
    Mat3 M = Mat3::Zero();
    std::string label;
    bool tightening = false;
};

struct Region2 {
    std::vector<LinearIneq2> linear;
    std::vector<QuadraticIneq2> quadratic;
    std::string label;
};

/// a . v <= c
struct LinearIneq3 {
    Vec3 a = Vec3::Zero();
    double c = 0.0;
    std::string label;
    bool tightening = false;
};

/// M0 + x Mx + y My + z Mz is positive semidefinite
struct PsdIneq3 {
    std::array<Mat2, 4> M{Mat2::Zero(), Mat2::Zero(), Mat2::Zero(), Mat2::Zero()};
    std::string label;
    bool tightening = false;

    Mat2 at(const Vec3& v) const { return M[0] + v.x() * M[1] + v.y() * M[2] + v.z() * M[3]; }
};

struct Region3 {
    Vec3 lo = Vec3::Constant(-kInf);
    Vec3 hi = Vec3::Constant(kInf);
    std::vector<LinearIneq3> linear;
    std::vector<PsdIneq3> psd;
    std::string label;
};

enum class Emptiness { Empty, Nonempty, Inconclusive };

inline const char* to_string(Emptiness e) {
    switch (e) {
    case Emptiness::Empty: return "Empty";
    case Emptiness::Nonempty: return "Nonempty";
    case Emptiness::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

template <int N>
struct EmptinessResult {
    using Point = Eigen::Matrix<double, N, 1>;
    Emptiness status = Emptiness::Inconclusive;
    Point witness = Point::Zero();
    double depth = 0.0;  // largest smallest-slack found; negative when empty
    std::string binding; // constraint with the least slack at the best point
};

// ---------------------------------------------------------------- slacks

inline double slack(const LinearIneq2& l, const Vec2& p) { return l.c - (l.a * p.x() + l.b * p.y()); }

inline double slack(const QuadraticIneq2& q, const Vec2& p) {
    const Vec3 h(p.x(), p.y(), 1.0);
    return h.dot(q.M * h);
}

inline double slack(const LinearIneq3& l, const Vec3& p) { return l.c - l.a.dot(p); }

inline double min_eigenvalue(const Mat2& M) {
    const double t = 0.5 * (M(0, 0) + M(1, 1));
    const double d = 0.5 * (M(0, 0) - M(1, 1));
    const double o = 0.5 * (M(0, 1) + M(1, 0));
    return t - std::hypot(d, o);
}

inline Vec2 min_eigenvector(const Mat2& M) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (M + M.transpose()));
    return es.eigenvectors().col(0);
}

inline double slack(const PsdIneq3& q, const Vec3& p) { return min_eigenvalue(q.at(p)); }

inline bool membership(const Region2& r, const Vec2& p, double tol = kMembershipTol) {
    for (const auto& l : r.linear)
        if (slack(l, p) < -tol) return false;
    for (const auto& q : r.quadratic)
        if (slack(q, p) < -tol) return false;
    return true;
}

inline bool membership(const Region3& r, const Vec3& p, double tol = kMembershipTol) {
    for (int i = 0; i < 3; ++i)
        if (p[i] < r.lo[i] - tol || p[i] > r.hi[i] + tol) return false;
    for (const auto& l : r.linear)
        if (slack(l, p) < -tol) return false;
    for (const auto& q : r.psd)
        if (slack(q, p) < -tol) return false;
    return true;
}

inline Region2 intersect(const Region2& a, const Region2& b) {
    Region2 r = a;
    r.linear.insert(r.linear.end(), b.linear.begin(), b.linear.end());
    r.quadratic.insert(r.quadratic.end(), b.quadratic.begin(), b.quadratic.end());
    r.label = a.label.empty() ? b.label : (b.label.empty() ? a.label : a.label + " & " + b.label);
    return r;
}

inline Region3 intersect(const Region3& a, const Region3& b) {
    Region3 r = a;
    r.lo = a.lo.cwiseMax(b.lo);
    r.hi = a.hi.cwiseMin(b.hi);
    r.linear.insert(r.linear.end(), b.linear.begin(), b.linear.end());
    r.psd.insert(r.psd.end(), b.psd.begin(), b.psd.end());
    r.label = a.label.empty() ? b.label : (b.label.empty() ? a.label : a.label + " & " + b.label);
    return r;
}

// ------------------------------------------------- ellipsoid feasibility

/// Max-violation oracle: returns F(v) = max_i g_i(v) and a subgradient.
template <int N>
using ViolationOracle =
    std::function<double(const Eigen::Matrix<double, N, 1>&, Eigen::Matrix<double, N, 1>&, std::string&)>;

/// Deep-cut ellipsoid search for a point with F <= tol inside the box
/// [lo, hi]. Every point of the box with F <= tol stays inside the current
/// ellipsoid, so an impossible cut certifies emptiness. That invariant only
/// survives rounding while the ellipsoid is reasonably shaped; once its axis
/// ratio passes kMaxAxisRatio the search stops without claiming emptiness.
template <int N>
EmptinessResult<N> ellipsoid_search(const ViolationOracle<N>& F, const Eigen::Matrix<double, N, 1>& lo,
                                    const Eigen::Matrix<double, N, 1>& hi, double tol = kSlackTol,
                                    int max_iter = 20000) {
    using Vec = Eigen::Matrix<double, N, 1>;
    using Mat = Eigen::Matrix<double, N, N>;
    constexpr double n = N;
    EmptinessResult<N> res;
    Vec c = 0.5 * (lo + hi);
    Vec half = 0.5 * (hi - lo);
    Mat P = Mat::Zero();
    double r0 = 0.0;
    for (int i = 0; i < N; ++i) {
        const double s = std::max(half[i], 1e-12 * (1.0 + std::abs(c[i])));
        P(i, i) = n * s * s * (1.0 + 1e-9);
        r0 = std::max(r0, s);
    }
    Vec scale;
    for (int i = 0; i < N; ++i) scale[i] = 1.0 / std::sqrt(P(i, i));
    double best = kInf;
    Vec best_pt = c;
    std::string best_label;
    for (int it = 0; it < max_iter; ++it) {
        Vec g;
        std::string label;
        const double f = F(c, g, label);
        if (f < best) {
            best = f;
            best_pt = c;
            best_label = label;
        }
        if (f <= tol) break;
        {
            // shape relative to the starting box, which is the identity here
            const Mat Q = scale.asDiagonal() * P * scale.asDiagonal();
            const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(Q, Eigen::EigenvaluesOnly).eigenvalues();
            if (!(ev[0] > ev[N - 1] / (kMaxAxisRatio * kMaxAxisRatio))) break;
        }
        const double gpg = g.dot(P * g);
        if (!(gpg > 0.0)) {
            // zero subgradient at a violating point: F >= f everywhere
            res.status = Emptiness::Empty;
            break;
        }
        const double root = std::sqrt(gpg);
        const double alpha = (f - tol) / root;
        if (alpha >= 1.0) {
            res.status = Emptiness::Empty;
            break;
        }
        const Vec Pg = P * g / root;
        const double step = (1.0 + n * alpha) / (n + 1.0);
        const double shrink = (n * n / (n * n - 1.0)) * (1.0 - alpha * alpha);
        const double w = 2.0 * (1.0 + n * alpha) / ((n + 1.0) * (1.0 + alpha));
        c -= step * Pg;
        P = shrink * (P - w * Pg * Pg.transpose());
        P = 0.5 * (P + P.transpose()).eval();
        if (P.diagonal().maxCoeff() < 1e-30 * r0 * r0) break;
    }
    res.witness = best_pt;
    res.depth = -best;
    res.binding = best_label;
    if (best <= tol) res.status = Emptiness::Nonempty;
    return res;
}

// ------------------------------------------------------ 2D: linear part

namespace detail {

struct Interval {
    double lo = -kInf, hi = kInf;
    bool infeasible = false;
};

/// Range of one coordinate over a set of 2D half-planes (exact elimination of
/// the other coordinate). axis 0 -> x range, axis 1 -> y range.
inline Interval fm_range(const std::vector<LinearIneq2>& ls, int axis, double tol) {
    struct L {
        double k, m, c; // k * keep + m * elim <= c
    };
    std::vector<L> norm;
    Interval iv;
    for (const auto& l : ls) {
        const double s = std::hypot(l.a, l.b);
        if (s == 0.0) {
            if (l.c < -tol) iv.infeasible = true;
            continue;
        }
        const double k = (axis == 0 ? l.a : l.b) / s;
        const double m = (axis == 0 ? l.b : l.a) / s;
        norm.push_back({k, m, l.c / s});
    }
    std::vector<L> one;
    for (const auto& l : norm)
        if (std::abs(l.m) <= 1e-15) one.push_back({l.k, 0.0, l.c});
    for (const auto& p : norm) {
        if (!(p.m > 1e-15)) continue;
        for (const auto& q : norm) {
            if (!(q.m < -1e-15)) continue;
            one.push_back({-q.m * p.k + p.m * q.k, 0.0, -q.m * p.c + p.m * q.c});
        }
    }
    for (const auto& l : one) {
        if (std::abs(l.k) <= 1e-15) {
            if (l.c < -tol) iv.infeasible = true;
        } else if (l.k > 0) {
            iv.hi = std::min(iv.hi, l.c / l.k);
        } else {
            iv.lo = std::max(iv.lo, l.c / l.k);
        }
    }
    if (iv.lo > iv.hi + tol) iv.infeasible = true;
    return iv;
}

inline double pick(const Interval& iv) {
    const bool flo = std::isfinite(iv.lo), fhi = std::isfinite(iv.hi);
    if (flo && fhi) return iv.lo <= iv.hi ? 0.5 * (iv.lo + iv.hi) : iv.lo;
    if (flo) return iv.lo + 1.0;
    if (fhi) return iv.hi - 1.0;
    return 0.0;
}

inline bool is_concave(const QuadraticIneq2& q) {
    const Mat2 A = q.M.topLeftCorner<2, 2>();
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Mat2> es(A);
    return es.eigenvalues().maxCoeff() <= 1e-12 * scale;
}

} // namespace detail

inline EmptinessResult<2> is_empty_linear(const std::vector<LinearIneq2>& ls, double tol = kSlackTol) {
    EmptinessResult<2> res;
    const auto xr = detail::fm_range(ls, 0, tol);
    if (xr.infeasible) {
        res.status = Emptiness::Empty;
        res.depth = std::isfinite(xr.lo - xr.hi) ? std::min(-(xr.lo - xr.hi), -kSlackTol) : -kSlackTol;
        for (const auto& l : ls)
            if (l.a == 0.0 && l.b == 0.0 && l.c < -tol && l.c < res.depth) {
                res.depth = l.c;
                res.binding = l.label;
            }
        if (res.binding.empty()) res.binding = "linear constraints";
        return res;
    }
    const double x = detail::pick(xr);
    detail::Interval yr;
    for (const auto& l : ls) {
        if (std::abs(l.b) <= 1e-15 * std::hypot(l.a, l.b)) continue;
        const double v = (l.c - l.a * x) / l.b;
        if (l.b > 0) yr.hi = std::min(yr.hi, v);
        else yr.lo = std::max(yr.lo, v);
    }
    const Vec2 p(x, detail::pick(yr));
    double depth = kInf;
    std::string binding;
    for (const auto& l : ls) {
        const double s = std::hypot(l.a, l.b);
        const double sl = s > 0 ? slack(l, p) / s : l.c;
        if (sl < depth) {
            depth = sl;
            binding = l.label;
        }
    }
    res.witness = p;
    res.depth = ls.empty() ? kInf : depth;
    res.binding = binding;
    res.status = depth >= -kSlackTol ? Emptiness::Nonempty : Emptiness::Inconclusive;
    return res;
}

/// Bounding box of a region: exact for the linear part, ellipse extents for
/// strictly concave quadratics. Sets empty=true if a quadratic has negative
/// maximum.
struct Box2 {
    Vec2 lo = Vec2::Constant(-kInf), hi = Vec2::Constant(kInf);
    bool empty = false;
    std::string empty_label;
};

inline Box2 bounding_box(const Region2& r) {
    Box2 b;
    const auto xr = detail::fm_range(r.linear, 0, 1e-12);
    const auto yr = detail::fm_range(r.linear, 1, 1e-12);
    if (xr.infeasible || yr.infeasible) {
        b.empty = true;
        b.empty_label = "linear constraints";
    }
    b.lo = {xr.lo, yr.lo};
    b.hi = {xr.hi, yr.hi};
    for (const auto& q : r.quadratic) {
        const Mat2 A = q.M.topLeftCorner<2, 2>();
        const Vec2 g = q.M.topRightCorner<2, 1>();
        Eigen::SelfAdjointEigenSolver<Mat2> es(A);
        const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
        if (es.eigenvalues().maxCoeff() >= -1e-12 * scale) continue;
        const Mat2 Ainv = A.inverse();
        const Vec2 v0 = -Ainv * g;
        const double qmax = slack(q, v0);
        if (qmax < -kSlackTol) {
            b.empty = true;
            b.empty_label = q.label;
            continue;
        }
        const Mat2 N = -Ainv;
        for (int i = 0; i < 2; ++i) {
            const double e = std::sqrt(std::max(0.0, qmax) * N(i, i));
            b.lo[i] = std::max(b.lo[i], v0[i] - e);
            b.hi[i] = std::min(b.hi[i], v0[i] + e);
        }
    }
    return b;
}

inline EmptinessResult<2> is_empty(const Region2& r) {
    if (r.quadratic.empty()) return is_empty_linear(r.linear);
    EmptinessResult<2> res;
    const Box2 box = bounding_box(r);
    if (box.empty) {
        res.status = Emptiness::Empty;
        res.depth = -kSlackTol;
        res.binding = box.empty_label;
        return res;
    }
    for (int i = 0; i < 2; ++i)
        if (box.lo[i] > box.hi[i] + kSlackTol) {
            res.status = Emptiness::Empty;
            res.depth = -(box.lo[i] - box.hi[i]);
            res.binding = "bounding box";
            return res;
        }
    bool bounded = true;
    for (int i = 0; i < 2; ++i) bounded = bounded && std::isfinite(box.lo[i]) && std::isfinite(box.hi[i]);
    Vec2 lo = box.lo, hi = box.hi;
    if (!bounded) {
        for (int i = 0; i < 2; ++i) {
            if (!std::isfinite(lo[i])) lo[i] = (std::isfinite(hi[i]) ? hi[i] : 0.0) - 1e6;
            if (!std::isfinite(hi[i])) hi[i] = lo[i] + 2e6;
        }
    }
    const bool convex = std::all_of(r.quadratic.begin(), r.quadratic.end(), detail::is_concave);
    auto F = [&](const Vec2& v, Vec2& g, std::string& label) {
        double best = -kInf;
        for (const auto& l : r.linear) {
            const double s = std::hypot(l.a, l.b);
            double val;
            Vec2 grad;
            if (s == 0.0) {
                val = -l.c;
                grad.setZero();
            } else {
                val = -slack(l, v) / s;
                grad = Vec2(l.a, l.b) / s;
            }
            if (val > best) {
                best = val;
                g = grad;
                label = l.label;
            }
        }
        for (const auto& q : r.quadratic) {
            const double val = -slack(q, v);
            if (val > best) {
                best = val;
                g = -2.0 * (q.M.topLeftCorner<2, 2>() * v + q.M.topRightCorner<2, 1>());
                label = q.label;
            }
        }
        for (int i = 0; i < 2; ++i) {
            const double vl = lo[i] - v[i], vh = v[i] - hi[i];
            if (vl > best) {
                best = vl;
                g = -Vec2::Unit(i);
                label = "bounding box";
            }
            if (vh > best) {
                best = vh;
                g = Vec2::Unit(i);
                label = "bounding box";
            }
        }
        return best;
    };
    if (convex) {
        res = ellipsoid_search<2>(F, lo, hi);
        if (res.status == Emptiness::Nonempty && !membership(r, res.witness, kSlackTol))
            res.status = Emptiness::Inconclusive;
        if (res.status == Emptiness::Empty && !bounded) res.status = Emptiness::Inconclusive;
        return res;
    }
    // non-convex constraint set: look for a witness on a grid, never claim empty
    constexpr int kGrid = 400;
    double best = kInf;
    for (int i = 0; i <= kGrid; ++i)
        for (int j = 0; j <= kGrid; ++j) {
            const Vec2 v(lo.x() + (hi.x() - lo.x()) * i / kGrid, lo.y() + (hi.y() - lo.y()) * j / kGrid);
            Vec2 g;
            std::string label;
            const double f = F(v, g, label);
            if (f < best) {
                best = f;
                res.witness = v;
                res.binding = label;
            }
        }
    res.depth = -best;
    res.status = best <= kSlackTol && membership(r, res.witness, kSlackTol) ? Emptiness::Nonempty
                                                                           : Emptiness::Inconclusive;
    return res;
}

// ------------------------------------------------------------ 3D regions

inline EmptinessResult<3> is_empty(const Region3& r) {
    EmptinessResult<3> res;
    Vec3 lo = r.lo, hi = r.hi;
    std::vector<LinearIneq3> rest;
    for (const auto& l : r.linear) {
        int nz = 0, k = -1;
        for (int i = 0; i < 3; ++i)
            if (l.a[i] != 0.0) {
                ++nz;
                k = i;
            }
        if (nz == 1) {
            if (l.a[k] > 0) hi[k] = std::min(hi[k], l.c / l.a[k]);
            else lo[k] = std::max(lo[k], l.c / l.a[k]);
        } else {
            rest.push_back(l);
        }
    }
    for (int i = 0; i < 3; ++i)
        if (lo[i] > hi[i] + kSlackTol) {
            res.status = Emptiness::Empty;
            res.depth = -(lo[i] - hi[i]);
            res.binding = "coordinate bounds";
            return res;
        }
    bool bounded = true;
    for (int i = 0; i < 3; ++i) bounded = bounded && std::isfinite(lo[i]) && std::isfinite(hi[i]);
    Vec3 blo = lo, bhi = hi;
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(blo[i])) blo[i] = (std::isfinite(bhi[i]) ? bhi[i] : 0.0) - 1e6;
        if (!std::isfinite(bhi[i])) bhi[i] = blo[i] + 2e6;
    }
    auto F = [&](const Vec3& v, Vec3& g, std::string& label) {
        double best = -kInf;
        for (int i = 0; i < 3; ++i) {
            const double vl = blo[i] - v[i], vh = v[i] - bhi[i];
            if (vl > best) {
                best = vl;
                g = -Vec3::Unit(i);
                label = "coordinate bounds";
            }
            if (vh > best) {
                best = vh;
                g = Vec3::Unit(i);
                label = "coordinate bounds";
            }
        }
        for (const auto& l : rest) {
            const double s = l.a.norm();
            const double val = s == 0.0 ? -l.c : -slack(l, v) / s;
            if (val > best) {
                best = val;
                g = s == 0.0 ? Vec3::Zero() : Vec3(l.a / s);
                label = l.label;
            }
        }
        for (const auto& q : r.psd) {
            const Mat2 M = q.at(v);
            const double val = -min_eigenvalue(M);
            if (val > best) {
                best = val;
                const Vec2 u = min_eigenvector(M);
                for (int i = 0; i < 3; ++i) g[i] = -u.dot(q.M[i + 1] * u);
                label = q.label;
            }
        }
        return best;
    };
    res = ellipsoid_search<3>(F, blo, bhi);
    if (res.status == Emptiness::Nonempty && !membership(r, res.witness, kSlackTol))
        res.status = Emptiness::Inconclusive;
    if (res.status == Emptiness::Empty && !bounded) res.status = Emptiness::Inconclusive;
    return res;
}

// --------------------------------------------- quadratic form utilities

/// Affine function of (x, y): coefficients (cx, cy, c0).
using Affine2 = Vec3;

/// Symmetric 3x3 matrix of the product of two affine functions.
inline Mat3 product_form(const Affine2& u, const Affine2& v) {
    return 0.5 * (u * v.transpose() + v * u.transpose());
}

inline double eval_affine(const Affine2& u, const Vec2& p) { return u[0] * p.x() + u[1] * p.y() + u[2]; }

/// Planar slice of a 3-variable region at coordinate `axis` = value, in the
/// remaining two coordinates (in increasing order). Each 2x2 PSD constraint
/// becomes det >= 0 plus nonnegative diagonal entries.
inline Region2 slice(const Region3& r, int axis, double value) {
    if (axis < 0 || axis > 2) throw Error(ErrorCode::DimensionMismatch, "slice axis must be 0, 1 or 2");
    const int u = axis == 0 ? 1 : 0, v = axis == 2 ? 1 : 2;
    Region2 s;
    s.label = r.label;
    if (value < r.lo[axis] || value > r.hi[axis]) s.linear.push_back({0.0, 0.0, -1.0, "slice outside box"});
    const int uv[2] = {u, v};
    for (int k = 0; k < 2; ++k) {
        const int i = uv[k];
        const double a = k == 0 ? 1.0 : 0.0, b = k == 0 ? 0.0 : 1.0;
        if (std::isfinite(r.hi[i])) s.linear.push_back({a, b, r.hi[i], "box"});
        if (std::isfinite(r.lo[i])) s.linear.push_back({-a, -b, -r.lo[i], "box"});
    }
    for (const auto& l : r.linear)
        s.linear.push_back({l.a[u], l.a[v], l.c - l.a[axis] * value, l.label, l.tightening});
    for (const auto& q : r.psd) {
        const Mat2 base = q.M[0] + value * q.M[axis + 1];
        const Mat2& Mu = q.M[u + 1];
        const Mat2& Mv = q.M[v + 1];
        const Affine2 m11(Mu(0, 0), Mv(0, 0), base(0, 0)), m22(Mu(1, 1), Mv(1, 1), base(1, 1));
        const Affine2 m12(Mu(0, 1), Mv(0, 1), base(0, 1));
        s.quadratic.push_back({product_form(m11, m22) - product_form(m12, m12), q.label, q.tightening});
        s.linear.push_back({-m11[0], -m11[1], m11[2], q.label, q.tightening});
        s.linear.push_back({-m22[0], -m22[1], m22[2], q.label, q.tightening});
    }
    return s;
}

} // namespace breakdown::geom
