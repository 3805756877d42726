#pragma once

#include "breakdown/boundary_data.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <type_traits>
#include <vector>

namespace breakdown::forward {

/// Two-phase pixel grid on [x0, x0 + nx h] x [y0, y0 + ny h]; phase(i, j) is 1 or 2.
struct PhaseGrid {
    int nx = 0, ny = 0;
    double h = 1.0;
    double x0 = 0.0, y0 = 0.0;
    std::vector<std::uint8_t> phase;

    int index(int i, int j) const { return j * nx + i; }
    int at(int i, int j) const { return phase[static_cast<std::size_t>(index(i, j))]; }
    Vec2 center(int i, int j) const { return {x0 + (i + 0.5) * h, y0 + (j + 0.5) * h}; }
    double area() const { return nx * h * ny * h; }

    double fraction(int p) const {
        std::size_t n = 0;
        for (auto v : phase) n += (v == p);
        return static_cast<double>(n) / static_cast<double>(phase.size());
    }

    void check() const {
        if (nx < 1 || ny < 1 || !(h > 0.0) || phase.size() != static_cast<std::size_t>(nx) * ny)
            throw Error(ErrorCode::InvalidInput, "malformed phase grid");
        for (auto v : phase)
            if (v != 1 && v != 2) throw Error(ErrorCode::InvalidInput, "phase labels must be 1 or 2");
    }
};

/// Grid on the unit square (h = 1/n) with phase taken at cell centers.
inline PhaseGrid rasterize(int n, const std::function<int(const Vec2&)>& phase_at) {
    PhaseGrid g;
    g.nx = g.ny = n;
    g.h = 1.0 / n;
    g.phase.resize(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) g.phase[g.index(i, j)] = static_cast<std::uint8_t>(phase_at(g.center(i, j)));
    return g;
}

/// Layers normal to x (axis 0) or y (axis 1): phase 1 where the coordinate
/// lies in [0, fraction).
inline PhaseGrid laminate(int n, int axis, double fraction = 0.5) {
    return rasterize(n, [=](const Vec2& p) { return p[axis] < fraction ? 1 : 2; });
}

inline PhaseGrid checkerboard(int n, int tiles) {
    return rasterize(n, [=](const Vec2& p) {
        const int a = static_cast<int>(std::floor(p.x() * tiles)), b = static_cast<int>(std::floor(p.y() * tiles));
        return ((a + b) % 2 == 0) ? 1 : 2;
    });
}

/// Real field data of one solution component in half-cell form. Each cell
/// carries the field on its four half-cells: x-components on the left/right
/// halves and y-components on the bottom/top halves.
struct RealField {
    std::vector<double> ExL, ExR, EyB, EyT;
    std::vector<double> Vb, Jn; // boundary face potential and outward J.n, boundary order
};

template <class S>
struct FieldSolution {
    PhaseGrid grid;
    S sigma1{}, sigma2{};
    std::vector<S> V;                  // cell potentials
    std::vector<S> ExL, ExR, EyB, EyT; // half-cell field components
    std::vector<S> Vb, Jn;             // boundary faces, counterclockwise from (x0, y0)
    double residual = 0.0;

    S sigma(int i, int j) const { return grid.at(i, j) == 1 ? sigma1 : sigma2; }
};

namespace detail {

/// Boundary faces in the order used by boundary::rectangle_geometry:
/// (cell i, cell j, outward normal index 0=-y,1=+x,2=+y,3=-x, face midpoint).
struct BFace {
    int i, j, side;
    Vec2 mid;
};

inline std::vector<BFace> boundary_faces(const PhaseGrid& g) {
    std::vector<BFace> f;
    const double X1 = g.x0 + g.nx * g.h, Y1 = g.y0 + g.ny * g.h;
    for (int i = 0; i < g.nx; ++i) f.push_back({i, 0, 0, {g.x0 + (i + 0.5) * g.h, g.y0}});
    for (int j = 0; j < g.ny; ++j) f.push_back({g.nx - 1, j, 1, {X1, g.y0 + (j + 0.5) * g.h}});
    for (int i = g.nx - 1; i >= 0; --i) f.push_back({i, g.ny - 1, 2, {g.x0 + (i + 0.5) * g.h, Y1}});
    for (int j = g.ny - 1; j >= 0; --j) f.push_back({0, j, 3, {g.x0, g.y0 + (j + 0.5) * g.h}});
    return f;
}

template <class S>
S harmonic(S a, S b) {
    return 2.0 * a * b / (a + b);
}

} // namespace detail

/// Cell-centered finite volumes with harmonic-mean face conductivities and
/// Dirichlet data at boundary face midpoints.
template <class S>
FieldSolution<S> solve(const PhaseGrid& g, S sigma1, S sigma2, const std::function<S(const Vec2&)>& boundary_V) {
    g.check();
    FieldSolution<S> sol;
    sol.grid = g;
    sol.sigma1 = sigma1;
    sol.sigma2 = sigma2;
    const int nx = g.nx, ny = g.ny, N = nx * ny;
    const auto faces = detail::boundary_faces(g);
    // boundary potential per cell side: index cell*4 + side
    std::vector<S> vb_side(static_cast<std::size_t>(N) * 4, S{});
    sol.Vb.resize(faces.size());
    for (std::size_t k = 0; k < faces.size(); ++k) {
        sol.Vb[k] = boundary_V(faces[k].mid);
        vb_side[static_cast<std::size_t>(g.index(faces[k].i, faces[k].j)) * 4 + faces[k].side] = sol.Vb[k];
    }
    std::vector<Eigen::Triplet<S>> trip;
    trip.reserve(static_cast<std::size_t>(N) * 5);
    Eigen::Matrix<S, Eigen::Dynamic, 1> rhs = Eigen::Matrix<S, Eigen::Dynamic, 1>::Zero(N);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int c = g.index(i, j);
            const S sc = sol.sigma(i, j);
            S diag{};
            auto link = [&](int ii, int jj) {
                const S t = detail::harmonic(sc, sol.sigma(ii, jj));
                diag += t;
                trip.emplace_back(c, g.index(ii, jj), -t);
            };
            auto wall = [&](int side) {
                const S t = 2.0 * sc;
                diag += t;
                rhs[c] += t * vb_side[static_cast<std::size_t>(c) * 4 + side];
            };
            if (j > 0) link(i, j - 1); else wall(0);
            if (i < nx - 1) link(i + 1, j); else wall(1);
            if (j < ny - 1) link(i, j + 1); else wall(2);
            if (i > 0) link(i - 1, j); else wall(3);
            trip.emplace_back(c, c, diag);
        }
    Eigen::SparseMatrix<S> A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::Matrix<S, Eigen::Dynamic, 1> x;
    if constexpr (std::is_same_v<S, double>) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<S>> solver(A);
        if (solver.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "factorization failed");
        x = solver.solve(rhs);
    } else {
        Eigen::SparseLU<Eigen::SparseMatrix<S>> solver;
        solver.analyzePattern(A);
        solver.factorize(A);
        if (solver.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "factorization failed");
        x = solver.solve(rhs);
    }
    const double bn = rhs.norm();
    sol.residual = (A * x - rhs).norm() / (bn > 0 ? bn : 1.0);
    if (!(sol.residual < 1e-10)) throw Error(ErrorCode::SingularSystem, "linear solve did not converge");
    sol.V.assign(x.data(), x.data() + N);

    const double hh = 0.5 * g.h;
    sol.ExL.assign(N, S{});
    sol.ExR.assign(N, S{});
    sol.EyB.assign(N, S{});
    sol.EyT.assign(N, S{});
    auto face_V = [&](int i, int j, int ii, int jj) {
        const S a = sol.sigma(i, j), b = sol.sigma(ii, jj);
        return (a * sol.V[g.index(i, j)] + b * sol.V[g.index(ii, jj)]) / (a + b);
    };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int c = g.index(i, j);
            const S v = sol.V[c];
            const S vL = i > 0 ? face_V(i, j, i - 1, j) : vb_side[c * 4 + 3];
            const S vR = i < nx - 1 ? face_V(i, j, i + 1, j) : vb_side[c * 4 + 1];
            const S vB = j > 0 ? face_V(i, j, i, j - 1) : vb_side[c * 4 + 0];
            const S vT = j < ny - 1 ? face_V(i, j, i, j + 1) : vb_side[c * 4 + 2];
            sol.ExL[c] = -(v - vL) / hh;
            sol.ExR[c] = -(vR - v) / hh;
            sol.EyB[c] = -(v - vB) / hh;
            sol.EyT[c] = -(vT - v) / hh;
        }
    sol.Jn.resize(faces.size());
    for (std::size_t k = 0; k < faces.size(); ++k) {
        const auto& f = faces[k];
        const int c = g.index(f.i, f.j);
        sol.Jn[k] = sol.sigma(f.i, f.j) * (sol.V[c] - sol.Vb[k]) / hh;
    }
    return sol;
}

/// Real part (part = 0) or imaginary part (part = 1) of a solution.
template <class S>
RealField real_field(const FieldSolution<S>& s, int part = 0) {
    auto take = [&](const std::vector<S>& v) {
        std::vector<double> out(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) {
            if constexpr (std::is_same_v<S, double>) out[k] = part == 0 ? v[k] : 0.0;
            else out[k] = part == 0 ? v[k].real() : v[k].imag();
        }
        return out;
    };
    return {take(s.ExL), take(s.ExR), take(s.EyB), take(s.EyT), take(s.Vb), take(s.Jn)};
}

/// Boundary dataset of one real field with per-sample phase labels.
inline BoundaryDataset boundary_dataset(const PhaseGrid& g, const RealField& f, std::string label = {}) {
    auto d = boundary::rectangle_geometry(g.nx, g.ny, g.x0, g.y0, g.nx * g.h, g.ny * g.h);
    const auto faces = detail::boundary_faces(g);
    for (std::size_t k = 0; k < faces.size(); ++k) {
        d.samples[k].V = f.Vb[k];
        d.samples[k].JdotN = f.Jn[k];
        d.samples[k].phase = g.at(faces[k].i, faces[k].j);
    }
    d.label = std::move(label);
    return d;
}

template <class S>
BoundaryDataset boundary_dataset(const FieldSolution<S>& s, int part = 0, std::string label = {}) {
    return boundary_dataset(s.grid, real_field(s, part), std::move(label));
}

/// Interior statistics of one or two real fields (two loadings, or the real
/// and imaginary parts of one complex field), computed on half-cells.
struct InteriorStats {
    std::array<Mat2, 2> A{Mat2::Zero(), Mat2::Zero()};                    // A[alpha](m,n) = <chi E_m . E_n>
    std::array<std::array<Vec2, 2>, 2> moment{{{Vec2::Zero(), Vec2::Zero()}, {Vec2::Zero(), Vec2::Zero()}}};                          // moment[alpha][m] = <chi E_m>
    std::array<double, 2> max_intensity{0.0, 0.0};                        // max of sum_m |E_m|^2 per phase
    std::array<std::array<double, 2>, 2> max_component_sq{};              // max |E_m|^2 per phase
    std::array<double, 2> fraction{0.0, 0.0};
};

inline InteriorStats interior_stats(const PhaseGrid& g, const std::vector<RealField>& fields) {
    InteriorStats st;
    const int m = static_cast<int>(fields.size());
    const double w = 0.5 * g.h * g.h / g.area();
    for (int a = 0; a < 2; ++a) st.fraction[a] = g.fraction(a + 1);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int c = g.index(i, j);
            const int a = g.at(i, j) - 1;
            double xs[2] = {0, 0}, ys[2] = {0, 0}; // intensity parts on L/R and B/T halves
            for (int p = 0; p < m; ++p) {
                const auto& f = fields[p];
                st.moment[a][p] += w * Vec2(f.ExL[c] + f.ExR[c], f.EyB[c] + f.EyT[c]);
                for (int q = 0; q < m; ++q) {
                    const auto& e = fields[q];
                    st.A[a](p, q) += w * (f.ExL[c] * e.ExL[c] + f.ExR[c] * e.ExR[c] + f.EyB[c] * e.EyB[c] +
                                          f.EyT[c] * e.EyT[c]);
                }
                const double mx = std::max(f.ExL[c] * f.ExL[c], f.ExR[c] * f.ExR[c]);
                const double my = std::max(f.EyB[c] * f.EyB[c], f.EyT[c] * f.EyT[c]);
                st.max_component_sq[a][p] = std::max(st.max_component_sq[a][p], mx + my);
                xs[0] += f.ExL[c] * f.ExL[c];
                xs[1] += f.ExR[c] * f.ExR[c];
                ys[0] += f.EyB[c] * f.EyB[c];
                ys[1] += f.EyT[c] * f.EyT[c];
            }
            st.max_intensity[a] = std::max(st.max_intensity[a], std::max(xs[0], xs[1]) + std::max(ys[0], ys[1]));
        }
    // boundary faces: normal part from the face flux, tangential part from
    // the prescribed potential along the same side
    const auto faces = detail::boundary_faces(g);
    const std::size_t nb = faces.size();
    for (std::size_t k = 0; k < nb; ++k) {
        const int a = g.at(faces[k].i, faces[k].j) - 1;
        double inten = 0.0;
        const int c = g.index(faces[k].i, faces[k].j);
        for (int p = 0; p < m; ++p) {
            const auto& f = fields[p];
            const std::vector<double>* normal[4] = {&f.EyB, &f.ExR, &f.EyT, &f.ExL};
            const double en = (*normal[faces[k].side])[c];
            const std::size_t kp = (k + 1) % nb, km = (k + nb - 1) % nb;
            double et = 0.0;
            // neighbours on the same side, preferring the same phase so the
            // difference does not straddle an interface
            const auto along = [&](std::size_t q) { return faces[q].side == faces[k].side; };
            const auto same_phase = [&](std::size_t q) { return g.at(faces[q].i, faces[q].j) - 1 == a; };
            bool same_p = along(kp), same_m = along(km);
            if ((same_p && same_phase(kp)) || (same_m && same_phase(km))) {
                same_p = same_p && same_phase(kp);
                same_m = same_m && same_phase(km);
            }
            if (same_p && same_m) et = (f.Vb[kp] - f.Vb[km]) / (2.0 * g.h);
            else if (same_p) et = (f.Vb[kp] - f.Vb[k]) / g.h;
            else if (same_m) et = (f.Vb[k] - f.Vb[km]) / g.h;
            const double sq = en * en + et * et;
            st.max_component_sq[a][p] = std::max(st.max_component_sq[a][p], sq);
            inten += sq;
        }
        st.max_intensity[a] = std::max(st.max_intensity[a], inten);
    }
    return st;
}

/// Largest cell-averaged |E| per phase, split into cells at 4-connected
/// distance >= 3 from the other phase or the outer boundary and the band of
/// cells closer than that. Away from the band the cell field is the central
/// difference of a discrete harmonic potential, so its magnitude obeys a
/// discrete maximum principle.
struct CellMaxima {
    std::array<double, 2> interior{0.0, 0.0};
    std::array<double, 2> band{0.0, 0.0};
};

inline std::vector<int> boundary_distance(const PhaseGrid& g) {
    std::vector<int> d(g.phase.size(), -1);
    std::vector<int> queue;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int p = g.at(i, j);
            bool edge = i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1;
            if (!edge)
                edge = g.at(i - 1, j) != p || g.at(i + 1, j) != p || g.at(i, j - 1) != p || g.at(i, j + 1) != p;
            if (edge) {
                d[g.index(i, j)] = 1;
                queue.push_back(g.index(i, j));
            }
        }
    for (std::size_t q = 0; q < queue.size(); ++q) {
        const int c = queue[q], i = c % g.nx, j = c / g.nx;
        const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
        for (const auto& n : nb) {
            if (n[0] < 0 || n[1] < 0 || n[0] >= g.nx || n[1] >= g.ny) continue;
            const int k = g.index(n[0], n[1]);
            if (d[k] < 0) {
                d[k] = d[c] + 1;
                queue.push_back(k);
            }
        }
    }
    return d;
}

template <class S>
CellMaxima cell_maxima(const FieldSolution<S>& s) {
    const auto& g = s.grid;
    const auto dist = boundary_distance(g);
    CellMaxima cm;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int c = g.index(i, j);
            const double ex = std::abs(0.5 * (s.ExL[c] + s.ExR[c]));
            const double ey = std::abs(0.5 * (s.EyB[c] + s.EyT[c]));
            const double e = std::hypot(ex, ey);
            auto& slot = dist[c] >= 3 ? cm.interior[g.at(i, j) - 1] : cm.band[g.at(i, j) - 1];
            slot = std::max(slot, e);
        }
    return cm;
}

/// Amount by which an interior maximum exceeds the band maximum of its phase.
inline double maximum_principle_violation(const CellMaxima& cm) {
    double v = 0.0;
    for (int a = 0; a < 2; ++a)
        if (cm.interior[a] > 0.0) v = std::max(v, cm.interior[a] - cm.band[a]);
    return v;
}

/// Base and perturbed solutions for the per-phase energy recovery.
template <class S>
std::pair<FieldSolution<S>, FieldSolution<S>> perturbed_pair(const PhaseGrid& g, S sigma1, S sigma2, S d1, S d2,
                                                             const std::function<S(const Vec2&)>& bc) {
    return {solve<S>(g, sigma1, sigma2, bc), solve<S>(g, sigma1 + d1, sigma2 + d2, bc)};
}

} // namespace breakdown::forward
