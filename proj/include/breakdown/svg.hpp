#pragma once

#include "breakdown/region.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace breakdown::svg {

struct Viewport {
    double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
    int width = 640, height = 480;

    void check() const {
        if (!(xmax > xmin) || !(ymax > ymin) || width <= 0 || height <= 0)
            throw Error(ErrorCode::DegenerateViewport, "viewport has zero extent");
    }
};

enum class Style { Feasible, Compatible, Outline };

struct Layer {
    geom::Region2 region;
    Style style = Style::Outline;
    std::string color = "#1f77b4";
    std::string caption;
    bool assume_convex = false; // convex even if a quadratic piece is not concave (PSD slices)
};

struct Marker {
    Vec2 p;
    std::string color = "#000000";
    std::string caption;
};

struct Polyline {
    std::vector<Vec2> points;
    std::string color = "#000000";
    bool closed = false;
    bool dashed = false;
};

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s(buf);
    return s == "-0.000" ? "0.000" : s;
}

/// Boundary of a convex region seen from an interior point, sampled at
/// `count` equally spaced directions and clipped to the viewport box.
inline std::vector<Vec2> convex_outline(const geom::Region2& r, const Vec2& interior, const Viewport& vp,
                                        int count = 1024) {
    std::vector<Vec2> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
        const double th = 2.0 * std::numbers::pi * k / count;
        const Vec2 d(std::cos(th), std::sin(th));
        double rmax = geom::kInf;
        auto cap = [&](double lim) {
            if (lim >= 0.0 && lim < rmax) rmax = lim;
        };
        if (d.x() > 0) cap((vp.xmax - interior.x()) / d.x());
        if (d.x() < 0) cap((vp.xmin - interior.x()) / d.x());
        if (d.y() > 0) cap((vp.ymax - interior.y()) / d.y());
        if (d.y() < 0) cap((vp.ymin - interior.y()) / d.y());
        for (const auto& l : r.linear) {
            const double ad = l.a * d.x() + l.b * d.y();
            if (ad > 0) cap(std::max(0.0, geom::slack(l, interior)) / ad);
        }
        for (const auto& q : r.quadratic) {
            const Mat2 A = q.M.topLeftCorner<2, 2>();
            const Vec2 g = q.M.topRightCorner<2, 1>();
            const double q0 = std::max(0.0, geom::slack(q, interior));
            const double ad = d.dot(A * d);
            const double bd = d.dot(A * interior + g);
            if (ad < 0) {
                cap((-bd - std::sqrt(std::max(0.0, bd * bd - ad * q0))) / ad);
            } else if (ad == 0.0 && bd < 0) {
                cap(-q0 / (2.0 * bd));
            }
        }
        pts.push_back(interior + rmax * d);
    }
    return pts;
}

/// Zero level set of an elliptic quadratic constraint, or empty if the
/// constraint is not an ellipse.
inline std::vector<Vec2> ellipse_curve(const geom::QuadraticIneq2& q, int count = 1024) {
    const Mat2 A = q.M.topLeftCorner<2, 2>();
    const Vec2 g = q.M.topRightCorner<2, 1>();
    Eigen::SelfAdjointEigenSolver<Mat2> es(A);
    if (es.eigenvalues().maxCoeff() >= 0.0) return {};
    const Vec2 v0 = -A.inverse() * g;
    const double qmax = geom::slack(q, v0);
    if (qmax <= 0.0) return {};
    std::vector<Vec2> pts;
    for (int k = 0; k < count; ++k) {
        const double th = 2.0 * std::numbers::pi * k / count;
        Vec2 p = v0;
        for (int i = 0; i < 2; ++i) {
            const double lam = -es.eigenvalues()[i];
            const double w = i == 0 ? std::cos(th) : std::sin(th);
            p += es.eigenvectors().col(i) * w * std::sqrt(qmax / lam);
        }
        pts.push_back(p);
    }
    return pts;
}

class Canvas {
public:
    explicit Canvas(Viewport vp) : vp_(vp) { vp_.check(); }

    Vec2 map(const Vec2& p) const {
        return {(p.x() - vp_.xmin) / (vp_.xmax - vp_.xmin) * vp_.width,
                vp_.height - (p.y() - vp_.ymin) / (vp_.ymax - vp_.ymin) * vp_.height};
    }

    void add(const Layer& l) { layers_.push_back(l); }
    void add(const Marker& m) { markers_.push_back(m); }
    void add(const Polyline& p) { lines_.push_back(p); }

    std::string str() const {
        std::ostringstream o;
        o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << vp_.width << "\" height=\"" << vp_.height
          << "\" viewBox=\"0 0 " << vp_.width << ' ' << vp_.height << "\">\n";
        o << "<defs>\n";
        for (std::size_t i = 0; i < layers_.size(); ++i)
            if (layers_[i].style == Style::Compatible)
                o << "<pattern id=\"hatch" << i
                  << "\" patternUnits=\"userSpaceOnUse\" width=\"8\" height=\"8\" patternTransform=\"rotate(45)\">"
                  << "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"8\" stroke=\"" << layers_[i].color
                  << "\" stroke-width=\"2\"/></pattern>\n";
        o << "</defs>\n";
        o << "<rect x=\"0\" y=\"0\" width=\"" << vp_.width << "\" height=\"" << vp_.height
          << "\" fill=\"#ffffff\"/>\n";
        for (std::size_t i = 0; i < layers_.size(); ++i) emit_layer(o, layers_[i], i);
        for (const auto& l : lines_) emit_polyline(o, l);
        for (const auto& m : markers_) {
            const Vec2 p = map(m.p);
            o << "<circle cx=\"" << num(p.x()) << "\" cy=\"" << num(p.y()) << "\" r=\"3\" fill=\"" << m.color
              << "\"/>\n";
            if (!m.caption.empty())
                o << "<text x=\"" << num(p.x() + 5) << "\" y=\"" << num(p.y() - 5)
                  << "\" font-size=\"10\">" << m.caption << "</text>\n";
        }
        o << "</svg>\n";
        return o.str();
    }

private:
    void emit_points(std::ostringstream& o, const std::vector<Vec2>& pts) const {
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const Vec2 p = map(pts[k]);
            o << (k ? " " : "") << num(p.x()) << ',' << num(p.y());
        }
    }

    void emit_polyline(std::ostringstream& o, const Polyline& l) const {
        if (l.points.empty()) return;
        o << '<' << (l.closed ? "polygon" : "polyline") << " points=\"";
        emit_points(o, l.points);
        o << "\" fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1.5\""
          << (l.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    }

    void emit_layer(std::ostringstream& o, const Layer& l, std::size_t idx) const {
        o << "<g>";
        if (!l.caption.empty()) o << "<title>" << l.caption << "</title>";
        o << '\n';
        const auto res = geom::is_empty(l.region);
        const bool convex = l.assume_convex || std::all_of(l.region.quadratic.begin(), l.region.quadratic.end(),
                                                           geom::detail::is_concave);
        if (res.status == geom::Emptiness::Nonempty && convex) {
            const auto pts = convex_outline(l.region, res.witness, vp_);
            o << "<polygon points=\"";
            emit_points(o, pts);
            o << "\" ";
            switch (l.style) {
            case Style::Feasible:
                o << "fill=\"" << l.color << "\" fill-opacity=\"0.35\" stroke=\"" << l.color << '"';
                break;
            case Style::Compatible:
                o << "fill=\"url(#hatch" << idx << ")\" stroke=\"" << l.color << '"';
                break;
            case Style::Outline:
                o << "fill=\"none\" stroke=\"" << l.color << '"';
                break;
            }
            o << " stroke-width=\"1\"/>\n";
        }
        for (const auto& q : l.region.quadratic) {
            Polyline pl{ellipse_curve(q), l.color, true, true};
            emit_polyline(o, pl);
        }
        o << "</g>\n";
    }

    Viewport vp_;
    std::vector<Layer> layers_;
    std::vector<Marker> markers_;
    std::vector<Polyline> lines_;
};

inline std::string render(const std::vector<Layer>& layers, const Viewport& vp,
                          const std::vector<Marker>& markers = {}) {
    Canvas c(vp);
    for (const auto& l : layers) c.add(l);
    for (const auto& m : markers) c.add(m);
    return c.str();
}

} // namespace breakdown::svg
