#pragma once

#include "breakdown/elasticity.hpp"
#include "breakdown/forward_solver.hpp"
#include "breakdown/io.hpp"
#include "breakdown/svg.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace cli {

using namespace breakdown;
using io::json;

inline constexpr const char* kVersion = "1.0.0";

enum Exit { Safe = 0, Malformed = 1, Certified = 2, Inconclusive = 3 };

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::InvalidInput, "digest failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

/// Report skeleton shared by every command. Input files are recorded with
/// their SHA-256 so a report identifies exactly what it analysed.
class Report {
public:
    explicit Report(std::string command) {
        j_["tool"] = "breakdown-cli";
        j_["version"] = kVersion;
        j_["command"] = std::move(command);
        j_["inputs"] = json::array();
        j_["tolerances"] = json::object();
    }

    void input(const std::string& role, const std::string& path) {
        j_["inputs"].push_back({{"role", role}, {"path", path}, {"sha256", sha256_hex(read_file(path))}});
    }
    void tolerance(const std::string& name, double v) { j_["tolerances"][name] = v; }
    json& operator[](const char* key) { return j_[key]; }

    /// Stamps the outcome and writes the report (stdout when path is empty).
    int finish(int code, const std::string& path) {
        static const char* names[] = {"safe", "malformed", "certified", "inconclusive"};
        j_["outcome"] = names[code];
        j_["exit_code"] = code;
        const std::string text = j_.dump(2) + "\n";
        if (path.empty()) std::cout << text;
        else io::write_text(path, text);
        return code;
    }

private:
    json j_;
};

inline json load(const std::string& path) { return io::load_json(path); }

inline double num(const json& j, const char* key, const std::string& where) {
    return io::detail::number(io::detail::field(j, key, where), where + "." + key);
}

inline double num_or(const json& j, const char* key, double fallback, const std::string& where) {
    return j.contains(key) ? io::detail::number(j.at(key), where + "." + key) : fallback;
}

/// A conductivity written as a number or as [re, im].
inline cplx conductivity(const json& j, const char* key, const std::string& where) {
    const json& v = io::detail::field(j, key, where);
    if (v.is_array()) return io::detail::complex(v, where + "." + key);
    return {io::detail::number(v, where + "." + key), 0.0};
}

inline void fractions(const json& j, double& f1, double& f2, const std::string& where) {
    f1 = num(j, "f1", where);
    f2 = num_or(j, "f2", 1.0 - f1, where);
    if (!(f1 > 0.0) || !(f2 > 0.0) || std::abs(f1 + f2 - 1.0) > 1e-9)
        throw Error(ErrorCode::InvalidInput, where + ": volume fractions must be positive and sum to 1");
}

inline PhasePair phase_pair(const json& j) {
    const std::string w = "materials";
    PhasePair p;
    p.sigma1 = num(j, "sigma1", w);
    p.sigma2 = num(j, "sigma2", w);
    p.c1 = num(j, "c1", w);
    p.c2 = num(j, "c2", w);
    fractions(j, p.f1, p.f2, w);
    if (!(p.sigma1 > 0.0) || !(p.sigma2 > 0.0))
        throw Error(ErrorCode::InvalidInput, "materials: conductivities must be positive");
    return p;
}

inline ComplexPhasePair complex_pair(const json& j) {
    const std::string w = "materials";
    ComplexPhasePair p;
    p.sigma1 = conductivity(j, "sigma1", w);
    p.sigma2 = conductivity(j, "sigma2", w);
    p.c1 = num(j, "c1", w);
    p.c2 = num(j, "c2", w);
    fractions(j, p.f1, p.f2, w);
    return p;
}

inline elastic::ElasticPair elastic_pair(const json& j) {
    const std::string w = "materials";
    elastic::ElasticPair p;
    p.kappa1 = num(j, "kappa1", w);
    p.kappa2 = num(j, "kappa2", w);
    p.mu1 = num(j, "mu1", w);
    p.mu2 = num(j, "mu2", w);
    p.k1 = num(j, "k1", w);
    p.k2 = num(j, "k2", w);
    fractions(j, p.f1, p.f2, w);
    return p;
}

inline json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

inline json mat(const Mat2& m) { return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})}); }

inline json moments_json(const MomentSet& m) { return {{"E", vec(m.E)}, {"J", vec(m.J)}, {"power", m.power}}; }

inline json verdict(const CriterionVerdict& v) { return io::to_json(v); }

// ------------------------------------------------------------ grid spec

/// Phase grid from JSON: kind laminate | checkerboard | disks | mask.
inline forward::PhaseGrid grid_from_json(const json& j) {
    const std::string w = "grid";
    const json& kind_j = io::detail::field(j, "kind", w);
    if (!kind_j.is_string()) throw Error(ErrorCode::InvalidInput, "grid.kind: expected a string");
    const std::string kind = kind_j.get<std::string>();
    if (kind == "mask") {
        const json& rows = io::detail::field(j, "rows", w);
        if (!rows.is_array() || rows.empty()) throw Error(ErrorCode::InvalidInput, "grid.rows: expected strings");
        forward::PhaseGrid g;
        g.ny = static_cast<int>(rows.size());
        g.nx = static_cast<int>(rows[0].get<std::string>().size());
        g.h = 1.0 / std::max(g.nx, g.ny);
        g.phase.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);
        for (int r = 0; r < g.ny; ++r) {
            const std::string row = rows[r].get<std::string>();
            if (static_cast<int>(row.size()) != g.nx)
                throw Error(ErrorCode::InvalidInput, "grid.rows[" + std::to_string(r) + "]: ragged row");
            // first row is the top of the body
            for (int i = 0; i < g.nx; ++i) g.phase[g.index(i, g.ny - 1 - r)] = static_cast<std::uint8_t>(row[i] - '0');
        }
        g.check();
        return g;
    }
    const int n = static_cast<int>(num(j, "n", w));
    if (n < 2 || n > 4096) throw Error(ErrorCode::InvalidInput, "grid.n: expected 2..4096");
    if (kind == "laminate") {
        const int axis = static_cast<int>(num_or(j, "axis", 0.0, w));
        if (axis != 0 && axis != 1) throw Error(ErrorCode::InvalidInput, "grid.axis: expected 0 or 1");
        return forward::laminate(n, axis, num_or(j, "fraction", 0.5, w));
    }
    if (kind == "checkerboard") return forward::checkerboard(n, static_cast<int>(num_or(j, "tiles", 2.0, w)));
    if (kind == "disks") {
        const json& ds = io::detail::field(j, "disks", w);
        std::vector<std::pair<Vec2, double>> disks;
        for (std::size_t k = 0; k < ds.size(); ++k) {
            const std::string dw = "grid.disks[" + std::to_string(k) + "]";
            disks.emplace_back(io::detail::vec2(io::detail::field(ds[k], "center", dw), dw + ".center"),
                               num(ds[k], "radius", dw));
        }
        return forward::rasterize(n, [&](const Vec2& p) {
            for (const auto& [c, r] : disks)
                if ((p - c).norm() < r) return 1;
            return 2;
        });
    }
    throw Error(ErrorCode::InvalidInput, "grid.kind: unknown kind '" + kind + "'");
}

// ------------------------------------------------------------ plotting

/// Viewport around a set of points with a relative margin.
inline svg::Viewport fit(const std::vector<Vec2>& pts, double pad = 0.15) {
    svg::Viewport vp;
    if (pts.empty()) return vp;
    double x0 = pts[0].x(), x1 = x0, y0 = pts[0].y(), y1 = y0;
    for (const auto& p : pts) {
        x0 = std::min(x0, p.x());
        x1 = std::max(x1, p.x());
        y0 = std::min(y0, p.y());
        y1 = std::max(y1, p.y());
    }
    const double span = std::max({x1 - x0, y1 - y0, 1e-9});
    vp.xmin = x0 - pad * span;
    vp.xmax = x1 + pad * span;
    vp.ymin = y0 - pad * span;
    vp.ymax = y1 + pad * span;
    return vp;
}

} // namespace cli
