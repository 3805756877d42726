#pragma once

// JSON and CSV serialization. Requires nlohmann/json on the include path.

#include "breakdown/boundary_data.hpp"
#include "breakdown/e_omega.hpp"
#include "breakdown/region.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <utility>

namespace breakdown::io {

using json = nlohmann::ordered_json;

/// Parse a JSON file; parse errors carry the line number.
inline json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw Error(ErrorCode::InvalidInput, path + ":" + std::to_string(line) + ": " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
    out << text;
}

namespace detail {

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw Error(ErrorCode::InvalidInput, where + ": expected a number");
    return j.get<double>();
}

inline const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw Error(ErrorCode::InvalidInput, where + "." + key + ": missing");
    return j.at(key);
}

inline Vec2 vec2(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::InvalidInput, where + ": expected [x, y]");
    return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

inline cplx complex(const json& j, const std::string& where) {
    const Vec2 v = vec2(j, where);
    return {v.x(), v.y()};
}

inline json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

} // namespace detail

/// Boundary dataset. When `imag` is true the optional fields V_im and JdotN_im
/// are read instead of V and JdotN. Without `require_potential`, missing
/// potential and flux entries read as zero (elastic data).
inline BoundaryDataset dataset_from_json(const json& j, bool imag = false, std::string label = {},
                                         bool require_potential = true) {
    using namespace detail;
    BoundaryDataset d;
    d.label = std::move(label);
    d.area = number(field(j, "area", "dataset"), "dataset.area");
    const json& ss = field(j, "samples", "dataset");
    if (!ss.is_array()) throw Error(ErrorCode::InvalidInput, "dataset.samples: expected an array");
    for (std::size_t i = 0; i < ss.size(); ++i) {
        const std::string w = "samples[" + std::to_string(i) + "]";
        const json& s = ss[i];
        BoundarySample b;
        b.x = vec2(field(s, "x", w), w + ".x");
        b.n = vec2(field(s, "n", w), w + ".n");
        b.t = vec2(field(s, "t", w), w + ".t");
        b.ds = number(field(s, "ds", w), w + ".ds");
        const char* vk = imag ? "V_im" : "V";
        const char* jk = imag ? "JdotN_im" : "JdotN";
        if (require_potential || s.contains(vk)) b.V = number(field(s, vk, w), w + "." + vk);
        if (require_potential || s.contains(jk)) b.JdotN = number(field(s, jk, w), w + "." + jk);
        if (s.contains("u")) b.u = vec2(s["u"], w + ".u");
        if (s.contains("traction")) b.traction = vec2(s["traction"], w + ".traction");
        if (s.contains("phase")) b.phase = static_cast<int>(number(s["phase"], w + ".phase"));
        d.samples.push_back(std::move(b));
    }
    boundary::validate(d);
    return d;
}

inline json dataset_to_json(const BoundaryDataset& d, const BoundaryDataset* imag = nullptr) {
    json j;
    j["area"] = d.area;
    json ss = json::array();
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        const auto& s = d.samples[i];
        json o;
        o["x"] = detail::to_json(s.x);
        o["n"] = detail::to_json(s.n);
        o["t"] = detail::to_json(s.t);
        o["ds"] = s.ds;
        o["V"] = s.V;
        o["JdotN"] = s.JdotN;
        if (imag) {
            o["V_im"] = imag->samples[i].V;
            o["JdotN_im"] = imag->samples[i].JdotN;
        }
        if (s.u) o["u"] = detail::to_json(*s.u);
        if (s.traction) o["traction"] = detail::to_json(*s.traction);
        if (s.phase) o["phase"] = s.phase;
        ss.push_back(std::move(o));
    }
    j["samples"] = std::move(ss);
    return j;
}

inline eomega::RationalGenerator generator_from_json(const json& j) {
    using namespace detail;
    eomega::RationalGenerator g;
    try {
        const json& p = field(j, "poles", "generator");
        const json& r = field(j, "residues", "generator");
        if (!p.is_array() || !r.is_array()) throw Error(ErrorCode::InvalidGenerator, "poles/residues must be arrays");
        for (std::size_t i = 0; i < p.size(); ++i) g.poles.push_back(complex(p[i], "poles[" + std::to_string(i) + "]"));
        for (std::size_t i = 0; i < r.size(); ++i)
            g.residues.push_back(complex(r[i], "residues[" + std::to_string(i) + "]"));
        g.c = j.contains("c") ? number(j["c"], "generator.c") : 0.0;
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidGenerator, e.what());
    }
    g.check();
    return g;
}

inline json generator_to_json(const eomega::RationalGenerator& g) {
    json j;
    json p = json::array(), r = json::array();
    for (const auto& v : g.poles) p.push_back(json::array({v.real(), v.imag()}));
    for (const auto& v : g.residues) r.push_back(json::array({v.real(), v.imag()}));
    j["poles"] = std::move(p);
    j["residues"] = std::move(r);
    j["c"] = g.c;
    return j;
}

inline std::string curve_csv(const eomega::InclusionCurve& c) {
    std::ostringstream o;
    o.precision(17);
    o << "y,x_plus,x_minus\n";
    for (std::size_t k = 0; k < c.y.size(); ++k) o << c.y[k] << ',' << c.x_plus[k] << ',' << c.x_minus[k] << '\n';
    return o.str();
}

inline json to_json(const CriterionVerdict& v) {
    json j;
    j["violated"] = v.violated;
    j["margin"] = v.margin;
    if (!v.which.empty()) j["which"] = v.which;
    return j;
}

/// Constraints as coefficient lists; quadratic forms as row-major 3x3 matrices.
inline json to_json(const geom::Region2& r) {
    json j;
    j["label"] = r.label;
    json lin = json::array();
    for (const auto& l : r.linear)
        lin.push_back({{"label", l.label}, {"a", l.a}, {"b", l.b}, {"c", l.c}, {"tightening", l.tightening}});
    json quad = json::array();
    for (const auto& q : r.quadratic) {
        json m = json::array();
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) m.push_back(q.M(i, k));
        quad.push_back({{"label", q.label}, {"M", m}, {"tightening", q.tightening}});
    }
    j["linear"] = std::move(lin);
    j["quadratic"] = std::move(quad);
    return j;
}

inline json to_json(const geom::Region3& r) {
    json j;
    j["label"] = r.label;
    json lin = json::array();
    for (const auto& l : r.linear)
        lin.push_back({{"label", l.label},
                       {"a", json::array({l.a.x(), l.a.y(), l.a.z()})},
                       {"c", l.c},
                       {"tightening", l.tightening}});
    json psd = json::array();
    for (const auto& q : r.psd) {
        json ms = json::array();
        for (const auto& M : q.M) ms.push_back(json::array({M(0, 0), M(0, 1), M(1, 0), M(1, 1)}));
        psd.push_back({{"label", q.label}, {"M", ms}, {"tightening", q.tightening}});
    }
    json box = json::array();
    for (int i = 0; i < 3; ++i) {
        const auto bound = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
        box.push_back(json::array({bound(r.lo[i]), bound(r.hi[i])}));
    }
    j["box"] = std::move(box);
    j["linear"] = std::move(lin);
    j["psd"] = std::move(psd);
    return j;
}

template <int N>
json to_json(const geom::EmptinessResult<N>& e) {
    json j;
    j["status"] = geom::to_string(e.status);
    j["depth"] = std::isfinite(e.depth) ? json(e.depth) : json(nullptr);
    json w = json::array();
    for (int i = 0; i < N; ++i) w.push_back(e.witness[i]);
    j["witness"] = std::move(w);
    if (!e.binding.empty()) j["binding"] = e.binding;
    return j;
}

} // namespace breakdown::io
