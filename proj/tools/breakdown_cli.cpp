#include "breakdown/complex_quasistatic.hpp"
#include "breakdown/criteria_real.hpp"
#include "breakdown/e_omega.hpp"
#include "breakdown/two_bc.hpp"
#include "cli_support.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>

using namespace cli;
namespace fs = std::filesystem;

namespace {

int outcome(bool violated, bool inconclusive) {
    if (violated) return Certified;
    return inconclusive ? Inconclusive : Safe;
}

json inconclusive_entry(const Error& e) { return {{"status", "inconclusive"}, {"reason", e.what()}}; }

// ------------------------------------------------------------ analyze-real

struct RealOpts {
    std::string dataset, materials, perturbed, out;
    std::vector<double> delta;
    double tol = boundary::kDefaultFluxTolerance;
};

int analyze_real(const RealOpts& o) {
    Report rep("analyze-real");
    rep.input("dataset", o.dataset);
    rep.input("materials", o.materials);
    if (!o.perturbed.empty()) rep.input("perturbed", o.perturbed);
    rep.tolerance("flux", o.tol);
    const auto d = io::dataset_from_json(load(o.dataset));
    const auto p = phase_pair(load(o.materials));
    const auto m = boundary::moments(d, o.tol);
    rep["moments"] = moments_json(m);
    rep["order"] = real::to_string(real::breakdown_order(p));

    json crit = json::object();
    bool violated = false;
    const bool labelled =
        std::all_of(d.samples.begin(), d.samples.end(), [](const BoundarySample& s) { return s.phase == 1 || s.phase == 2; });
    if (labelled) {
        const auto r = real::boundary_field_criterion(d, p);
        json j = verdict(r.verdict);
        j["worst_sample"] = r.worst_index;
        j["worst_point"] = vec(d.samples[r.worst_index].x);
        j["field_at_worst"] = r.field_magnitude[r.worst_index];
        crit["boundary_field"] = j;
        violated |= r.verdict.violated;
    } else {
        crit["boundary_field"] = {{"skipped", "samples carry no phase labels"}};
    }
    if (p.sigma1 != p.sigma2) {
        const auto r = real::phase_average_criterion(m, p);
        json j = verdict(r.verdict);
        j["E1"] = vec(r.averages.E1);
        j["E2"] = vec(r.averages.E2);
        j["margin1"] = r.margin1;
        j["margin2"] = r.margin2;
        crit["phase_average"] = j;
        violated |= r.verdict.violated;
    } else {
        crit["phase_average"] = {{"skipped", "phase averages need sigma1 != sigma2"}};
    }
    const auto pw = real::power_criterion(m, p);
    crit["power"] = verdict(pw);
    violated |= pw.violated;
    if (!o.perturbed.empty()) {
        if (o.delta.size() != 2) throw Error(ErrorCode::InvalidInput, "--delta needs two values d1,d2");
        const auto d2 = io::dataset_from_json(load(o.perturbed));
        boundary::check_same_geometry(d, d2);
        const auto r =
            real::perturbation_criterion(m.power, boundary::average_power(d2), o.delta[0], o.delta[1], d.area, p);
        json j = verdict(r.verdict);
        j["energy1"] = r.energy1;
        j["energy2"] = r.energy2;
        j["margin1"] = r.margin1;
        j["margin2"] = r.margin2;
        crit["perturbation"] = j;
        violated |= r.verdict.violated;
    }
    rep["criteria"] = crit;
    return rep.finish(outcome(violated, false), o.out);
}

// ------------------------------------------------------------ analyze-two-bc

struct TwoBcOpts {
    std::string dataset1, dataset2, materials, out, plot;
    std::vector<double> weights{1.0, 1.0};
    bool optimize = false, loose = false;
    double tol = boundary::kDefaultFluxTolerance;
};

int analyze_two_bc(const TwoBcOpts& o) {
    Report rep("analyze-two-bc");
    rep.input("dataset1", o.dataset1);
    rep.input("dataset2", o.dataset2);
    rep.input("materials", o.materials);
    rep.tolerance("flux", o.tol);
    rep.tolerance("slack", geom::kSlackTol);
    if (o.weights.size() != 2 || o.weights[0] < 0.0 || o.weights[1] < 0.0 || o.weights[0] + o.weights[1] <= 0.0)
        throw Error(ErrorCode::InvalidInput, "--weights needs two nonnegative values");
    const auto d1 = io::dataset_from_json(load(o.dataset1));
    const auto d2 = io::dataset_from_json(load(o.dataset2));
    boundary::check_same_geometry(d1, d2);
    const auto p = phase_pair(load(o.materials));
    const Mat2 P = boundary::cross_powers(d1, d2);
    const auto sp = twobc::split_powers(P);
    const auto pm = twobc::phase_moments(boundary::moments(d1, o.tol), boundary::moments(d2, o.tol), p);
    const auto nl = boundary::null_lagrangians(d1, d2);
    rep["cross_powers"] = mat(P);
    rep["phase_moments"] = {{"phase1", {vec(pm.e[0][0]), vec(pm.e[0][1])}}, {"phase2", {vec(pm.e[1][0]), vec(pm.e[1][1])}}};
    rep["null_lagrangians"] = {{"field", nl.e_rperp_e}, {"current", nl.j_rperp_j}};

    bool violated = false, inconclusive = false;
    const auto compat = twobc::compatible_prism(p, sp, !o.loose);
    const auto feas = twobc::psd_feasible_region(p, sp, pm);
    std::optional<twobc::Certificate3> c3;
    try {
        c3 = twobc::breakdown_certificate_3d(p, sp, pm, !o.loose);
        json j = verdict(c3->verdict);
        j["emptiness"] = io::to_json(c3->emptiness);
        j["weighted_determinant_margin"] = c3->weighted_det_margin;
        json sc = json::array();
        for (const auto& s : c3->scalar) sc.push_back({{"tr11", s.tr11}, {"tr22", s.tr22}, {"product", s.product}});
        j["scalar_checks"] = sc;
        rep["prism_certificate"] = j;
        violated |= c3->verdict.violated;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NumericalInconclusive) throw;
        rep["prism_certificate"] = inconclusive_entry(e);
        inconclusive = true;
    }
    rep["regions"] = {{"compatible", io::to_json(compat)}, {"feasible", io::to_json(feas)}};

    const auto c2 = twobc::improved_certificate_2d(p, sp, pm, nl, {o.weights[0], o.weights[1]}, o.optimize);
    json j = verdict(c2.verdict);
    j["tau"] = {c2.tau[0], c2.tau[1]};
    j["per_phase_margin"] = {c2.yfree_margin[0], c2.yfree_margin[1]};
    j["weighted_margin"] = c2.weighted_margin;
    j["weighted_y1"] = c2.weighted_y1;
    j["weights"] = {c2.weights[0], c2.weights[1]};
    rep["rotation_certificate"] = j;
    violated |= c2.verdict.violated;

    if (!o.plot.empty()) {
        // slice through the off-diagonal coordinate of the witness (or the
        // measured value split evenly when there is none)
        const double y0 = c3 ? c3->emptiness.witness[1] : sp.p12 / (p.sigma1 + p.sigma2);
        const double K = std::max({p.c1 * p.c1 * p.f1, pm.D(0)(0, 0) / p.f1, pm.D(0)(1, 1) / p.f1,
                                   std::abs(sp.p11) / p.sigma1, std::abs(sp.p22) / p.sigma1, 1e-12});
        auto vp = fit({Vec2(0.0, 0.0), Vec2(K, K)});
        svg::Layer lf{geom::slice(feas, 1, y0), svg::Style::Feasible, "#1f77b4", "variance PSD", true};
        svg::Layer lc{geom::slice(compat, 1, y0), svg::Style::Compatible, "#d62728", "compatible prism", true};
        std::vector<svg::Marker> marks;
        if (c3 && c3->emptiness.status == geom::Emptiness::Nonempty)
            marks.push_back({Vec2(c3->emptiness.witness[0], c3->emptiness.witness[2]), "#000000", "witness"});
        io::write_text(o.plot, svg::render({lf, lc}, vp, marks));
        rep["plot"] = {{"path", o.plot}, {"slice_y", y0}};
    }
    return rep.finish(outcome(violated, inconclusive), o.out);
}

// ------------------------------------------------------------ analyze-complex

struct ComplexOpts {
    std::string dataset, materials, out, plot;
};

int analyze_complex(const ComplexOpts& o) {
    Report rep("analyze-complex");
    rep.input("dataset", o.dataset);
    rep.input("materials", o.materials);
    rep.tolerance("flux", boundary::kDefaultFluxTolerance);
    rep.tolerance("slack", geom::kSlackTol);
    const json dj = load(o.dataset);
    const auto re = io::dataset_from_json(dj, false, "re");
    const auto im = io::dataset_from_json(dj, true, "im");
    const auto p = complex_pair(load(o.materials));
    const auto meas = cplx_qs::measure(re, im);
    const auto k = cplx_qs::split_coefficients(p, meas.P);
    const auto pm = cplx_qs::phase_moments(meas, p);
    rep["cross_powers"] = mat(meas.P);
    rep["coefficients"] = {{"beta", k.beta}, {"gamma", k.gamma}, {"psi1", k.psi1}, {"psi2", k.psi2},
                           {"xi1", k.xi1},   {"xi2", k.xi2},     {"eta1", k.eta1}, {"eta2", k.eta2}};
    json inv = json::array();
    for (int a = 0; a < 2; ++a) {
        const double f = a == 0 ? p.f1 : p.f2;
        const auto e = cplx_qs::ellipse_invariants(pm.e[a][0] / f, pm.e[a][1] / f);
        inv.push_back({{"phase", a + 1}, {"axis1", e.axis1}, {"axis2", e.axis2}, {"intensity", e.intensity}});
    }
    rep["phase_average_ellipses"] = inv;

    const auto compat = cplx_qs::compatible_region(p, k);
    const auto feas = cplx_qs::feasible_ellipses(p, k, pm);
    const auto tau = cplx_qs::tau(p, meas, pm);
    const auto sharp = cplx_qs::feasible_ellipses(p, k, pm, tau);
    rep["regions"] = {{"compatible", io::to_json(compat)}, {"feasible", io::to_json(feas)}, {"feasible_sharpened", io::to_json(sharp)}};
    rep["tau"] = {tau[0], tau[1]};
    bool violated = false, inconclusive = false;
    for (const auto& [key, region] : {std::pair{"ellipse_certificate", &feas}, std::pair{"rotation_certificate", &sharp}}) {
        try {
            const auto c = cplx_qs::nonlinearity_certificate(compat, *region);
            json j = verdict(c.verdict);
            j["emptiness"] = io::to_json(c.emptiness);
            rep[key] = j;
            violated |= c.verdict.violated;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NumericalInconclusive) throw;
            rep[key] = inconclusive_entry(e);
            inconclusive = true;
        }
    }
    if (!o.plot.empty()) {
        std::vector<Vec2> pts{Vec2::Zero()};
        for (const auto& q : feas.quadratic)
            for (const auto& v : svg::ellipse_curve(q)) pts.push_back(v);
        const auto vp = fit(pts);
        const std::vector<svg::Layer> layers = {{feas, svg::Style::Feasible, "#1f77b4", "feasible"},
                                                {compat, svg::Style::Compatible, "#d62728", "compatible"},
                                                {sharp, svg::Style::Outline, "#2ca02c", "feasible (sharpened)"}};
        io::write_text(o.plot, svg::render(layers, vp));
        rep["plot"] = {{"path", o.plot}};
    }
    return rep.finish(outcome(violated, inconclusive), o.out);
}

// ------------------------------------------------------------ analyze-elastic

struct ElasticOpts {
    std::string dataset, materials, out, plot;
    double tol = boundary::kDefaultFluxTolerance;
};

int analyze_elastic(const ElasticOpts& o) {
    Report rep("analyze-elastic");
    rep.input("dataset", o.dataset);
    rep.input("materials", o.materials);
    rep.tolerance("traction_balance", o.tol);
    rep.tolerance("slack", geom::kSlackTol);
    const auto d = io::dataset_from_json(load(o.dataset), false, {}, false);
    const json mj = load(o.materials);
    const auto p = elastic_pair(mj);
    const auto em = boundary::elastic_moments(d, o.tol);
    rep["moments"] = {{"E", em.E}, {"a", em.a}, {"b", em.b}, {"c", em.c}, {"F0", em.F0},
                      {"mean_grad", mat(em.mean_grad)}, {"mean_stress", mat(em.mean_stress)}};
    const auto A = elastic::lower_bound_anchors(em.mean_grad, em.mean_stress, p);
    rep["anchors"] = {{"A1b", A.A1b}, {"A1s", A.A1s}, {"A2b", A.A2b}, {"A2s", A.A2s}};
    const auto feas = elastic::feasible_region(em.E, em.a, em.c, A, p);
    const auto compat = elastic::compatible_region(p);
    rep["regions"] = {{"feasible", io::to_json(feas)}, {"compatible", io::to_json(compat)}};
    bool violated = false, inconclusive = false;
    try {
        const auto y = elastic::yield_certificate(em.E, em.a, em.c, A, p);
        json j = verdict(y.verdict);
        j["phase1"] = verdict(y.phase1);
        j["phase2"] = verdict(y.phase2);
        j["emptiness1"] = io::to_json(y.emptiness1);
        j["emptiness2"] = io::to_json(y.emptiness2);
        rep["yield_certificate"] = j;
        violated |= y.verdict.violated;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NumericalInconclusive) throw;
        rep["yield_certificate"] = inconclusive_entry(e);
        inconclusive = true;
    }
    if (mj.contains("viscoelastic")) {
        const json& v = mj["viscoelastic"];
        const std::string w = "materials.viscoelastic";
        elastic::ViscoelasticInput in;
        in.E = em.E;
        in.a = em.a;
        in.dE = io::detail::complex(io::detail::field(v, "dE", w), w + ".dE");
        in.dkappa1 = io::detail::complex(io::detail::field(v, "dkappa1", w), w + ".dkappa1");
        in.dkappa2 = io::detail::complex(io::detail::field(v, "dkappa2", w), w + ".dkappa2");
        in.dmu1 = io::detail::complex(io::detail::field(v, "dmu1", w), w + ".dmu1");
        in.dmu2 = io::detail::complex(io::detail::field(v, "dmu2", w), w + ".dmu2");
        const auto e = elastic::viscoelastic_solve(in, p);
        const double m1 = 2.0 * p.mu1 * p.f1 * p.k1 - e.E1s, m2 = 2.0 * p.mu2 * p.f2 * p.k2 - e.E2s;
        const auto vd = CriterionVerdict::from_margin(std::min(m1, m2), m1 <= m2 ? "phase 1 shear energy" : "phase 2 shear energy");
        json j = verdict(vd);
        j["energies"] = {{"E1b", e.E1b}, {"E1s", e.E1s}, {"E2b", e.E2b}, {"E2s", e.E2s}};
        rep["viscoelastic"] = j;
        violated |= vd.violated;
    }
    if (!o.plot.empty()) {
        const double s = em.E > 0.0 ? em.E : 1.0;
        const auto vp = fit({Vec2(0.0, 0.0), Vec2(s, s)}, 0.05);
        const std::vector<svg::Layer> layers = {{feas, svg::Style::Feasible, "#1f77b4", "feasible energies"},
                                                {compat, svg::Style::Compatible, "#d62728", "below yield"}};
        io::write_text(o.plot, svg::render(layers, vp));
        rep["plot"] = {{"path", o.plot}};
    }
    return rep.finish(outcome(violated, inconclusive), o.out);
}

// ------------------------------------------------------------ eomega

json validity_json(const eomega::ValidityReport& r) {
    json ct = json::array(), cz = json::array();
    for (const auto& t : r.critical_t) ct.push_back({t.real(), t.imag()});
    for (const auto& z : r.critical_z) cz.push_back({z.real(), z.imag()});
    return {{"valid", r.valid},
            {"self_intersection_free", r.self_intersection_free},
            {"min_separation", r.min_separation},
            {"theta_at_min", r.theta_at_min},
            {"derivative_ok", r.derivative_ok},
            {"fprime0", r.fprime0},
            {"beta1_ok", r.beta1_ok},
            {"beta1", r.beta1},
            {"univalence_ok", r.univalence_ok},
            {"critical_t", ct},
            {"critical_z", cz},
            {"failures", r.failures}};
}

/// Inclusion outline, critical images and an optional dashed circle.
void draw_shape(svg::Canvas& c, const eomega::RationalGenerator& g, const std::vector<cplx>& crit_z,
                const Vec2& shift, double scale, std::optional<std::pair<Vec2, double>> omega) {
    svg::Polyline pl;
    pl.closed = true;
    for (const auto& p : eomega::curve_polygon(g, 512)) pl.points.push_back(shift + scale * p);
    c.add(pl);
    for (const auto& z : crit_z) {
        const Vec2 q = shift + scale * Vec2(z.real(), z.imag());
        c.add(svg::Marker{q, "#d62728", ""});
    }
    if (omega) {
        svg::Polyline circ;
        circ.closed = circ.dashed = true;
        circ.color = "#1f77b4";
        for (int k = 0; k < 256; ++k) {
            const double th = 2.0 * std::numbers::pi * k / 256;
            circ.points.push_back(shift + scale * (omega->first + omega->second * Vec2(std::cos(th), std::sin(th))));
        }
        c.add(circ);
    }
}

/// Circle centred on the shape centroid passing midway between the inclusion
/// and the nearest critical image (or a fixed margin when there is none).
std::pair<Vec2, double> candidate_omega(const eomega::RationalGenerator& g, const std::vector<cplx>& crit_z) {
    const auto poly = eomega::curve_polygon(g, 512);
    Vec2 c = Vec2::Zero();
    for (const auto& p : poly) c += p;
    c /= static_cast<double>(poly.size());
    double rin = 0.0;
    for (const auto& p : poly) rin = std::max(rin, (p - c).norm());
    double rcrit = std::numeric_limits<double>::infinity();
    for (const auto& z : crit_z) rcrit = std::min(rcrit, (Vec2(z.real(), z.imag()) - c).norm());
    const double r = std::isfinite(rcrit) ? 0.5 * (rin + rcrit) : 1.5 * rin;
    return {c, r};
}

struct EomegaOpts {
    std::string generator, out, plot, curve, materials_out;
    std::size_t samples = 1025;
    double gamma1 = 1.0, gamma2 = 0.0;
    int n = 12;
    std::uint64_t seed = 7;
    double sigma1 = 2.0, sigma2 = 1.0, e0 = 1.0, radius = 0.0, c2 = 0.0;
    std::vector<double> center;
};

void write_or_print(const std::string& path, const std::string& text) {
    if (path.empty()) std::cout << text;
    else io::write_text(path, text);
}

int eomega_generate(const EomegaOpts& o) {
    const auto g = io::generator_from_json(load(o.generator));
    write_or_print(o.out, io::curve_csv(eomega::boundary_curve(g, o.samples)));
    if (!o.plot.empty()) {
        const auto r = eomega::validate(g);
        const auto poly = eomega::curve_polygon(g, 512);
        std::vector<Vec2> pts = poly;
        for (const auto& z : r.critical_z) pts.emplace_back(z.real(), z.imag());
        svg::Canvas c(fit(pts));
        draw_shape(c, g, r.critical_z, Vec2::Zero(), 1.0, std::nullopt);
        io::write_text(o.plot, c.str());
    }
    return Safe;
}

int eomega_validate(const EomegaOpts& o) {
    Report rep("eomega validate");
    rep.input("generator", o.generator);
    rep.tolerance("validate", 1e-9);
    const auto g = io::generator_from_json(load(o.generator));
    rep["generator"] = io::generator_to_json(g);
    rep["validity"] = validity_json(eomega::validate(g));
    return rep.finish(Safe, o.out);
}

int eomega_transform(const EomegaOpts& o) {
    const auto g = io::generator_from_json(load(o.generator));
    const auto t = eomega::affine_transform(g, o.gamma1, o.gamma2);
    write_or_print(o.out, io::generator_to_json(t).dump(2) + "\n");
    if (!o.curve.empty()) io::write_text(o.curve, io::curve_csv(eomega::boundary_curve(t, o.samples)));
    return Safe;
}

int eomega_atlas(const EomegaOpts& o) {
    if (o.out.empty()) throw Error(ErrorCode::InvalidInput, "atlas needs --out <directory>");
    if (o.n < 1 || o.n > 400) throw Error(ErrorCode::InvalidInput, "--n must be in 1..400");
    fs::create_directories(o.out);
    std::mt19937_64 rng(o.seed);
    Report rep("eomega atlas");
    rep["seed"] = o.seed;
    rep.tolerance("validate", 1e-9);
    json shapes = json::array();
    std::vector<std::pair<eomega::RationalGenerator, eomega::ValidityReport>> kept;
    int attempts = 0;
    while (static_cast<int>(kept.size()) < o.n && attempts < 200 * o.n) {
        ++attempts;
        const auto g = eomega::random_generator(rng);
        auto r = eomega::validate(g);
        if (!r.valid) continue;
        kept.emplace_back(g, r);
    }
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(kept.size()))));
    const int rows = cols > 0 ? static_cast<int>((kept.size() + cols - 1) / cols) : 1;
    svg::Viewport vp{0.0, 3.0 * std::max(cols, 1), -3.0 * rows, 0.0, 240 * std::max(cols, 1), 240 * rows};
    svg::Canvas canvas(vp);
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const auto& [g, r] = kept[k];
        const auto om = candidate_omega(g, r.critical_z);
        std::ostringstream name;
        name << "shape_" << std::setw(2) << std::setfill('0') << k;
        io::write_text((fs::path(o.out) / (name.str() + ".csv")).string(), io::curve_csv(eomega::boundary_curve(g)));
        json s = validity_json(r);
        s["name"] = name.str();
        s["generator"] = io::generator_to_json(g);
        s["area"] = eomega::inclusion_area(g);
        s["candidate_omega"] = {{"center", vec(om.first)}, {"radius", om.second}};
        shapes.push_back(s);
        // each cell is 3 x 3 world units; scale the shape and its circle into it
        const int cx = static_cast<int>(k) % cols, cy = static_cast<int>(k) / cols;
        const double scale = 1.3 / std::max(om.second, 1e-9);
        const Vec2 shift(3.0 * cx + 1.5 - scale * om.first.x(), -3.0 * cy - 1.5 - scale * om.first.y());
        // only critical images that land inside the cell
        std::vector<cplx> near;
        for (const auto& z : r.critical_z)
            if ((Vec2(z.real(), z.imag()) - om.first).norm() < 1.15 * om.second) near.push_back(z);
        draw_shape(canvas, g, near, shift, scale, om);
    }
    rep["attempts"] = attempts;
    rep["shapes"] = shapes;
    io::write_text((fs::path(o.out) / "atlas.svg").string(), canvas.str());
    const bool complete = static_cast<int>(kept.size()) == o.n;
    return rep.finish(complete ? Safe : Inconclusive, (fs::path(o.out) / "atlas.json").string());
}

int eomega_synthesize(const EomegaOpts& o) {
    if (o.out.empty()) throw Error(ErrorCode::InvalidInput, "synthesize needs --out <dataset.json>");
    Report rep("eomega synthesize");
    rep.input("generator", o.generator);
    const auto g = io::generator_from_json(load(o.generator));
    eomega::SynthesisOptions so;
    so.sigma1 = o.sigma1;
    so.sigma2 = o.sigma2;
    so.e0 = o.e0;
    so.samples = o.samples;
    if (!o.center.empty()) {
        if (o.center.size() != 2) throw Error(ErrorCode::InvalidInput, "--center needs x,y");
        so.center = Vec2(o.center[0], o.center[1]);
    }
    const auto crit = eomega::critical_points(g);
    std::vector<cplx> cz;
    for (const auto& t : crit) cz.push_back(eomega::z_of_t(g, t));
    if (o.radius > 0.0) {
        so.radius = o.radius;
    } else {
        const auto om = candidate_omega(g, cz);
        if (o.center.empty()) so.center = om.first;
        so.radius = om.second;
    }
    const auto s = eomega::synthesize(g, so);
    io::write_text(o.out, io::dataset_to_json(s.data).dump() + "\n");
    const double c2 = o.c2 > 0.0 ? o.c2 : 1.1 * s.max_matrix_field;
    const json mat_j = {{"sigma1", so.sigma1}, {"sigma2", so.sigma2}, {"c1", so.e0},
                        {"c2", c2},            {"f1", s.f1},          {"f2", 1.0 - s.f1}};
    if (!o.materials_out.empty()) io::write_text(o.materials_out, mat_j.dump(2) + "\n");
    rep["omega"] = {{"center", vec(so.center)}, {"radius", so.radius}, {"samples", so.samples}};
    rep["inclusion_area"] = s.inclusion_area;
    rep["f1"] = s.f1;
    rep["interior_field"] = vec(Vec2(so.e0, 0.0));
    rep["max_matrix_field"] = s.max_matrix_field;
    rep["materials"] = mat_j;
    rep["outputs"] = {{"dataset", o.out}, {"materials", o.materials_out}};
    return rep.finish(Safe, "");
}

// ------------------------------------------------------------ synthesize (grid)

struct GridOpts {
    std::string grid, materials, out, bc = "uniform";
    std::vector<double> field{1.0, 0.0};
    bool oracle = false;
};

template <class S>
std::function<S(const Vec2&)> boundary_potential(const GridOpts& o, const json& gj, const forward::PhaseGrid& g,
                                                 S s1, S s2) {
    const Vec2 e(o.field[0], o.field[1]);
    if (o.bc == "uniform") return [e](const Vec2& x) { return S(-e.dot(x)); };
    if (o.bc != "laminate") throw Error(ErrorCode::InvalidInput, "--bc must be uniform or laminate");
    if (gj.value("kind", std::string{}) != "laminate")
        throw Error(ErrorCode::InvalidInput, "--bc laminate needs a laminate grid");
    const int axis = static_cast<int>(num_or(gj, "axis", 0.0, "grid"));
    const double f = g.fraction(1), L = axis == 0 ? g.nx * g.h : g.ny * g.h;
    const double cut = f * L;
    // exact layered field: normal current continuous, tangential field shared
    const S sser = S(1.0) / (S(f) / s1 + S(1.0 - f) / s2);
    const S e1 = sser * e[axis] / s1, e2 = sser * e[axis] / s2;
    const double et = e[1 - axis];
    return [=](const Vec2& x) {
        const double a = x[axis] - (axis == 0 ? g.x0 : g.y0);
        const S drop = a < cut ? e1 * a : e1 * cut + e2 * (a - cut);
        return -drop - S(et * x[1 - axis]);
    };
}

json stats_json(const forward::InteriorStats& st, const forward::CellMaxima& cm) {
    json j;
    for (int a = 0; a < 2; ++a) {
        const std::string key = "phase" + std::to_string(a + 1);
        j[key] = {{"fraction", st.fraction[a]},
                  {"A", mat(st.A[a])},
                  {"moment", {vec(st.moment[a][0]), vec(st.moment[a][1])}},
                  {"max_intensity", st.max_intensity[a]},
                  {"max_component_sq", {st.max_component_sq[a][0], st.max_component_sq[a][1]}},
                  {"max_cell_field_interior", cm.interior[a]},
                  {"max_cell_field_band", cm.band[a]}};
    }
    return j;
}

int synthesize_grid(const GridOpts& o) {
    if (o.out.empty()) throw Error(ErrorCode::InvalidInput, "synthesize needs --out <dataset.json>");
    if (o.field.size() != 2) throw Error(ErrorCode::InvalidInput, "--field needs ex,ey");
    Report rep("synthesize");
    rep.input("grid", o.grid);
    rep.input("materials", o.materials);
    rep.tolerance("solver_residual", 1e-10);
    const json gj = load(o.grid), mj = load(o.materials);
    const auto g = grid_from_json(gj);
    const cplx s1 = conductivity(mj, "sigma1", "materials"), s2 = conductivity(mj, "sigma2", "materials");
    if (!(s1.real() > 0.0) || !(s2.real() > 0.0))
        throw Error(ErrorCode::InvalidInput, "materials: conductivities need a positive real part");
    json stats;
    if (s1.imag() == 0.0 && s2.imag() == 0.0) {
        const auto sol = forward::solve<double>(g, s1.real(), s2.real(), boundary_potential<double>(o, gj, g, s1.real(), s2.real()));
        io::write_text(o.out, io::dataset_to_json(forward::boundary_dataset(sol)).dump() + "\n");
        rep["residual"] = sol.residual;
        if (o.oracle) stats = stats_json(forward::interior_stats(g, {forward::real_field(sol)}), forward::cell_maxima(sol));
    } else {
        const auto sol = forward::solve<cplx>(g, s1, s2, boundary_potential<cplx>(o, gj, g, s1, s2));
        const auto re = forward::boundary_dataset(sol, 0), im = forward::boundary_dataset(sol, 1);
        io::write_text(o.out, io::dataset_to_json(re, &im).dump() + "\n");
        rep["residual"] = sol.residual;
        if (o.oracle)
            stats = stats_json(forward::interior_stats(g, {forward::real_field(sol, 0), forward::real_field(sol, 1)}),
                               forward::cell_maxima(sol));
    }
    rep["grid"] = {{"nx", g.nx}, {"ny", g.ny}, {"h", g.h}, {"f1", g.fraction(1)}, {"f2", g.fraction(2)}};
    rep["outputs"] = {{"dataset", o.out}};
    if (o.oracle) {
        fs::path sp(o.out);
        sp.replace_extension(".stats.json");
        io::write_text(sp.string(), stats.dump(2) + "\n");
        rep["outputs"]["interior_statistics"] = sp.string();
    }
    return rep.finish(Safe, "");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Breakdown certificates from boundary measurements of two-phase bodies"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    RealOpts ro;
    auto* real_cmd = app.add_subcommand("analyze-real", "Real conductivity criteria for one boundary dataset");
    real_cmd->add_option("dataset", ro.dataset, "Boundary dataset JSON")->required();
    real_cmd->add_option("materials", ro.materials, "Materials JSON {sigma1, sigma2, c1, c2, f1[, f2]}")->required();
    real_cmd->add_option("--perturbed", ro.perturbed, "Dataset measured with perturbed conductivities");
    real_cmd->add_option("--delta", ro.delta, "Conductivity perturbations d1,d2")->delimiter(',');
    real_cmd->add_option("--tolerance", ro.tol, "Relative net-flux tolerance");
    real_cmd->add_option("--out", ro.out, "Report path (default stdout)");

    TwoBcOpts to;
    auto* two_cmd = app.add_subcommand("analyze-two-bc", "Certificates from two boundary conditions");
    two_cmd->add_option("dataset1", to.dataset1)->required();
    two_cmd->add_option("dataset2", to.dataset2)->required();
    two_cmd->add_option("materials", to.materials)->required();
    two_cmd->add_option("--weights", to.weights, "Weights w1,w2 of the summed determinant bound")->delimiter(',');
    two_cmd->add_flag("--optimize-weights", to.optimize, "Search the weights on the unit quarter circle");
    two_cmd->add_flag("--loose", to.loose, "Drop the sign and PSD tightenings of the compatible prism");
    two_cmd->add_option("--tolerance", to.tol, "Relative net-flux tolerance");
    two_cmd->add_option("--plot", to.plot, "Write an SVG slice of the regions");
    two_cmd->add_option("--out", to.out, "Report path (default stdout)");

    ComplexOpts co;
    auto* cx_cmd = app.add_subcommand("analyze-complex", "Quasistatic complex conductivity certificate");
    cx_cmd->add_option("dataset", co.dataset, "Dataset JSON with V, JdotN, V_im, JdotN_im")->required();
    cx_cmd->add_option("materials", co.materials, "Materials JSON with complex sigma as [re, im]")->required();
    cx_cmd->add_option("--plot", co.plot, "Write an SVG of the regions");
    cx_cmd->add_option("--out", co.out, "Report path (default stdout)");

    ElasticOpts eo;
    auto* el_cmd = app.add_subcommand("analyze-elastic", "Yield certificate from displacement and traction data");
    el_cmd->add_option("dataset", eo.dataset, "Dataset JSON with u and traction per sample")->required();
    el_cmd->add_option("materials", eo.materials, "Materials JSON {kappa1, kappa2, mu1, mu2, k1, k2, f1}")->required();
    el_cmd->add_option("--tolerance", eo.tol, "Relative traction balance tolerance");
    el_cmd->add_option("--plot", eo.plot, "Write an SVG of the energy regions");
    el_cmd->add_option("--out", eo.out, "Report path (default stdout)");

    EomegaOpts wo;
    auto* ew = app.add_subcommand("eomega", "Inclusions with uniform interior fields");
    ew->require_subcommand(1);
    auto* eg = ew->add_subcommand("generate", "Boundary curve CSV of a generator");
    eg->add_option("generator", wo.generator)->required();
    eg->add_option("--samples", wo.samples, "Curve samples");
    eg->add_option("--plot", wo.plot, "Write an SVG of the shape");
    eg->add_option("--out", wo.out, "CSV path (default stdout)");
    auto* ev = ew->add_subcommand("validate", "Validity report of a generator");
    ev->add_option("generator", wo.generator)->required();
    ev->add_option("--out", wo.out, "Report path (default stdout)");
    auto* et = ew->add_subcommand("transform", "Affine image x' = gamma1 x + gamma2 y of a generator");
    et->add_option("generator", wo.generator)->required();
    et->add_option("--gamma1", wo.gamma1)->required();
    et->add_option("--gamma2", wo.gamma2, "Real part of gamma2");
    et->add_option("--curve", wo.curve, "Also write the transformed curve CSV");
    et->add_option("--samples", wo.samples, "Curve samples");
    et->add_option("--out", wo.out, "Generator path (default stdout)");
    auto* ea = ew->add_subcommand("atlas", "Random validated shapes");
    ea->add_option("--n", wo.n, "Number of shapes");
    ea->add_option("--seed", wo.seed, "Random seed");
    ea->add_option("--out", wo.out, "Output directory")->required();
    auto* es = ew->add_subcommand("synthesize", "Boundary data with an exactly uniform inclusion field");
    es->add_option("generator", wo.generator)->required();
    es->add_option("--sigma1", wo.sigma1, "Inclusion conductivity");
    es->add_option("--sigma2", wo.sigma2, "Matrix conductivity");
    es->add_option("--e0", wo.e0, "Interior field magnitude (also written as c1)");
    es->add_option("--c2", wo.c2, "Matrix threshold (default 1.1 x max matrix field)");
    es->add_option("--center", wo.center, "Center x,y of the circular body")->delimiter(',');
    es->add_option("--radius", wo.radius, "Radius of the circular body (default: between inclusion and critical images)");
    es->add_option("--samples", wo.samples, "Boundary samples");
    es->add_option("--materials-out", wo.materials_out, "Write matching materials JSON");
    es->add_option("--out", wo.out, "Dataset path")->required();

    GridOpts go;
    auto* sy = app.add_subcommand("synthesize", "Boundary data from the finite-volume solver");
    sy->add_option("grid", go.grid, "Grid JSON {kind, n, ...}")->required();
    sy->add_option("materials", go.materials, "Materials JSON {sigma1, sigma2}")->required();
    sy->add_option("--field", go.field, "Applied average field ex,ey")->delimiter(',');
    sy->add_option("--bc", go.bc, "uniform | laminate");
    sy->add_flag("--oracle", go.oracle, "Write interior statistics next to the dataset");
    sy->add_option("--out", go.out, "Dataset path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Safe : Malformed;
    }
    try {
        if (*real_cmd) return analyze_real(ro);
        if (*two_cmd) return analyze_two_bc(to);
        if (*cx_cmd) return analyze_complex(co);
        if (*el_cmd) return analyze_elastic(eo);
        if (*eg) return eomega_generate(wo);
        if (*ev) return eomega_validate(wo);
        if (*et) return eomega_transform(wo);
        if (*ea) return eomega_atlas(wo);
        if (*es) return eomega_synthesize(wo);
        if (*sy) return synthesize_grid(go);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::NumericalInconclusive ? Inconclusive : Malformed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Malformed;
    }
    return Malformed;
}
