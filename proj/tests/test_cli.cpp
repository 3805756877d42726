#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string kCli = BREAKDOWN_CLI;
const fs::path kSamples = BREAKDOWN_SAMPLES;

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "breakdown_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string sample(const std::string& name) { return (kSamples / name).string(); }
std::string tmp(const std::string& name) { return (scratch() / name).string(); }

/// Runs the CLI with stdout to `out` (discarded when empty) and stderr to
/// <scratch>/stderr.txt. Returns the exit status.
int run(const std::string& args, const std::string& out = {}) {
    const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + (out.empty() ? tmp("stdout.txt") : out) +
                            "\" 2> \"" + tmp("stderr.txt") + "\"";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load(const std::string& path) { return json::parse(slurp(path)); }

void write(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

/// Two-layer elastic laminate in the unit square with n midpoint samples per
/// side and the interface on an element edge.
void write_elastic_bilayer(const std::string& path, int n) {
    const double k[2] = {1.0, 2.5}, m[2] = {0.6, 1.2}, f1 = 0.375;
    const double e = 0.002, s = 0.01, t = 0.004;
    double G[2][2][2];
    for (int a = 0; a < 2; ++a) {
        const double exx = (s - (k[a] - m[a]) * e) / (k[a] + m[a]);
        G[a][0][0] = exx;
        G[a][0][1] = 0.0;
        G[a][1][0] = t / m[a];
        G[a][1][1] = e;
    }
    json samples = json::array();
    const double h = 1.0 / n;
    const double normals[4][2] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
    for (int side = 0; side < 4; ++side)
        for (int i = 0; i < n; ++i) {
            const double q = (i + 0.5) * h;
            double x[2];
            switch (side) {
            case 0: x[0] = q, x[1] = 0.0; break;
            case 1: x[0] = 1.0, x[1] = q; break;
            case 2: x[0] = 1.0 - q, x[1] = 1.0; break;
            default: x[0] = 0.0, x[1] = 1.0 - q;
            }
            const int a = x[0] < f1 ? 0 : 1;
            const auto& g = G[a];
            const double exx = g[0][0], eyy = g[1][1], exy = 0.5 * (g[0][1] + g[1][0]), tr = exx + eyy;
            const double S[2][2] = {{k[a] * tr + m[a] * (exx - eyy), 2 * m[a] * exy},
                                    {2 * m[a] * exy, k[a] * tr - m[a] * (exx - eyy)}};
            const double* nn = normals[side];
            const double dx = x[0] - f1;
            samples.push_back({{"x", {x[0], x[1]}},
                               {"n", {nn[0], nn[1]}},
                               {"t", {-nn[1], nn[0]}},
                               {"ds", h},
                               {"phase", a + 1},
                               {"u", {g[0][0] * dx + g[0][1] * x[1], g[1][0] * dx + g[1][1] * x[1]}},
                               {"traction", {S[0][0] * nn[0] + S[0][1] * nn[1], S[1][0] * nn[0] + S[1][1] * nn[1]}}});
        }
    write(path, json{{"area", 1.0}, {"samples", samples}}.dump());
}

} // namespace

TEST(Cli, HelpAndVersion) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run("--version", tmp("version.txt")), 0);
    EXPECT_NE(slurp(tmp("version.txt")).find("1.0.0"), std::string::npos);
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("no-such-command"), 1);
}

TEST(Cli, SafeReportCarriesDigestsAndTolerances) {
    const std::string report = tmp("real.json");
    ASSERT_EQ(run("analyze-real " + sample("laminate_x.json") + " " + sample("conductors.json") + " --out " + report), 0);
    const auto r = load(report);
    EXPECT_EQ(r["outcome"], "safe");
    EXPECT_EQ(r["exit_code"], 0);
    EXPECT_EQ(r["version"], "1.0.0");
    EXPECT_EQ(r["tolerances"]["flux"], 1e-9);
    ASSERT_EQ(r["inputs"].size(), 2u);
    // the series laminate carries J = 4/3 E
    EXPECT_NEAR(r["moments"]["J"][0].get<double>() / r["moments"]["E"][0].get<double>(), 4.0 / 3.0, 1e-10);

    // digests agree with coreutils
    for (int k = 0; k < 2; ++k) {
        const std::string path = r["inputs"][k]["path"];
        ASSERT_EQ(std::system(("sha256sum \"" + path + "\" > \"" + tmp("sum.txt") + "\"").c_str()), 0);
        EXPECT_EQ(slurp(tmp("sum.txt")).substr(0, 64), r["inputs"][k]["sha256"].get<std::string>());
    }
}

TEST(Cli, MissingFractionIsMalformed) {
    write(tmp("no_f1.json"), R"({"sigma1": 2, "sigma2": 1, "c1": 1.5, "c2": 1.5})");
    EXPECT_EQ(run("analyze-real " + sample("laminate_x.json") + " " + tmp("no_f1.json")), 1);
    EXPECT_NE(slurp(tmp("stderr.txt")).find("f1"), std::string::npos) << slurp(tmp("stderr.txt"));
}

TEST(Cli, ViolationExitsTwo) {
    write(tmp("tight.json"), R"({"sigma1": 2, "sigma2": 1, "c1": 0.5, "c2": 1.5, "f1": 0.5})");
    const std::string report = tmp("tight_report.json");
    EXPECT_EQ(run("analyze-real " + sample("laminate_x.json") + " " + tmp("tight.json") + " --out " + report), 2);
    const auto r = load(report);
    EXPECT_EQ(r["outcome"], "certified");
    EXPECT_TRUE(r["criteria"]["phase_average"]["violated"].get<bool>());
    // phase 1 average field is 2/3 against a threshold of 0.5
    EXPECT_NEAR(r["criteria"]["phase_average"]["margin1"].get<double>(), 0.5 - 2.0 / 3.0, 1e-10);
}

TEST(Cli, ElasticLaminateSafeWhenExactAndInconclusiveWhenCoarse) {
    const std::string fine = tmp("bilayer_fine.json"), coarse = tmp("bilayer_coarse.json");
    write_elastic_bilayer(fine, 1024);
    write_elastic_bilayer(coarse, 512);
    const std::string mats = sample("elastic_materials.json");
    EXPECT_EQ(run("analyze-elastic " + fine + " " + mats), 0);
    // coarser quadrature leaves the collapsed feasible point just outside the
    // slack tolerance: neither verdict can be certified
    EXPECT_EQ(run("analyze-elastic " + coarse + " " + mats, tmp("coarse_report.json")), 3);
    EXPECT_EQ(load(tmp("coarse_report.json"))["yield_certificate"]["status"], "inconclusive");
    EXPECT_EQ(run("analyze-elastic " + sample("elastic_bilayer.json") + " " + mats), 0);
}

TEST(Cli, ElasticYieldFires) {
    // true phase-1 shear energy is 1.3164e-5 against 2 mu1 f1 k1 = 4.5e-8
    write(tmp("soft.json"), R"({"kappa1": 1, "kappa2": 2.5, "mu1": 0.6, "mu2": 1.2, "k1": 1e-7, "k2": 4e-5, "f1": 0.375})");
    EXPECT_EQ(run("analyze-elastic " + sample("elastic_bilayer.json") + " " + tmp("soft.json"), tmp("soft_report.json")), 2);
    const auto r = load(tmp("soft_report.json"));
    EXPECT_TRUE(r["yield_certificate"]["phase1"]["violated"].get<bool>());
    EXPECT_FALSE(r["yield_certificate"]["phase2"]["violated"].get<bool>());
}

TEST(Cli, RerunsAreByteIdentical) {
    const std::string args = "analyze-two-bc " + sample("laminate_x.json") + " " + sample("laminate_y.json") + " " +
                             sample("conductors.json") + " --optimize-weights";
    ASSERT_EQ(run(args + " --plot " + tmp("a.svg"), tmp("a.json")), 0);
    ASSERT_EQ(run(args + " --plot " + tmp("b.svg"), tmp("b.json")), 0);
    auto a = load(tmp("a.json")), b = load(tmp("b.json"));
    a.erase("plot");
    b.erase("plot");
    EXPECT_EQ(a.dump(), b.dump());
    EXPECT_EQ(slurp(tmp("a.svg")), slurp(tmp("b.svg")));
    EXPECT_TRUE(a.contains("prism_certificate"));
    EXPECT_TRUE(a.contains("rotation_certificate"));

    const std::string cx = "analyze-complex " + sample("disks_complex.json") + " " + sample("disks_complex_conductors.json");
    ASSERT_EQ(run(cx + " --plot " + tmp("c.svg"), tmp("c1.json")), 0);
    ASSERT_EQ(run(cx + " --plot " + tmp("c.svg"), tmp("c2.json")), 0);
    EXPECT_EQ(slurp(tmp("c1.json")), slurp(tmp("c2.json")));
}

TEST(Cli, AtlasIsDeterministic) {
    const std::string a = tmp("atlas_a"), b = tmp("atlas_b"), c = tmp("atlas_c");
    ASSERT_EQ(run("eomega atlas --n 12 --seed 7 --out " + a), 0);
    ASSERT_EQ(run("eomega atlas --n 12 --seed 7 --out " + b), 0);
    ASSERT_EQ(run("eomega atlas --n 12 --seed 8 --out " + c), 0);
    const auto ja = load(a + "/atlas.json");
    ASSERT_EQ(ja["shapes"].size(), 12u);
    for (const auto& s : ja["shapes"]) EXPECT_TRUE(s["valid"].get<bool>());
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto name = entry.path().filename().string();
        EXPECT_EQ(slurp(entry.path().string()), slurp(b + "/" + name)) << name;
    }
    EXPECT_NE(slurp(a + "/atlas.json"), slurp(c + "/atlas.json"));
}

TEST(Cli, EllipseCurveIsUnitCircle) {
    ASSERT_EQ(run("eomega generate " + sample("ellipse_generator.json") + " --samples 257 --out " + tmp("circle.csv")), 0);
    std::istringstream in(slurp(tmp("circle.csv")));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "y,x_plus,x_minus");
    int rows = 0;
    while (std::getline(in, line)) {
        double y, xp, xm;
        char c1, c2;
        std::istringstream ls(line);
        ls >> y >> c1 >> xp >> c2 >> xm;
        EXPECT_NEAR(y * y + xp * xp, 1.0, 1e-10);
        EXPECT_NEAR(xm, -xp, 1e-12);
        ++rows;
    }
    EXPECT_EQ(rows, 257);
}

TEST(Cli, TransformOfEllipseStaysAnEllipse) {
    ASSERT_EQ(run("eomega transform " + sample("ellipse_generator.json") + " --gamma1 2 --curve " + tmp("wide.csv") +
                  " --samples 65 --out " + tmp("wide.json")),
              0);
    std::istringstream in(slurp(tmp("wide.csv")));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        double y, xp, xm;
        char c;
        std::istringstream ls(line);
        ls >> y >> c >> xp >> c >> xm;
        EXPECT_NEAR(y * y + xp * xp / 4.0, 1.0, 1e-10);
    }
    EXPECT_EQ(run("eomega validate " + tmp("wide.json"), tmp("wide_report.json")), 0);
    EXPECT_TRUE(load(tmp("wide_report.json"))["validity"]["valid"].get<bool>());
}

TEST(Cli, ValidateReportsInvalidGeneratorsWithoutFailing) {
    // residue of the wrong sign gives beta1 < 0
    write(tmp("neg.json"), R"({"poles": [[0, 1]], "residues": [[-1, 0]], "c": 0})");
    EXPECT_EQ(run("eomega validate " + tmp("neg.json"), tmp("neg_report.json")), 0);
    const auto r = load(tmp("neg_report.json"));
    EXPECT_FALSE(r["validity"]["valid"].get<bool>());
    EXPECT_FALSE(r["validity"]["failures"].empty());
    write(tmp("broken.json"), R"({"poles": [[0, 1]]})");
    EXPECT_EQ(run("eomega validate " + tmp("broken.json")), 1);
}

TEST(Cli, SynthesizedInclusionIsSharpForPhaseAverage) {
    for (const std::string gen : {"ellipse_generator.json", "generator_two_poles.json"}) {
        const std::string ds = tmp("eo_" + gen), mats = tmp("eo_mats_" + gen);
        ASSERT_EQ(run("eomega synthesize " + sample(gen) + " --out " + ds + " --materials-out " + mats), 0) << gen;
        // equality case: the sign of a roundoff-sized margin decides between 0 and 2
        const int code = run("analyze-real " + ds + " " + mats, tmp("eo_report.json"));
        ASSERT_TRUE(code == 0 || code == 2) << gen << " exit " << code;
        const auto r = load(tmp("eo_report.json"));
        EXPECT_LT(std::abs(r["criteria"]["phase_average"]["margin1"].get<double>()), 1e-6) << gen;
        EXPECT_FALSE(r["criteria"]["boundary_field"]["violated"].get<bool>()) << gen;
    }
}

TEST(Cli, GridSynthesisLaminateAndOracleSidecar) {
    write(tmp("lam.json"), R"({"kind": "laminate", "n": 32, "axis": 1, "fraction": 0.25})");
    write(tmp("sig.json"), R"({"sigma1": 4, "sigma2": 1})");
    ASSERT_EQ(run("synthesize " + tmp("lam.json") + " " + tmp("sig.json") + " --bc laminate --field 0,1 --oracle --out " +
                  tmp("lam_ds.json")),
              0);
    const auto st = load(tmp("lam_ds.stats.json"));
    EXPECT_NEAR(st["phase1"]["fraction"].get<double>(), 0.25, 1e-15);
    // series mixture: sigma* = 1 / (0.25/4 + 0.75/1) = 16/13; phase fields sigma*/sigma
    EXPECT_NEAR(st["phase1"]["max_intensity"].get<double>(), std::pow(16.0 / 13.0 / 4.0, 2), 1e-10);
    EXPECT_NEAR(st["phase2"]["max_intensity"].get<double>(), std::pow(16.0 / 13.0, 2), 1e-10);
    write(tmp("m.json"), R"({"sigma1": 4, "sigma2": 1, "c1": 1, "c2": 2, "f1": 0.25})");
    ASSERT_EQ(run("analyze-real " + tmp("lam_ds.json") + " " + tmp("m.json"), tmp("lam_report.json")), 0);
    const auto r = load(tmp("lam_report.json"));
    EXPECT_NEAR(r["moments"]["J"][1].get<double>(), 16.0 / 13.0, 1e-10);

    write(tmp("ring.json"), R"({"kind": "checkerboard", "n": 16, "tiles": 2})");
    EXPECT_EQ(run("synthesize " + tmp("ring.json") + " " + tmp("sig.json") + " --bc laminate --out " + tmp("x.json")), 1);
    EXPECT_EQ(run("synthesize " + tmp("ring.json") + " " + tmp("sig.json") + " --bc bogus --out " + tmp("x.json")), 1);
}

TEST(Cli, RealMultipleConductivitiesAreSingular) {
    write(tmp("real_pair.json"), R"({"sigma1": [2, 0], "sigma2": [1, 0], "c1": 1, "c2": 1, "f1": 0.5})");
    write(tmp("grid.json"), R"({"kind": "checkerboard", "n": 16, "tiles": 2})");
    ASSERT_EQ(run("synthesize " + tmp("grid.json") + " " + tmp("real_pair.json") + " --out " + tmp("rp.json")), 0);
    // real data has no imaginary part to analyse
    EXPECT_EQ(run("analyze-complex " + tmp("rp.json") + " " + tmp("real_pair.json")), 1);
    write(tmp("scaled_pair.json"), R"({"sigma1": [2, 1], "sigma2": [4, 2], "c1": 1, "c2": 1, "f1": 0.5})");
    ASSERT_EQ(run("synthesize " + tmp("grid.json") + " " + tmp("scaled_pair.json") + " --out " + tmp("sp.json")), 0);
    EXPECT_EQ(run("analyze-complex " + tmp("sp.json") + " " + tmp("scaled_pair.json")), 1);
    EXPECT_NE(slurp(tmp("stderr.txt")).find("SingularBeta"), std::string::npos) << slurp(tmp("stderr.txt"));
}
