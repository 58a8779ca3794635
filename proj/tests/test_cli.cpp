#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "wca/approx.hpp"
#include "wca/cli.hpp"
#include "wca/core.hpp"
#include "wca/epsnet.hpp"
#include "wca/io.hpp"
#include "test_util.hpp"

using namespace wca;

namespace {

const std::string dir = "cli_tmp";

std::string path_of(const std::string& name) {
    std::filesystem::create_directories(dir);
    return dir + "/" + name;
}

void put(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.is_open());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

CliRun run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

// value of a "key <number>" summary line
double out_value(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + " ", 0) == 0)
            return std::strtod(line.c_str() + key.size() + 1, nullptr);
    FAIL("no line starts with '" << key << "' in:\n" << text);
    return 0;
}

void write_mixture(const std::string& path, int n, double separation, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec> pts;
    std::vector<double> w;
    for (int j = 0; j < n; ++j) {
        Vec c = tu::v({separation * (j % 2), 0.0});
        pts.push_back(c + 0.6 * tu::random_point(rng, 2));
        w.push_back(1.0);
    }
    write_points_csv(path, WeightedDataSet(std::move(pts), std::move(w)));
}

}  // namespace

TEST_CASE("assign routes a single point to a single site") {
    std::string pts = path_of("one_pt.csv");
    std::string sites = path_of("one_site.csv");
    put(pts, "x0,x1\n2,3\n");
    put(sites, "x0,x1\n2,3\n");
    std::string outp = path_of("one.csv");
    CliRun r = run({"assign", pts, sites, "--out", outp});
    REQUIRE(r.code == 0);
    CHECK(out_value(r.out, "cost") == 0.0);
    std::string written = slurp(outp);
    CHECK(written == "cluster,point,fraction\n0,0,0x1p+0\n");
    auto cert = nlohmann::json::parse(slurp(outp + ".cert.json"));
    CHECK(cert["duality_gap"].get<double>() <= 1e-12);
}

TEST_CASE("assign reproduces the circle instance cost from emitted files") {
    std::string emit = path_of("circle");
    CliRun demo = run({"sensitivity-demo", "--n", "10", "--r", "0.01", "--emit", emit,
                       "--probe", "4"});
    REQUIRE(demo.code == 0);
    double exact = out_value(demo.out, "exact cost");
    CHECK(exact == doctest::Approx(9 * 0.0001 + 0.99 * 0.99).epsilon(1e-15));

    CliRun r = run({"assign", emit + "/points.csv", emit + "/sites.csv", "--config",
                    emit + "/config.json", "--out", path_of("circle_cl.csv")});
    REQUIRE(r.code == 0);
    CHECK(out_value(r.out, "cost") == doctest::Approx(exact).epsilon(1e-9));

    // the probe point sits alone in the small cluster
    Clustering C = read_clustering_csv(path_of("circle_cl.csv"), 10);
    std::vector<int> small = C.support(1);
    REQUIRE(small.size() == 1);
    CHECK(small[0] == 4);
}

TEST_CASE("assign fails cleanly on malformed and infeasible input") {
    std::string bad = path_of("bad_row.csv");
    put(bad, "x0,x1\n1,2\n3,4,5\n");
    std::string sites = path_of("one_site.csv");
    put(sites, "x0,x1\n0,0\n");
    CliRun r = run({"assign", bad, sites});
    CHECK(r.code != 0);
    CHECK(r.err.find("line 3") != std::string::npos);
    CHECK(r.err.find("error:") != std::string::npos);

    std::string pts = path_of("two_pts.csv");
    put(pts, "x0,x1\n0,0\n1,1\n");
    std::string cfg = path_of("greedy.json");
    put(cfg, R"({"kappa": [[5, 5]]})");
    CliRun inf = run({"assign", pts, sites, "--config", cfg, "--out", path_of("x.csv")});
    CHECK(inf.code != 0);
    CHECK(inf.err.find("kappa") != std::string::npos);
}

TEST_CASE("build-coreset summarizes and rejects bad accuracy") {
    std::string pts = path_of("tiny.csv");
    write_mixture(pts, 50, 6.0, 1);
    std::string outp = path_of("tiny_cs.json");
    CliRun r = run({"build-coreset", pts, "--k", "2", "--eps", "0.5", "--seed", "2",
                    "--out", outp});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("size ") != std::string::npos);
    CHECK(r.out.find("delta+ ") != std::string::npos);
    Coreset cs = read_coreset_json(outp);
    CHECK(cs.source_n() == 50);
    CHECK(cs.points().n() <= 50);

    CliRun bad = run({"build-coreset", pts, "--k", "2", "--eps", "0.6"});
    CHECK(bad.code != 0);
    CHECK(bad.err.find("(0, 1/2]") != std::string::npos);
}

TEST_CASE("cluster with one cluster reaches the variation closed form") {
    std::string pts = path_of("blob.csv");
    Rng rng(77);
    WeightedDataSet X = tu::random_data(rng, 30, 2);
    write_points_csv(pts, X);
    CliRun r = run({"cluster", pts, "--k", "1", "--eps", "0.9", "--reopt-sites", "--out",
                    path_of("blob_cl.csv")});
    REQUIRE(r.code == 0);
    double v = variation(X, Mat::Identity(2, 2));
    CHECK(out_value(r.out, "reopt cost") == doctest::Approx(v).epsilon(1e-9));
}

TEST_CASE("cluster under exact balance keeps cluster weights on the window") {
    std::string pts = path_of("bal.csv");
    write_mixture(pts, 60, 7.0, 3);
    WeightedDataSet X = read_points_csv(pts);
    double half = X.total_weight() / 2;
    std::string cfg = path_of("bal.json");
    put(cfg, "{\"k\": 2, \"kappa\": [[" + std::to_string(half) + ", " + std::to_string(half) +
                 "], [" + std::to_string(half) + ", " + std::to_string(half) + "]]}");
    std::string outp = path_of("bal_cl.csv");
    CliRun r = run({"cluster", pts, "--eps", "0.3", "--config", cfg, "--seed", "5", "--out",
                    outp});
    REQUIRE(r.code == 0);
    Clustering C = read_clustering_csv(outp, 60);
    for (int i = 0; i < 2; ++i) {
        double mass = 0;
        for (int j = 0; j < 60; ++j) mass += C.xi(i, j) * X.weight(j);
        CHECK(mass == doctest::Approx(half).epsilon(1e-9));
    }
}

TEST_CASE("cluster tracks the direct heuristic on a separated mixture") {
    std::string pts = path_of("mix_demo.csv");
    write_mixture(pts, 240, 9.0, 4);
    WeightedDataSet X = read_points_csv(pts);
    CliRun r = run({"cluster", pts, "--k", "2", "--eps", "0.3", "--seed", "6",
                    "--reopt-sites", "--out", path_of("mix_cl.csv")});
    REQUIRE(r.code == 0);
    double direct = ab_approximate(X, 2, 1, 5, 6).alg_cost;
    CHECK(out_value(r.out, "extended cost") <= 1.3 * direct * 1.05);
    CHECK(out_value(r.out, "reopt cost") <= out_value(r.out, "extended cost") * (1 + 1e-12));
    CHECK(out_value(r.out, "coreset cost") > 0);
}

TEST_CASE("cluster invocations are bit-reproducible") {
    std::string pts = path_of("rep.csv");
    write_mixture(pts, 80, 5.0, 9);
    std::string o1 = path_of("rep1.csv"), o2 = path_of("rep2.csv");
    CliRun a = run({"cluster", pts, "--k", "2", "--eps", "0.4", "--seed", "11", "--out", o1});
    CliRun b = run({"cluster", pts, "--k", "2", "--eps", "0.4", "--seed", "11", "--out", o2});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(slurp(o1) == slurp(o2));
    // stdout differs only in the target path
    std::string at = a.out.substr(0, a.out.find("wrote "));
    std::string bt = b.out.substr(0, b.out.find("wrote "));
    CHECK(at == bt);
}

TEST_CASE("verify runs all harnesses on a small instance and reports PASS") {
    std::string pts = path_of("ver.csv");
    write_mixture(pts, 40, 6.0, 12);
    std::string csp = path_of("ver_cs.json");
    REQUIRE(run({"build-coreset", pts, "--k", "2", "--eps", "0.4", "--seed", "1", "--out",
                 csp})
                .code == 0);
    std::string rep = path_of("ver_rep");
    CliRun r = run({"verify", pts, "--k", "2", "--coreset", csp, "--trials", "12", "--seed",
                    "3", "--out", rep});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("coreset-properties PASS") != std::string::npos);
    CHECK(r.out.find("centroid-form PASS") != std::string::npos);
    CHECK(r.out.find("approx-preservation PASS") != std::string::npos);
    auto parsed = nlohmann::json::parse(slurp(rep + ".json"));
    CHECK(parsed["reports"].size() == 3);
    CHECK(slurp(rep + ".md").find("PASS") != std::string::npos);

    CliRun again = run({"verify", pts, "--k", "2", "--coreset", csp, "--trials", "12",
                        "--seed", "3", "--out", path_of("ver_rep2")});
    REQUIRE(again.code == 0);
    CHECK(slurp(path_of("ver_rep2") + ".json") == slurp(rep + ".json"));
}

TEST_CASE("verify skips the centroid harness on large instances") {
    std::string pts = path_of("ver_big.csv");
    write_mixture(pts, 70, 6.0, 13);
    std::string csp = path_of("ver_big_cs.json");
    REQUIRE(run({"build-coreset", pts, "--k", "2", "--eps", "0.5", "--out", csp}).code == 0);
    CliRun r = run({"verify", pts, "--k", "2", "--coreset", csp, "--trials", "8", "--out",
                    path_of("ver_big_rep")});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("centroid-form skipped") != std::string::npos);
    auto parsed = nlohmann::json::parse(slurp(path_of("ver_big_rep") + ".json"));
    CHECK(parsed["reports"].size() == 2);
}

TEST_CASE("sensitivity-demo estimates the circle bound") {
    CliRun r = run({"sensitivity-demo", "--n", "10", "--r", "0.01", "--trials", "20",
                    "--seed", "4"});
    REQUIRE(r.code == 0);
    CHECK(out_value(r.out, "estimated total") >= 9.99);
    CHECK(out_value(r.out, "estimated min bound") >= 0.999);
    CHECK(out_value(r.out, "per-point bound") == doctest::Approx(0.9801 / 0.981));
}

TEST_CASE("net writes the direction table") {
    std::string outp = path_of("net.csv");
    CliRun r = run({"net", "--eps", "0.4", "--dim", "2", "--out", outp});
    REQUIRE(r.code == 0);
    SiteSet S = read_sites_csv(outp);
    EpsilonNet net = build_epsilon_net(0.4, 2);
    REQUIRE(S.k() == static_cast<int>(net.directions.size()));
    for (int i = 0; i < S.k(); ++i) CHECK((S.site(i) - net.directions[i]).norm() == 0.0);

    CliRun bad = run({"net", "--eps", "0.8", "--dim", "2"});
    CHECK(bad.code != 0);
    CHECK(bad.err.find("(0, 1/2]") != std::string::npos);
}

TEST_CASE("plot renders points, pies, sites and boundaries deterministically") {
    std::string pts = path_of("plot_pts.csv");
    put(pts, "x0,x1\n0,0\n1,0.25\n0.5,1\n");

    std::string svg1 = path_of("plain.svg");
    CliRun plain = run({"plot", pts, "--out", svg1});
    REQUIRE(plain.code == 0);
    std::string body = slurp(svg1);
    CHECK(body.find("<svg") == 0);
    CHECK(std::count(body.begin(), body.end(), '\n') >= 5);
    CHECK(body.find("fill=\"black\"") != std::string::npos);
    CHECK(body.find("<path") == std::string::npos);

    std::string cl = path_of("plot_cl.csv");
    put(cl, "cluster,point,fraction\n0,0,0x1p-1\n1,0,0x1p-1\n0,1,0x1p+0\n1,2,0x1p+0\n");
    std::string sites = path_of("plot_sites.csv");
    put(sites, "x0,x1\n0,0\n1,1\n");
    std::string svg2 = path_of("full.svg");
    CliRun full =
        run({"plot", pts, "--clustering", cl, "--sites", sites, "--diagram", "--out", svg2});
    REQUIRE(full.code == 0);
    std::string fancy = slurp(svg2);
    CHECK(fancy.find("<path") != std::string::npos);    // pie wedges for point 0
    CHECK(fancy.find("<rect x=") != std::string::npos);  // site squares
    CHECK(fancy.find("<line") != std::string::npos);     // cell boundary

    std::string svg3 = path_of("full_again.svg");
    REQUIRE(run({"plot", pts, "--clustering", cl, "--sites", sites, "--diagram", "--out",
                 svg3})
                .code == 0);
    CHECK(slurp(svg3) == fancy);
}

TEST_CASE("plot refuses non-planar data") {
    std::string pts = path_of("plot3d.csv");
    put(pts, "x0,x1,x2\n0,0,0\n1,1,1\n");
    CliRun r = run({"plot", pts});
    CHECK(r.code != 0);
    CHECK(r.err.find("project") != std::string::npos);
}

TEST_CASE("bad usage exits nonzero and help exits zero") {
    CliRun nothing = run({});
    CHECK(nothing.code != 0);

    CliRun unknown = run({"assign", "--bogus"});
    CHECK(unknown.code != 0);

    CliRun help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("assign") != std::string::npos);
    CHECK(help.out.find("plot") != std::string::npos);
}
