#include "wca/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "wca/assign.hpp"
#include "wca/coreset.hpp"
#include "wca/epsnet.hpp"
#include "wca/error.hpp"
#include "wca/io.hpp"
#include "wca/verify.hpp"

namespace wca {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    require(out.is_open(), "cannot write '", path, "'");
    return out;
}

// ---------------------------------------------------------------- plotting

constexpr double kCanvas = 640;
constexpr double kMargin = 40;

const char* const kPalette[10] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                  "#edc949", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

struct View {
    double lox = 0, loy = 0, scale = 1, offx = 0, offy = 0;

    double X(double x) const { return offx + (x - lox) * scale; }
    double Y(double y) const { return kCanvas - (offy + (y - loy) * scale); }
    double inv_x(double p) const { return lox + (p - offx) / scale; }
    double inv_y(double q) const { return loy + (kCanvas - q - offy) / scale; }
};

View fit_view(const WeightedDataSet& X, const SiteSet* S) {
    Vec lo = X.point(0), hi = X.point(0);
    for (int j = 1; j < X.n(); ++j) {
        lo = lo.cwiseMin(X.point(j));
        hi = hi.cwiseMax(X.point(j));
    }
    if (S)
        for (int i = 0; i < S->k(); ++i) {
            lo = lo.cwiseMin(S->site(i));
            hi = hi.cwiseMax(S->site(i));
        }
    for (int c = 0; c < 2; ++c) {
        if (hi[c] - lo[c] < 1e-9) {
            lo[c] -= 0.5;
            hi[c] += 0.5;
        }
        double pad = 0.05 * (hi[c] - lo[c]);
        lo[c] -= pad;
        hi[c] += pad;
    }
    View v;
    v.lox = lo[0];
    v.loy = lo[1];
    double inner = kCanvas - 2 * kMargin;
    v.scale = std::min(inner / (hi[0] - lo[0]), inner / (hi[1] - lo[1]));
    v.offx = kMargin + (inner - (hi[0] - lo[0]) * v.scale) / 2;
    v.offy = kMargin + (inner - (hi[1] - lo[1]) * v.scale) / 2;
    return v;
}

// Boundary sketch: label a pixel grid by the envelope argmin and join the
// midpoints of label-changing cell edges pairwise.
void render_boundaries(std::ostream& svg, const AnisotropicDiagram& P, const View& v) {
    const int N = 240;
    std::vector<int> lab(static_cast<std::size_t>((N + 1) * (N + 1)));
    for (int gj = 0; gj <= N; ++gj)
        for (int gi = 0; gi <= N; ++gi) {
            Vec x(2);
            x << v.inv_x(kCanvas * gi / N), v.inv_y(kCanvas * gj / N);
            int arg = 0;
            double best = P.g(0, x);
            for (int i = 1; i < P.k(); ++i) {
                double g = P.g(i, x);
                if (g < best) {
                    best = g;
                    arg = i;
                }
            }
            lab[static_cast<std::size_t>(gj * (N + 1) + gi)] = arg;
        }
    auto at = [&](int gi, int gj) { return lab[static_cast<std::size_t>(gj * (N + 1) + gi)]; };
    const double step = kCanvas / N;
    for (int gj = 0; gj < N; ++gj)
        for (int gi = 0; gi < N; ++gi) {
            double x0 = gi * step, y0 = gj * step;
            std::vector<std::pair<double, double>> mid;
            if (at(gi, gj) != at(gi + 1, gj)) mid.emplace_back(x0 + step / 2, y0);
            if (at(gi + 1, gj) != at(gi + 1, gj + 1))
                mid.emplace_back(x0 + step, y0 + step / 2);
            if (at(gi, gj + 1) != at(gi + 1, gj + 1)) mid.emplace_back(x0 + step / 2, y0 + step);
            if (at(gi, gj) != at(gi, gj + 1)) mid.emplace_back(x0, y0 + step / 2);
            for (std::size_t m = 0; m + 1 < mid.size(); m += 2)
                svg << "<line x1=\"" << px(mid[m].first) << "\" y1=\"" << px(mid[m].second)
                    << "\" x2=\"" << px(mid[m + 1].first) << "\" y2=\""
                    << px(mid[m + 1].second) << "\" stroke=\"#888\" stroke-width=\"1\"/>\n";
        }
}

void render_pie(std::ostream& svg, double cx, double cy, double r, const Clustering& C,
                int j) {
    double a0 = -M_PI / 2;
    for (int i = 0; i < C.k(); ++i) {
        double f = C.xi(i, j);
        if (f < 1e-9) continue;
        double a1 = a0 + f * 2 * M_PI;
        double x0 = cx + r * std::cos(a0), y0 = cy + r * std::sin(a0);
        double x1 = cx + r * std::cos(a1), y1 = cy + r * std::sin(a1);
        int large = (a1 - a0 > M_PI) ? 1 : 0;
        svg << "<path d=\"M " << px(cx) << " " << px(cy) << " L " << px(x0) << " " << px(y0)
            << " A " << px(r) << " " << px(r) << " 0 " << large << " 1 " << px(x1) << " "
            << px(y1) << " Z\" fill=\"" << kPalette[i % 10] << "\"/>\n";
        a0 = a1;
    }
}

std::string render_svg(const WeightedDataSet& X, const Clustering* C, const SiteSet* S,
                       const AnisotropicDiagram* P) {
    View v = fit_view(X, S);
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
           "viewBox=\"0 0 640 640\">\n";
    svg << "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
    if (P) render_boundaries(svg, *P, v);
    for (int j = 0; j < X.n(); ++j) {
        double cx = v.X(X.point(j)[0]), cy = v.Y(X.point(j)[1]);
        if (!C) {
            svg << "<circle cx=\"" << px(cx) << "\" cy=\"" << px(cy)
                << "\" r=\"3.5\" fill=\"black\"/>\n";
            continue;
        }
        int dom = 0;
        double top = C->xi(0, j);
        for (int i = 1; i < C->k(); ++i)
            if (C->xi(i, j) > top) {
                top = C->xi(i, j);
                dom = i;
            }
        if (top >= 1 - 1e-9)
            svg << "<circle cx=\"" << px(cx) << "\" cy=\"" << px(cy) << "\" r=\"3.5\" fill=\""
                << kPalette[dom % 10] << "\"/>\n";
        else
            render_pie(svg, cx, cy, 5.0, *C, j);
    }
    if (S)
        for (int i = 0; i < S->k(); ++i) {
            double cx = v.X(S->site(i)[0]), cy = v.Y(S->site(i)[1]);
            svg << "<rect x=\"" << px(cx - 4.5) << "\" y=\"" << px(cy - 4.5)
                << "\" width=\"9\" height=\"9\" fill=\"black\"/>\n";
        }
    svg << "</svg>\n";
    return svg.str();
}

// ---------------------------------------------------------------- commands

struct CommonOpts {
    std::string points;
    std::string config;
    std::string out;
    int k = 0;
    double eps = 0;
    int beta = 1;
    int repeats = 5;
    double alpha = 16;
    int trials = 40;
    std::uint64_t seed = 0;
};

InstanceConfig load_config(const std::string& path) {
    return path.empty() ? InstanceConfig{} : read_config(path);
}

int resolve_k(const InstanceConfig& cfg, int flag_k) {
    if (flag_k > 0 && cfg.k > 0)
        require(flag_k == cfg.k, "config k = ", cfg.k, " disagrees with --k ", flag_k);
    int k = flag_k > 0 ? flag_k : cfg.k;
    require(k >= 1, "cluster count missing: pass --k or set k in the config");
    return k;
}

int cmd_assign(const CommonOpts& o, const std::string& sites_path, const std::string& cert,
               std::ostream& out) {
    WeightedDataSet X = read_points_csv(o.points);
    SiteSet S = read_sites_csv(sites_path);
    require(S.dim() == X.dim(), "sites are ", S.dim(), "-dimensional, the data is ",
            X.dim(), "-dimensional");
    InstanceConfig cfg = load_config(o.config);
    require(cfg.k == 0 || cfg.k == S.k(), "config k = ", cfg.k, " disagrees with ", S.k(),
            " sites");
    AssignmentResult res =
        solve_assignment(X, S, cfg.norm_family(S.k(), X.dim()), cfg.bounds(S.k()));
    write_clustering_csv(o.out, res.clustering);

    std::string cert_path = cert.empty() ? o.out + ".cert.json" : cert;
    nlohmann::ordered_json cj;
    cj["cost"] = res.cost;
    cj["dual_objective"] = res.certificate.dual_objective;
    cj["duality_gap"] = res.certificate.duality_gap;
    cj["cs_residual"] = res.certificate.cs_residual;
    cj["perturbation_seed"] = res.certificate.seed;
    cj["point_price"] = res.certificate.point_price;
    cj["lower_price"] = res.certificate.lower_price;
    cj["upper_price"] = res.certificate.upper_price;
    open_out(cert_path) << cj.dump(2) << "\n";

    out << "cost " << g17(res.cost) << "\n";
    out << "duality gap " << g17(res.certificate.duality_gap) << "\n";
    out << "cs residual " << g17(res.certificate.cs_residual) << "\n";
    out << "wrote " << o.out << "\n";
    out << "wrote " << cert_path << "\n";
    return 0;
}

int cmd_build_coreset(const CommonOpts& o, std::ostream& out) {
    WeightedDataSet X = read_points_csv(o.points);
    InstanceConfig cfg = load_config(o.config);
    int k = resolve_k(cfg, o.k);
    Coreset cs = build_coreset(X, k, o.eps, cfg.norm_family(k, X.dim()),
                               CoresetConfig{o.beta, o.repeats, o.seed, o.alpha});
    write_coreset_json(o.out, cs);

    const Provenance& prov = cs.provenance();
    out << "size " << cs.points().n() << "\n";
    if (prov.vbar > 0)
        out << "size bound "
            << g17(2 * prov.alg / prov.vbar + k * static_cast<double>(prov.lines)) << "\n";
    else
        out << "size bound n/a (degenerate batch threshold)\n";
    out << "delta+ " << g17(cs.delta_plus()) << "\n";
    out << "delta- " << g17(cs.delta_minus()) << "\n";
    out << "delta " << g17(cs.delta()) << "\n";
    out << "wrote " << o.out << "\n";
    return 0;
}

int cmd_cluster(const CommonOpts& o, bool reopt, std::ostream& out) {
    require(o.eps > 0 && o.eps <= 1, "accuracy must lie in (0, 1], got ", o.eps);
    WeightedDataSet X = read_points_csv(o.points);
    InstanceConfig cfg = load_config(o.config);
    int k = resolve_k(cfg, o.k);
    NormFamily A = cfg.norm_family(k, X.dim());
    WeightBounds K = cfg.bounds(k);

    // a coreset at a third of the accuracy keeps the final guarantee at
    // (1 + eps) times the heuristic's own factor
    Coreset cs = build_coreset(X, k, o.eps / 3, A, CoresetConfig{o.beta, o.repeats, o.seed,
                                                                 o.alpha});
    SearchResult found = constrained_search(cs.points(), k, A, K, o.repeats, o.seed);
    Clustering full = cs.extend(found.clustering);
    double extended = cost(X, full, found.sites, A);
    write_clustering_csv(o.out, full);

    out << "coreset size " << cs.points().n() << "\n";
    out << "coreset cost " << g17(found.cost) << "\n";
    out << "extended cost " << g17(extended) << "\n";
    if (reopt) out << "reopt cost " << g17(opt_site_cost(X, full, A)) << "\n";
    out << "wrote " << o.out << "\n";
    return 0;
}

int cmd_verify(const CommonOpts& o, const std::string& coreset_path, double gamma,
               std::ostream& out) {
    WeightedDataSet X = read_points_csv(o.points);
    InstanceConfig cfg = load_config(o.config);
    int k = resolve_k(cfg, o.k);
    Coreset cs = read_coreset_json(coreset_path);
    Instance inst(X, k, cfg.norm_family(k, X.dim()), cfg.bounds(k));

    std::vector<Report> reports;
    reports.push_back(check_coreset_properties(inst, cs, o.trials, o.seed));
    if (X.n() <= 60 && k <= 3)
        reports.push_back(check_centroid_form(inst, cs, o.trials, o.seed));
    else
        out << "centroid-form skipped (estimated optima need n <= 60 and k <= 3)\n";
    double g = gamma > 0 ? gamma : std::max(1.0, cs.delta());
    reports.push_back(check_approx_preservation(inst, cs, g, o.trials, o.seed));

    open_out(o.out + ".json") << reports_json(reports);
    open_out(o.out + ".md") << reports_markdown(reports);
    bool all = true;
    for (const Report& r : reports) {
        out << r.name << (r.pass ? " PASS" : " FAIL") << "\n";
        all = all && r.pass;
    }
    out << "wrote " << o.out << ".json\n";
    out << "wrote " << o.out << ".md\n";
    return all ? 0 : 1;
}

int cmd_sensitivity_demo(int n, double r, const CommonOpts& o, const std::string& emit,
                         int probe, std::ostream& out) {
    SensitivityExample ex = sensitivity_example(n, r);
    out << "n " << n << "\n";
    out << "r " << g17(r) << "\n";
    out << "exact cost " << g17(ex.exact_cost) << "\n";
    out << "per-point bound " << g17(ex.point_bound) << "\n";
    if (!emit.empty()) {
        require(probe >= 0 && probe < n, "probe index ", probe, " outside [0, ", n, ")");
        std::filesystem::create_directories(emit);
        std::string points_path = emit + "/points.csv";
        std::string config_path = emit + "/config.json";
        std::string sites_path = emit + "/sites.csv";
        write_points_csv(points_path, ex.data);
        write_config(config_path, 2,
                     {{static_cast<double>(n - 1), static_cast<double>(n - 1)}, {1.0, 1.0}});
        write_sites_csv(sites_path, ex.probes[static_cast<std::size_t>(probe)]);
        out << "wrote " << points_path << "\n";
        out << "wrote " << config_path << "\n";
        out << "wrote " << sites_path << "\n";
        return 0;
    }
    SensitivityEstimate est = sensitivity_estimate(ex.data, ex.k, ex.bounds, o.trials, o.seed);
    double lowest = *std::min_element(est.point_bound.begin(), est.point_bound.end());
    out << "estimated total " << g17(est.total) << "\n";
    out << "estimated min bound " << g17(lowest) << "\n";
    out << "trials " << est.trials << "\n";
    return 0;
}

int cmd_net(double eps, int dim, const std::string& out_path, std::ostream& out) {
    EpsilonNet net = build_epsilon_net(eps, dim);
    write_sites_csv(out_path, SiteSet(net.directions));
    out << "directions " << net.directions.size() << "\n";
    out << "wrote " << out_path << "\n";
    return 0;
}

int cmd_plot(const CommonOpts& o, const std::string& clustering_path,
             const std::string& sites_path, bool diagram, std::ostream& out) {
    WeightedDataSet X = read_points_csv(o.points);
    require(X.dim() == 2, "plot renders 2-dimensional data, got d = ", X.dim(),
            "; project the data to a plane first");
    std::optional<Clustering> C;
    if (!clustering_path.empty()) C = read_clustering_csv(clustering_path, X.n());
    std::optional<SiteSet> S;
    if (!sites_path.empty()) {
        S = read_sites_csv(sites_path);
        require(S->dim() == 2, "sites are ", S->dim(), "-dimensional, the plot is planar");
    }
    std::optional<AnisotropicDiagram> P;
    if (diagram) {
        require(S.has_value(), "--diagram needs --sites");
        InstanceConfig cfg = load_config(o.config);
        require(cfg.k == 0 || cfg.k == S->k(), "config k = ", cfg.k, " disagrees with ",
                S->k(), " sites");
        DiagramExtraction ext =
            extract_diagram(X, *S, cfg.norm_family(S->k(), 2), cfg.bounds(S->k()));
        P = std::move(ext.diagram);
    }
    std::string svg = render_svg(X, C ? &*C : nullptr, S ? &*S : nullptr, P ? &*P : nullptr);
    open_out(o.out) << svg;
    out << "wrote " << o.out << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"weight-constrained anisotropic clustering tools", "wca"};
    app.require_subcommand(1);

    CommonOpts ao;
    std::string assign_sites, assign_cert;
    ao.out = "clustering.csv";
    CLI::App* assign = app.add_subcommand("assign", "solve the assignment LP against fixed sites");
    assign->add_option("points", ao.points, "points CSV")->required();
    assign->add_option("sites", assign_sites, "sites CSV")->required();
    assign->add_option("--config", ao.config, "instance config JSON");
    assign->add_option("--out", ao.out, "clustering CSV path")->capture_default_str();
    assign->add_option("--cert", assign_cert, "certificate path (default <out>.cert.json)");

    CommonOpts bo;
    bo.out = "coreset.json";
    CLI::App* build = app.add_subcommand("build-coreset", "compress points into a coreset");
    build->add_option("points", bo.points, "points CSV")->required();
    build->add_option("--k", bo.k, "cluster count");
    build->add_option("--eps", bo.eps, "coreset accuracy in (0, 1/2]")->required();
    build->add_option("--beta", bo.beta, "cluster inflation of the front-end approximation")
        ->capture_default_str();
    build->add_option("--repeats", bo.repeats, "front-end restarts")->capture_default_str();
    build->add_option("--alpha", bo.alpha, "assumed front-end approximation factor")
        ->capture_default_str();
    build->add_option("--seed", bo.seed, "random seed")->capture_default_str();
    build->add_option("--config", bo.config, "instance config JSON (norms)");
    build->add_option("--out", bo.out, "coreset JSON path")->capture_default_str();

    CommonOpts co;
    co.out = "clustering.csv";
    bool cluster_reopt = false;
    CLI::App* cluster = app.add_subcommand("cluster", "cluster via a coreset at eps/3");
    cluster->add_option("points", co.points, "points CSV")->required();
    cluster->add_option("--k", co.k, "cluster count");
    cluster->add_option("--eps", co.eps, "end-to-end accuracy in (0, 1]")->required();
    cluster->add_option("--beta", co.beta, "cluster inflation of the front-end approximation")
        ->capture_default_str();
    cluster->add_option("--repeats", co.repeats, "heuristic restarts")->capture_default_str();
    cluster->add_option("--alpha", co.alpha, "assumed front-end approximation factor")
        ->capture_default_str();
    cluster->add_option("--seed", co.seed, "random seed")->capture_default_str();
    cluster->add_option("--config", co.config, "instance config JSON");
    cluster->add_option("--out", co.out, "clustering CSV path")->capture_default_str();
    cluster->add_flag("--reopt-sites", cluster_reopt,
                      "re-optimize sites once on the full data");

    CommonOpts vo;
    vo.out = "report";
    std::string verify_coreset;
    double verify_gamma = 0;
    CLI::App* verify = app.add_subcommand("verify", "run the empirical coreset harnesses");
    verify->add_option("points", vo.points, "points CSV")->required();
    verify->add_option("--coreset", verify_coreset, "coreset JSON")->required();
    verify->add_option("--config", vo.config, "instance config JSON");
    verify->add_option("--k", vo.k, "cluster count");
    verify->add_option("--trials", vo.trials, "site trials per harness")->capture_default_str();
    verify->add_option("--seed", vo.seed, "random seed")->capture_default_str();
    verify->add_option("--gamma", verify_gamma,
                       "degradation factor for the preservation harness (default max(1, delta))");
    verify->add_option("--out", vo.out, "report base path")->capture_default_str();

    CommonOpts so;
    int demo_n = 0, demo_probe = 0;
    double demo_r = 0;
    std::string demo_emit;
    so.trials = 20;
    CLI::App* demo = app.add_subcommand("sensitivity-demo",
                                        "circle instance where importance sampling fails");
    demo->add_option("--n", demo_n, "point count (>= 2)")->required();
    demo->add_option("--r", demo_r, "circle radius in (0, 1/2)")->required();
    demo->add_option("--trials", so.trials, "random site trials")->capture_default_str();
    demo->add_option("--seed", so.seed, "random seed")->capture_default_str();
    demo->add_option("--emit", demo_emit, "write instance files into this directory");
    demo->add_option("--probe", demo_probe, "probe index for the emitted sites file")
        ->capture_default_str();

    double net_eps = 0;
    int net_dim = 0;
    std::string net_out = "net.csv";
    CLI::App* net = app.add_subcommand("net", "directions covering the unit sphere");
    net->add_option("--eps", net_eps, "covering accuracy in (0, 1/2]")->required();
    net->add_option("--dim", net_dim, "ambient dimension")->required();
    net->add_option("--out", net_out, "directions CSV path")->capture_default_str();

    CommonOpts po;
    po.out = "plot.svg";
    std::string plot_clustering, plot_sites;
    bool plot_diagram = false;
    CLI::App* plot = app.add_subcommand("plot", "render points, clustering and sites as SVG");
    plot->add_option("points", po.points, "points CSV")->required();
    plot->add_option("--clustering", plot_clustering, "clustering CSV overlay");
    plot->add_option("--sites", plot_sites, "sites CSV overlay");
    plot->add_option("--config", po.config, "instance config JSON for --diagram");
    plot->add_flag("--diagram", plot_diagram, "draw diagram cell boundaries");
    plot->add_option("--out", po.out, "SVG path")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (app.got_subcommand(assign)) return cmd_assign(ao, assign_sites, assign_cert, out);
        if (app.got_subcommand(build)) return cmd_build_coreset(bo, out);
        if (app.got_subcommand(cluster)) return cmd_cluster(co, cluster_reopt, out);
        if (app.got_subcommand(verify)) return cmd_verify(vo, verify_coreset, verify_gamma, out);
        if (app.got_subcommand(demo))
            return cmd_sensitivity_demo(demo_n, demo_r, so, demo_emit, demo_probe, out);
        if (app.got_subcommand(net)) return cmd_net(net_eps, net_dim, net_out, out);
        if (app.got_subcommand(plot))
            return cmd_plot(po, plot_clustering, plot_sites, plot_diagram, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run_cli(const std::vector<std::string>& args) {
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace wca
