#include "wca/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "wca/error.hpp"
#include "wca/parallel.hpp"
#include "wca/rng.hpp"
#include "wca/transport.hpp"

namespace wca {

namespace {

// splitmix64 finalizer; hands every trial an independent stream derived from
// the one report seed.
std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::pair<Vec, Vec> bounding_box(const WeightedDataSet& X) {
    Vec lo = X.point(0), hi = X.point(0);
    for (int j = 1; j < X.n(); ++j) {
        lo = lo.cwiseMin(X.point(j));
        hi = hi.cwiseMax(X.point(j));
    }
    return {lo, hi};
}

// lhs <= rhs at relative slack 1e-7, plus the observed ratio. A vanishing
// right side yields ratio 1 when the left vanishes too, infinity otherwise.
struct Leq {
    double ratio = 1;
    bool violated = false;
};

Leq check_leq(double lhs, double rhs) {
    double slack = 1e-7 * (1.0 + std::max(std::abs(lhs), std::abs(rhs)));
    Leq r;
    r.violated = lhs > rhs + slack;
    if (rhs > 0)
        r.ratio = lhs / rhs;
    else
        r.ratio = r.violated ? std::numeric_limits<double>::infinity() : 1.0;
    return r;
}

void check_coreset_matches(const Instance& inst, const Coreset& cs) {
    require(cs.source_n() == inst.data.n(), "coreset routes ", cs.source_n(),
            " source points but the instance has ", inst.data.n());
    require(cs.points().dim() == inst.data.dim(), "coreset points are ",
            cs.points().dim(), "-dimensional, the instance data is ",
            inst.data.dim(), "-dimensional");
    double w = inst.data.total_weight();
    require(std::abs(cs.source_weight() - w) <= 1e-9 * (1.0 + w),
            "coreset source weight ", cs.source_weight(),
            " disagrees with the instance weight ", w);
}

}  // namespace

Instance::Instance(WeightedDataSet data, int k, NormFamily norms, WeightBounds bounds)
    : data(std::move(data)), k(k), norms(std::move(norms)), bounds(std::move(bounds)) {
    require(this->k >= 1, "instance needs at least one cluster, got ", this->k);
    require(this->norms.k() == this->k, "instance norm family provides ",
            this->norms.k(), " matrices for ", this->k, " clusters");
    require(this->bounds.k() == this->k, "instance weight bounds cover ",
            this->bounds.k(), " clusters of ", this->k);
    require(this->norms.dim() == this->data.dim(), "instance norms are ",
            this->norms.dim(), "-dimensional, the data is ", this->data.dim(),
            "-dimensional");
    this->bounds.check_feasible(this->data.total_weight());
}

double Report::metric(const std::string& key) const {
    for (const auto& [name_, value] : metrics)
        if (name_ == key) return value;
    fail("report '", name, "' has no metric '", key, "'");
}

std::string reports_json(const std::vector<Report>& reports) {
    nlohmann::ordered_json root;
    root["reports"] = nlohmann::ordered_json::array();
    for (const Report& r : reports) {
        nlohmann::ordered_json jr;
        // seconds stays off the wire so identical runs serialize identically
        jr["name"] = r.name;
        jr["pass"] = r.pass;
        jr["seed"] = r.seed;
        nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
        for (const auto& [key, value] : r.metrics) metrics[key] = value;
        jr["metrics"] = std::move(metrics);
        jr["notes"] = r.notes;
        root["reports"].push_back(std::move(jr));
    }
    return root.dump(2) + "\n";
}

std::string reports_markdown(const std::vector<Report>& reports) {
    std::ostringstream os;
    os << "# verification report\n";
    for (const Report& r : reports) {
        os << "\n## " << r.name << ": " << (r.pass ? "PASS" : "FAIL") << "\n\n";
        os << "seed " << r.seed << "\n\n";
        os << std::setprecision(10);
        os << "| metric | value |\n|---|---|\n";
        for (const auto& [key, value] : r.metrics)
            os << "| " << key << " | " << value << " |\n";
        for (const std::string& note : r.notes) os << "\n- " << note;
        os << "\n";
    }
    return os.str();
}

SiteSet sample_sites(const WeightedDataSet& X, int k, std::uint64_t seed) {
    require(k >= 1, "site sample needs at least one site, got ", k);
    Rng rng(seed);
    auto [lo, hi] = bounding_box(X);
    Vec mid = 0.5 * (lo + hi);
    Vec half = 0.75 * (hi - lo);  // box half-extent inflated by 50 percent
    std::vector<Vec> sites(k, Vec(X.dim()));
    for (int i = 0; i < k; ++i)
        for (int c = 0; c < X.dim(); ++c)
            sites[i][c] = mid[c] + half[c] * (2.0 * rng.uniform() - 1.0);
    return SiteSet(std::move(sites));
}

Clustering random_feasible(const WeightedDataSet& X, const WeightBounds& K,
                           std::uint64_t seed) {
    K.check_feasible(X.total_weight());
    const int k = K.k(), n = X.n();
    Rng rng(seed);
    Mat unit_cost(k, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < k; ++i) unit_cost(i, j) = rng.uniform();
    std::vector<double> lo(k), hi(k);
    for (int i = 0; i < k; ++i) {
        lo[i] = K.lower(i);
        hi[i] = K.upper(i);
    }
    TransportSolution sol = solve_transport(unit_cost, X.weights(), lo, hi);
    Mat xi(k, n);
    for (int j = 0; j < n; ++j) {
        Vec col = sol.flow.col(j).cwiseMax(0.0);
        double s = col.sum();
        require(s > 0, "transport returned an empty column for point ", j);
        xi.col(j) = col / s;
    }
    return Clustering(std::move(xi));
}

SearchResult constrained_search(const WeightedDataSet& X, int k, const NormFamily& A,
                                const WeightBounds& K, int starts, std::uint64_t seed) {
    require(k >= 1, "search needs at least one cluster, got ", k);
    require(A.k() == k, "norm family provides ", A.k(), " matrices for ", k, " clusters");
    require(K.k() == k, "weight bounds cover ", K.k(), " clusters of ", k);
    require(A.dim() == X.dim(), "norms are ", A.dim(), "-dimensional, the data is ",
            X.dim(), "-dimensional");
    require(starts >= 1, "search needs at least one start, got ", starts);
    K.check_feasible(X.total_weight());

    const int n = X.n();
    std::vector<std::optional<SearchResult>> slot(starts);
    parallel_for(static_cast<std::size_t>(starts), [&](std::size_t s) {
        Rng rng(mix(seed, s));

        // D^2 seeding: first site by weight, the rest by weighted squared
        // distance to the nearest site chosen so far.
        std::vector<Vec> sites;
        sites.reserve(k);
        sites.push_back(X.point(rng.weighted_index(X.weights())));
        std::vector<double> d2(n);
        for (int j = 0; j < n; ++j)
            d2[j] = X.weight(j) * (X.point(j) - sites[0]).squaredNorm();
        while (static_cast<int>(sites.size()) < k) {
            sites.push_back(X.point(rng.weighted_index(d2)));
            for (int j = 0; j < n; ++j)
                d2[j] = std::min(d2[j], X.weight(j) *
                                            (X.point(j) - sites.back()).squaredNorm());
        }

        // Alternate the LP against fixed sites with the centroid update.
        // Each step is the exact minimizer of its half of the problem, so
        // the centroid-sited value never increases.
        std::optional<AssignmentResult> res;
        double value = kInf;
        for (int it = 0; it < 60; ++it) {
            res = solve_assignment(X, SiteSet(sites), A, K);
            double v = opt_site_cost(X, res->clustering, A);
            sites = centroid_sites(X, res->clustering).sites();
            if (v >= value - 1e-12 * (1.0 + std::abs(value))) {
                value = std::min(value, v);
                break;
            }
            value = v;
        }
        slot[s] = SearchResult{res->clustering, SiteSet(std::move(sites)), value};
    });

    int best = 0;
    for (int s = 1; s < starts; ++s)
        if (slot[s]->cost < slot[best]->cost) best = s;
    return std::move(*slot[best]);
}

Report check_coreset_properties(const Instance& inst, const Coreset& cs, int trials,
                                std::uint64_t seed) {
    require(trials >= 1, "coreset property check needs at least one trial, got ", trials);
    check_coreset_matches(inst, cs);
    auto t0 = std::chrono::steady_clock::now();

    const double eps = cs.epsilon();
    struct Trial {
        double worst_a = 0, worst_b = 0;
        int viol_a = 0, viol_b = 0;
        std::vector<std::string> notes;
    };
    std::vector<Trial> out(static_cast<std::size_t>(trials));

    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        Trial& tr = out[t];
        SiteSet S = sample_sites(inst.data, inst.k, mix(seed, 3 * t));
        AssignmentResult opt = solve_assignment(cs.points(), S, inst.norms, inst.bounds);

        std::vector<Clustering> cands;
        cands.reserve(4);
        cands.push_back(opt.clustering);
        for (std::uint64_t r = 0; r < 3; ++r)
            cands.push_back(random_feasible(cs.points(), inst.bounds,
                                            mix(seed, 3 * t + 1) + r));

        for (std::size_t c = 0; c < cands.size(); ++c) {
            double lhs = (1.0 - eps) * cost(inst.data, cs.extend(cands[c]), S, inst.norms);
            double rhs = cost(cs.points(), cands[c], S, inst.norms) + cs.delta_plus();
            Leq q = check_leq(lhs, rhs);
            tr.worst_a = std::max(tr.worst_a, q.ratio);
            if (q.violated) {
                ++tr.viol_a;
                tr.notes.push_back(cat("trial ", t, " clustering ", c, ": (a) ", lhs,
                                       " > ", rhs));
            }
        }

        double full = solve_assignment(inst.data, S, inst.norms, inst.bounds).cost;
        Leq q = check_leq(opt.cost + cs.delta_minus(), (1.0 + eps) * full);
        tr.worst_b = std::max(tr.worst_b, q.ratio);
        if (q.violated) {
            ++tr.viol_b;
            tr.notes.push_back(cat("trial ", t, ": (b) ", opt.cost + cs.delta_minus(),
                                   " > ", (1.0 + eps) * full));
        }
    });

    Report rep;
    rep.name = "coreset-properties";
    rep.seed = seed;
    double worst_a = 0, worst_b = 0;
    int viol_a = 0, viol_b = 0;
    for (const Trial& tr : out) {
        worst_a = std::max(worst_a, tr.worst_a);
        worst_b = std::max(worst_b, tr.worst_b);
        viol_a += tr.viol_a;
        viol_b += tr.viol_b;
        for (const std::string& note : tr.notes)
            if (rep.notes.size() < 32) rep.notes.push_back(note);
    }
    int total_viol = viol_a + viol_b;
    if (total_viol > static_cast<int>(rep.notes.size()))
        rep.notes.push_back(cat("and ", total_viol - static_cast<int>(rep.notes.size()),
                                " further violations"));
    rep.pass = total_viol == 0;
    rep.metrics = {{"trials", static_cast<double>(trials)},
                   {"clusterings_per_trial", 4.0},
                   {"violations_a", static_cast<double>(viol_a)},
                   {"violations_b", static_cast<double>(viol_b)},
                   {"worst_ratio_a", worst_a},
                   {"worst_ratio_b", worst_b},
                   {"epsilon", eps},
                   {"delta_plus", cs.delta_plus()},
                   {"delta_minus", cs.delta_minus()}};
    rep.seconds = seconds_since(t0);
    return rep;
}

Report check_centroid_form(const Instance& inst, const Coreset& cs, int trials,
                           std::uint64_t seed) {
    require(trials >= 1, "centroid form check needs at least one clustering, got ",
            trials);
    require(inst.k <= 3, "constrained optima are only estimated for k <= 3, got ",
            inst.k);
    require(inst.data.n() <= 60, "constrained optima are only estimated for n <= 60, got ",
            inst.data.n());
    check_coreset_matches(inst, cs);
    auto t0 = std::chrono::steady_clock::now();

    const double eps = cs.epsilon();
    struct Trial {
        double ratio = 0;
        bool violated = false;
        std::string note;
    };
    std::vector<Trial> out(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        Clustering Ct = random_feasible(cs.points(), inst.bounds, mix(seed, t));
        double lhs = (1.0 - eps) * opt_site_cost(inst.data, cs.extend(Ct), inst.norms);
        double rhs = opt_site_cost(cs.points(), Ct, inst.norms) + cs.delta_plus();
        Leq q = check_leq(lhs, rhs);
        out[t].ratio = q.ratio;
        out[t].violated = q.violated;
        if (q.violated)
            out[t].note = cat("clustering ", t, ": (a') ", lhs, " > ", rhs);
    });

    SearchResult on_coreset =
        constrained_search(cs.points(), inst.k, inst.norms, inst.bounds, 8, mix(seed, 0xc5));
    SearchResult on_data =
        constrained_search(inst.data, inst.k, inst.norms, inst.bounds, 8, mix(seed, 0xda));

    double lhs_b = on_coreset.cost + cs.delta_minus();
    double rhs_b = (1.0 + eps) * on_data.cost * (1.0 + 1e-6);
    bool consistent = lhs_b <= rhs_b;

    Report rep;
    rep.name = "centroid-form";
    rep.seed = seed;
    int viol = 0;
    double worst = 0;
    for (const Trial& tr : out) {
        worst = std::max(worst, tr.ratio);
        if (tr.violated) {
            ++viol;
            if (rep.notes.size() < 32) rep.notes.push_back(tr.note);
        }
    }
    rep.notes.push_back(cat("(b') ", consistent ? "consistent" : "inconsistent",
                            ": best-found coreset optimum ", on_coreset.cost,
                            " plus offset ", cs.delta_minus(),
                            " against (1+eps) times best-found data optimum ",
                            on_data.cost, "; both sides are heuristic upper bounds"));
    rep.pass = viol == 0 && consistent;
    rep.metrics = {{"clusterings", static_cast<double>(trials)},
                   {"violations_a_prime", static_cast<double>(viol)},
                   {"worst_ratio_a_prime", worst},
                   {"best_found_coreset", on_coreset.cost},
                   {"best_found_data", on_data.cost},
                   {"ratio_b_prime", rhs_b > 0 ? lhs_b / rhs_b
                                               : (consistent ? 1.0
                                                             : std::numeric_limits<double>::infinity())},
                   {"consistent_b_prime", consistent ? 1.0 : 0.0},
                   {"epsilon", eps}};
    rep.seconds = seconds_since(t0);
    return rep;
}

Report check_approx_preservation(const Instance& inst, const Coreset& cs, double gamma,
                                 int trials, std::uint64_t seed) {
    require(trials >= 1, "preservation check needs at least one trial, got ", trials);
    check_coreset_matches(inst, cs);
    require(gamma >= cs.delta(), "approximation preservation requires gamma >= delta, got gamma ",
            gamma, " with coreset delta ", cs.delta());
    auto t0 = std::chrono::steady_clock::now();

    // The theorem trades a coreset at accuracy eps/3 for a (1+eps) factor.
    const double eps = 3.0 * cs.epsilon();
    struct Trial {
        double ratio = 0;
        double ghat = 1;
        bool violated = false;
        bool zero = false;
        std::string note;
    };
    std::vector<Trial> out(static_cast<std::size_t>(trials));

    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        Trial& tr = out[t];
        SiteSet S = sample_sites(inst.data, inst.k, mix(seed, 2 * t));
        AssignmentResult opt = solve_assignment(cs.points(), S, inst.norms, inst.bounds);

        // Degrade the optimum to the target ratio by blending with a random
        // feasible clustering; cost is linear in the fractions, so the blend
        // lands on gamma exactly whenever the partner is expensive enough.
        Clustering degraded = opt.clustering;
        double floor = 1e-12 * (1.0 + cs.points().total_weight());
        if (opt.cost <= floor) {
            tr.zero = true;
        } else {
            Clustering rough = random_feasible(cs.points(), inst.bounds, mix(seed, 2 * t + 1));
            double crough = cost(cs.points(), rough, S, inst.norms);
            if (crough > gamma * opt.cost) {
                double b = (gamma - 1.0) * opt.cost / (crough - opt.cost);
                degraded = Clustering((1.0 - b) * opt.clustering.matrix() +
                                      b * rough.matrix());
            } else {
                degraded = rough;
            }
            tr.ghat = cost(cs.points(), degraded, S, inst.norms) / opt.cost;
            require(tr.ghat <= gamma * (1.0 + 1e-9), "degraded ratio ", tr.ghat,
                    " overshot the target ", gamma);
        }

        double lhs = cost(inst.data, cs.extend(degraded), S, inst.norms);
        double full = solve_assignment(inst.data, S, inst.norms, inst.bounds).cost;
        double rhs = (1.0 + eps) * tr.ghat * full;
        tr.violated = lhs > rhs * (1.0 + 1e-7) + 1e-12;
        tr.ratio = rhs > 0 ? lhs / rhs
                           : (tr.violated ? std::numeric_limits<double>::infinity() : 1.0);
        if (tr.violated)
            tr.note = cat("trial ", t, ": ", lhs, " > (1+", eps, ") * ", tr.ghat, " * ",
                          full);
    });

    Report rep;
    rep.name = "approx-preservation";
    rep.seed = seed;
    int viol = 0, zero = 0;
    double worst = 0, ghat_max = 0;
    for (const Trial& tr : out) {
        worst = std::max(worst, tr.ratio);
        ghat_max = std::max(ghat_max, tr.ghat);
        if (tr.zero) ++zero;
        if (tr.violated) {
            ++viol;
            if (rep.notes.size() < 32) rep.notes.push_back(tr.note);
        }
    }
    if (zero > 0)
        rep.notes.push_back(cat(zero, " trials had a vanishing coreset optimum and were "
                                      "checked undegraded"));
    rep.pass = viol == 0;
    rep.metrics = {{"trials", static_cast<double>(trials)},
                   {"violations", static_cast<double>(viol)},
                   {"worst_ratio", worst},
                   {"gamma", gamma},
                   {"gamma_hat_max", ghat_max},
                   {"epsilon", eps},
                   {"zero_cost_trials", static_cast<double>(zero)}};
    rep.seconds = seconds_since(t0);
    return rep;
}

std::vector<LineInterval> dissect_line(const AnisotropicDiagram& P, const Vec& c,
                                       const Vec& q) {
    require(c.size() == P.dim(), "line anchor is ", c.size(),
            "-dimensional, the diagram is ", P.dim(), "-dimensional");
    require(q.size() == P.dim(), "line direction is ", q.size(),
            "-dimensional, the diagram is ", P.dim(), "-dimensional");
    require(q.norm() > 0, "line direction must be nonzero");

    // Restrictions g_i(c + t q) = a t^2 + b t + c0 are univariate quadratics.
    const int k = P.k();
    std::vector<double> qa(k), qb(k), qc(k);
    for (int i = 0; i < k; ++i) {
        Vec y = c - P.sites().site(i);
        Vec Aq = P.norms().matrix(i) * q;
        qa[i] = q.dot(Aq);
        qb[i] = 2.0 * y.dot(Aq);
        qc[i] = y.dot(P.norms().matrix(i) * y) + P.size(i);
    }

    bool generic = true;
    std::vector<double> cuts;
    for (int i = 0; i < k; ++i) {
        for (int l = i + 1; l < k; ++l) {
            double da = qa[i] - qa[l], db = qb[i] - qb[l], dc = qc[i] - qc[l];
            auto negligible = [](double v, double ref) {
                return std::abs(v) <= 1e-10 * (1.0 + ref);
            };
            bool a0 = negligible(da, std::abs(qa[i]) + std::abs(qa[l]));
            bool b0 = negligible(db, std::abs(qb[i]) + std::abs(qb[l]));
            bool c0 = negligible(dc, std::abs(qc[i]) + std::abs(qc[l]));
            if (a0 && b0 && c0) {
                // Coinciding restrictions cannot be separated on this line;
                // the structural bound does not apply.
                generic = false;
                continue;
            }
            if (a0) {
                if (!b0) cuts.push_back(-dc / db);
                continue;
            }
            double disc = db * db - 4.0 * da * dc;
            if (disc <= 0) continue;  // a tangency flips no winner
            double root = std::sqrt(disc);
            // Citardauq pairing keeps both roots stable when db dominates.
            double m = db >= 0 ? -(db + root) / 2.0 : -(db - root) / 2.0;
            cuts.push_back(m / da);
            cuts.push_back(dc / m);
        }
    }

    std::sort(cuts.begin(), cuts.end());
    std::vector<double> keep;
    for (double t : cuts)
        if (keep.empty() || t > keep.back() + 1e-9 * (1.0 + std::abs(t)))
            keep.push_back(t);

    auto winners_at = [&](double t) {
        double best = kInf;
        for (int i = 0; i < k; ++i)
            best = std::min(best, (qa[i] * t + qb[i]) * t + qc[i]);
        std::vector<int> w;
        for (int i = 0; i < k; ++i)
            if ((qa[i] * t + qb[i]) * t + qc[i] <= best + 1e-9 * (1.0 + std::abs(best)))
                w.push_back(i);
        return w;
    };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> lo_end, hi_end, probe;
    if (keep.empty()) {
        lo_end = {-inf};
        hi_end = {inf};
        probe = {0.0};
    } else {
        lo_end.push_back(-inf);
        hi_end.push_back(keep.front());
        probe.push_back(keep.front() - 1.0);
        for (std::size_t s = 0; s + 1 < keep.size(); ++s) {
            lo_end.push_back(keep[s]);
            hi_end.push_back(keep[s + 1]);
            probe.push_back(0.5 * (keep[s] + keep[s + 1]));
        }
        lo_end.push_back(keep.back());
        hi_end.push_back(inf);
        probe.push_back(keep.back() + 1.0);
    }

    std::vector<LineInterval> cells;
    for (std::size_t s = 0; s < probe.size(); ++s) {
        std::vector<int> w = winners_at(probe[s]);
        if (!cells.empty() && cells.back().winners == w)
            cells.back().hi = hi_end[s];
        else
            cells.push_back({lo_end[s], hi_end[s], std::move(w)});
    }

    if (generic)
        require(static_cast<int>(cells.size()) <= 2 * k - 1, "line dissection found ",
                cells.size(), " intervals, above the structural bound ", 2 * k - 1);
    return cells;
}

SensitivityEstimate sensitivity_estimate(const WeightedDataSet& X, int k,
                                         const WeightBounds& K, int site_trials,
                                         std::uint64_t seed) {
    require(k >= 1, "sensitivity estimate needs at least one cluster, got ", k);
    require(K.k() == k, "weight bounds cover ", K.k(), " clusters of ", k);
    require(site_trials >= 0, "negative trial count ", site_trials);
    K.check_feasible(X.total_weight());

    const int n = X.n(), d = X.dim();
    NormFamily E = NormFamily::identity(k, d);

    // Probe family: all sites at the weighted centroid except one aimed far
    // along the ray through the probed point, so that a pinned cluster is
    // forced to pay the long distance. Degenerate rays collapse the probe to
    // the centroid alone.
    Vec cen = Vec::Zero(d);
    for (int j = 0; j < n; ++j) cen += X.weight(j) * X.point(j);
    cen /= X.total_weight();
    auto [lo, hi] = bounding_box(X);
    double reach = std::max(1.0, 2.0 * (hi - lo).norm());
    double norm_scale = 0;
    for (int j = 0; j < n; ++j)
        norm_scale = std::max(norm_scale, X.point(j).squaredNorm());
    double zero_floor = 1e-18 * X.total_weight() * (1.0 + norm_scale);

    const int total = site_trials + n;
    std::vector<std::vector<double>> share(static_cast<std::size_t>(total));
    std::vector<char> zero(static_cast<std::size_t>(total), 0);
    parallel_for(static_cast<std::size_t>(total), [&](std::size_t t) {
        SiteSet S = [&] {
            if (static_cast<int>(t) < site_trials) return sample_sites(X, k, mix(seed, t));
            int j0 = static_cast<int>(t) - site_trials;
            std::vector<Vec> sites(k, cen);
            Vec u = X.point(j0) - cen;
            if (k >= 2 && u.norm() > 1e-12 * (1.0 + X.point(j0).norm()))
                sites[1] = cen + (reach / u.norm()) * u;
            return SiteSet(std::move(sites));
        }();
        AssignmentResult res = solve_assignment(X, S, E, K);
        if (res.cost <= zero_floor) {
            zero[t] = 1;
            return;
        }
        std::vector<double> r(n);
        for (int j = 0; j < n; ++j) {
            double s = 0;
            for (int i = 0; i < k; ++i)
                s += res.clustering.xi(i, j) * X.weight(j) *
                     (X.point(j) - S.site(i)).squaredNorm();
            r[j] = s / res.cost;
        }
        share[t] = std::move(r);
    });

    SensitivityEstimate est;
    est.point_bound.assign(n, 0.0);
    est.trials = total;
    est.seed = seed;
    for (int t = 0; t < total; ++t) {
        if (zero[t]) {
            ++est.zero_cost;
            continue;
        }
        for (int j = 0; j < n; ++j)
            est.point_bound[j] = std::max(est.point_bound[j], share[t][j]);
    }
    for (int j = 0; j < n; ++j) {
        require(est.point_bound[j] <= 1.0 + 1e-9, "sensitivity share ",
                est.point_bound[j], " of point ", j, " exceeds one");
        est.point_bound[j] = std::min(est.point_bound[j], 1.0);
        est.total += est.point_bound[j];
    }
    require(est.total <= n * (1.0 + 1e-9), "total sensitivity ", est.total,
            " exceeds the point count ", n);
    return est;
}

SensitivityExample sensitivity_example(int n, double r) {
    require(n >= 2, "circle instance needs at least two points, got ", n);
    require(r > 0.0 && r < 0.5, "circle radius must lie in (0, 1/2), got ", r);

    const double tau = 6.283185307179586476925286766559;
    std::vector<Vec> pts(static_cast<std::size_t>(n), Vec(2));
    for (int j = 0; j < n; ++j) {
        double a = tau * j / n;
        pts[j] << r * std::cos(a), r * std::sin(a);
    }
    WeightedDataSet X(pts, std::vector<double>(static_cast<std::size_t>(n), 1.0));
    WeightBounds K({static_cast<double>(n - 1), 1.0}, {static_cast<double>(n - 1), 1.0});
    NormFamily E = NormFamily::identity(2, 2);

    double exact = (n - 1) * r * r + (1.0 - r) * (1.0 - r);
    std::vector<SiteSet> probes;
    probes.reserve(static_cast<std::size_t>(n));
    for (int j0 = 0; j0 < n; ++j0) {
        SiteSet S({Vec::Zero(2), pts[static_cast<std::size_t>(j0)] / r});
        AssignmentResult res = solve_assignment(X, S, E, K);
        require(std::abs(res.cost - exact) <= 1e-9 * exact, "probe ", j0,
                " has LP cost ", res.cost, " but the closed form gives ", exact);
        require(res.clustering.is_integral(1e-12), "probe ", j0,
                " produced a fractional optimum");
        std::vector<int> small = res.clustering.support(1);
        require(small.size() == 1 && small[0] == j0, "probe ", j0,
                " does not trap its point alone in the small cluster");
        probes.push_back(std::move(S));
    }
    return SensitivityExample{std::move(X), std::move(K), 2, exact,
                              (1.0 - r) * (1.0 - r) / exact, std::move(probes)};
}

}  // namespace wca
