#include "wca/assign.hpp"

#include <algorithm>
#include <cmath>

#include "wca/rng.hpp"
#include "wca/transport.hpp"

namespace wca {

namespace {

constexpr double kXiTruncation = 1e-9;   // fractions below this are dropped
constexpr double kGapTol = 1e-9;         // cell membership, on g-value gaps
constexpr double kCertRelTol = 1e-8;     // duality gap and CS residual

Mat unit_costs(const WeightedDataSet& X, const SiteSet& S, const NormFamily& A) {
    Mat c(S.k(), X.n());
    for (int i = 0; i < S.k(); ++i)
        for (int j = 0; j < X.n(); ++j) c(i, j) = A.norm2(i, X.point(j) - S.site(i));
    return c;
}

void check_shapes(const WeightedDataSet& X, const SiteSet& S, const NormFamily& A,
                  const WeightBounds& K) {
    require(S.k() == K.k(), "site set has ", S.k(), " sites but bounds cover ", K.k());
    require(S.k() == A.k(), "site set has ", S.k(), " sites but norm family has ", A.k());
    require(S.dim() == X.dim(), "sites have dimension ", S.dim(), " but points have ",
            X.dim());
    require(A.dim() == X.dim(), "norms have dimension ", A.dim(), " but points have ",
            X.dim());
}

AssignmentResult nearest_site_assignment(const WeightedDataSet& X, const SiteSet& S,
                                         const NormFamily& A) {
    const int n = X.n(), k = S.k();
    Mat xi = Mat::Zero(k, n);
    DualCertificate cert;
    cert.point_price.resize(n);
    cert.lower_price.assign(k, 0.0);
    cert.upper_price.assign(k, 0.0);
    double total = 0;
    for (int j = 0; j < n; ++j) {
        int best = 0;
        double best_c = A.norm2(0, X.point(j) - S.site(0));
        for (int i = 1; i < k; ++i) {
            double c = A.norm2(i, X.point(j) - S.site(i));
            if (c < best_c) { best_c = c; best = i; }
        }
        xi(best, j) = 1.0;
        cert.point_price[j] = best_c;
        total += X.weight(j) * best_c;
    }
    cert.dual_objective = total;
    return {Clustering(std::move(xi)), std::move(cert), total};
}

// Fractions below the truncation threshold are zeroed and the column
// renormalized. Done only after the certificate is computed.
Mat truncated(Mat xi) {
    for (int j = 0; j < xi.cols(); ++j) {
        double sum = 0;
        for (int i = 0; i < xi.rows(); ++i) {
            if (xi(i, j) < kXiTruncation) xi(i, j) = 0;
            sum += xi(i, j);
        }
        xi.col(j) /= sum;
    }
    return xi;
}

// The tree duals of a degenerate LP sit on a vertex of the optimal dual
// face, which makes some zero-flow arc tight, i.e. parks a non-support point
// exactly on a cell boundary. Any point of the face is an equally valid
// certificate (the face is cut out by complementary slackness with the fixed
// optimal flow), so push the multipliers to the face's relative interior:
// maximize the minimum slack of the non-support membership inequalities.
// Tightness of support arcs welds the clusters a split point touches into
// groups that must shift together; what remains is a system of difference
// constraints on the group shifts, solved by binary search on the slack
// target with Bellman-Ford feasibility underneath.
std::vector<double> refine_sizes(const Mat& c, const WeightedDataSet& X,
                                 const Clustering& C, const WeightBounds& K,
                                 std::vector<double> pi) {
    const int n = X.n(), k = C.k();
    if (k == 1) return pi;

    std::vector<int> uf(k);
    for (int i = 0; i < k; ++i) uf[i] = i;
    auto find = [&](int v) {
        while (uf[v] != v) v = uf[v] = uf[uf[v]];
        return v;
    };
    std::vector<int> anchor(n, -1);  // one support cluster per point
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < k; ++i)
            if (C.xi(i, j) > 0) {
                if (anchor[j] < 0) anchor[j] = i;
                else uf[find(i)] = find(anchor[j]);
            }

    // Allowed shift window per group, from the bound-activity pattern: a
    // cluster strictly inside its window must keep multiplier 0, one at a
    // single bound side must keep the multiplier's sign, a pinned window
    // (lower = upper) leaves it free.
    double atol = 1e-9 * (1 + X.total_weight());
    std::vector<double> shift_lo(k, -kInf), shift_hi(k, kInf);
    for (int i = 0; i < k; ++i) {
        double mass = 0;
        for (int j = 0; j < n; ++j) mass += C.xi(i, j) * X.weight(j);
        bool at_lower = std::abs(mass - K.lower(i)) <= atol;
        bool at_upper = K.upper(i) != kInf && std::abs(mass - K.upper(i)) <= atol;
        int r = find(i);
        if (at_lower && at_upper) continue;
        if (at_lower) shift_hi[r] = std::min(shift_hi[r], std::max(0.0, -pi[i]));
        else if (at_upper) shift_lo[r] = std::max(shift_lo[r], std::min(0.0, -pi[i]));
        else {
            shift_lo[r] = std::max(shift_lo[r], 0.0);
            shift_hi[r] = std::min(shift_hi[r], 0.0);
        }
    }

    std::vector<double> u(n);
    for (int j = 0; j < n; ++j) u[j] = c(anchor[j], j) + pi[anchor[j]];

    struct DiffArc {
        int a, b;   // shift[b] - shift[a] <= slack - target
        double slack;
    };
    std::vector<DiffArc> arcs;
    double cap = kInf, widest = 0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) {
            if (C.xi(i, j) > 0) continue;
            double s = std::max(0.0, c(i, j) + pi[i] - u[j]);
            int a = find(i), b = find(anchor[j]);
            if (a == b) cap = std::min(cap, s);
            else {
                arcs.push_back({a, b, s});
                widest = std::max(widest, s);
            }
        }
    if (arcs.empty()) return pi;

    // Difference-constraint feasibility at a given slack target; node k is
    // the zero reference for the shift windows.
    std::vector<double> dist(k + 1);
    auto feasible = [&](double target) {
        std::fill(dist.begin(), dist.end(), 0.0);
        auto relax = [&]() {
            bool changed = false;
            for (const DiffArc& e : arcs)
                if (dist[e.a] + (e.slack - target) < dist[e.b] - 1e-15) {
                    dist[e.b] = dist[e.a] + (e.slack - target);
                    changed = true;
                }
            for (int g = 0; g < k; ++g) {
                if (find(g) != g) continue;
                if (shift_hi[g] != kInf && dist[k] + shift_hi[g] < dist[g] - 1e-15) {
                    dist[g] = dist[k] + shift_hi[g];
                    changed = true;
                }
                if (shift_lo[g] != -kInf && dist[g] - shift_lo[g] < dist[k] - 1e-15) {
                    dist[k] = dist[g] - shift_lo[g];
                    changed = true;
                }
            }
            return changed;
        };
        for (int pass = 0; pass <= k + 1; ++pass)
            if (!relax()) return true;
        return false;  // still relaxing after V passes: negative cycle
    };

    double lo = 0, hi = std::min(cap, std::max(1.0, 2 * widest));
    if (!(hi > 0) || !feasible(0)) return pi;
    for (int it = 0; it < 60 && hi - lo > 1e-12 * (1 + hi); ++it) {
        double mid = 0.5 * (lo + hi);
        if (feasible(mid)) lo = mid;
        else hi = mid;
    }
    feasible(lo);  // leaves the witness shifts in dist
    for (int i = 0; i < k; ++i) pi[i] += dist[find(i)] - dist[k];
    return pi;
}

// Rewrite the certificate around a different point of the optimal dual face.
// The stated prices must stand on their own, so everything downstream of the
// multipliers is recomputed and the optimality checks are run again.
void restate_certificate(DualCertificate& cert, const Mat& c, const WeightedDataSet& X,
                         const Clustering& C, const WeightBounds& K,
                         const std::vector<double>& pi, double cost) {
    const int n = X.n(), k = C.k();
    for (int j = 0; j < n; ++j) {
        double u = kInf;
        for (int i = 0; i < k; ++i) u = std::min(u, c(i, j) + pi[i]);
        cert.point_price[j] = u;
    }
    double dual = 0;
    for (int j = 0; j < n; ++j) dual += X.weight(j) * cert.point_price[j];
    for (int i = 0; i < k; ++i) {
        cert.lower_price[i] = std::max(0.0, -pi[i]);
        cert.upper_price[i] = K.upper(i) == kInf ? 0.0 : std::max(0.0, pi[i]);
        dual += K.lower(i) * cert.lower_price[i];
        if (cert.upper_price[i] > 0) dual -= K.upper(i) * cert.upper_price[i];
    }
    cert.dual_objective = dual;
    cert.duality_gap = std::abs(cost - dual);
    double worst_cs = 0;
    for (int i = 0; i < k; ++i) {
        double mass = 0;
        for (int j = 0; j < n; ++j) mass += C.xi(i, j) * X.weight(j);
        worst_cs = std::max(worst_cs, cert.lower_price[i] * std::abs(mass - K.lower(i)));
        if (cert.upper_price[i] > 0)
            worst_cs = std::max(worst_cs, cert.upper_price[i] * std::abs(K.upper(i) - mass));
        for (int j = 0; j < n; ++j)
            if (C.xi(i, j) > 0) {
                double rc = c(i, j) - cert.point_price[j] + pi[i];
                worst_cs = std::max(worst_cs, C.xi(i, j) * X.weight(j) * std::abs(rc));
            }
    }
    cert.cs_residual = worst_cs;
    double tol = kCertRelTol * (1 + std::abs(cost));
    require(cert.duality_gap <= tol, "refined certificate failed: duality gap ",
            cert.duality_gap, " exceeds ", tol);
    require(cert.cs_residual <= tol, "refined certificate failed: slackness residual ",
            cert.cs_residual, " exceeds ", tol);
}

struct CompatReport {
    Compatibility level = Compatibility::strict;
    int cell_a = -1, cell_b = -1;  // offending pair (or cell/point for `none`)
    int detail = 0;
};

CompatReport classify(const AnisotropicDiagram& P, const Clustering& C,
                      const WeightedDataSet& X) {
    const int n = X.n(), k = P.k();
    CompatReport rep;
    std::vector<std::vector<char>> member(n);
    for (int j = 0; j < n; ++j) {
        member[j].assign(k, 0);
        double h = P.envelope(X.point(j));
        for (int i = 0; i < k; ++i)
            if (P.g(i, X.point(j)) <= h + kGapTol) member[j][i] = 1;
    }
    // compatible: support points sit in their cells.
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j)
            if (C.xi(i, j) > 0 && !member[j][i]) {
                rep.level = Compatibility::none;
                rep.cell_a = i;
                rep.cell_b = -1;
                rep.detail = j;
                return rep;
            }
    // strong: every cell member is in the support.
    bool strong = true;
    for (int i = 0; i < k && strong; ++i)
        for (int j = 0; j < n; ++j)
            if (member[j][i] && !(C.xi(i, j) > 0)) {
                strong = false;
                rep.cell_a = i;
                rep.detail = j;
                break;
            }
    if (!strong) {
        rep.level = Compatibility::compatible;
        return rep;
    }
    // strict: no two cells share more than one data point.
    for (int i = 0; i < k; ++i)
        for (int l = i + 1; l < k; ++l) {
            int shared = 0;
            for (int j = 0; j < n; ++j)
                if (member[j][i] && member[j][l]) ++shared;
            if (shared > 1) {
                rep.level = Compatibility::strong;
                rep.cell_a = i;
                rep.cell_b = l;
                rep.detail = shared;
                return rep;
            }
        }
    rep.level = Compatibility::strict;
    return rep;
}

}  // namespace

AssignmentResult solve_assignment(const WeightedDataSet& X, const SiteSet& S,
                                  const NormFamily& A, const WeightBounds& K) {
    check_shapes(X, S, A, K);
    K.check_feasible(X.total_weight());
    if (K.is_unconstrained()) return nearest_site_assignment(X, S, A);

    const int n = X.n(), k = S.k();
    Mat c = unit_costs(X, S, A);
    std::vector<double> lo(k), hi(k);
    for (int i = 0; i < k; ++i) { lo[i] = K.lower(i); hi[i] = K.upper(i); }
    TransportSolution sol = solve_transport(c, X.weights(), lo, hi);

    DualCertificate cert;
    cert.point_price = sol.point_potential;
    cert.lower_price.resize(k);
    cert.upper_price.resize(k);
    double dual = 0;
    for (int j = 0; j < n; ++j) dual += X.weight(j) * cert.point_price[j];
    for (int i = 0; i < k; ++i) {
        double pi = sol.cluster_potential[i];
        cert.lower_price[i] = std::max(0.0, -pi);
        cert.upper_price[i] = hi[i] == kInf ? 0.0 : std::max(0.0, pi);
        dual += lo[i] * cert.lower_price[i];
        if (cert.upper_price[i] > 0) dual -= hi[i] * cert.upper_price[i];
    }
    cert.dual_objective = dual;
    cert.duality_gap = std::abs(sol.cost - dual);

    double worst_cs = 0;
    for (int i = 0; i < k; ++i) {
        double mass = sol.flow.row(i).sum();
        worst_cs = std::max(worst_cs, cert.lower_price[i] * std::abs(mass - lo[i]));
        if (cert.upper_price[i] > 0)
            worst_cs = std::max(worst_cs, cert.upper_price[i] * std::abs(hi[i] - mass));
        for (int j = 0; j < n; ++j)
            if (sol.flow(i, j) > 0) {
                double rc = c(i, j) - sol.point_potential[j] + sol.cluster_potential[i];
                worst_cs = std::max(worst_cs, sol.flow(i, j) * std::abs(rc));
            }
    }
    cert.cs_residual = worst_cs;
    double tol = kCertRelTol * (1 + std::abs(sol.cost));
    require(cert.duality_gap <= tol, "assignment certificate failed: duality gap ",
            cert.duality_gap, " exceeds ", tol);
    require(cert.cs_residual <= tol, "assignment certificate failed: slackness residual ",
            cert.cs_residual, " exceeds ", tol);

    Mat xi(k, n);
    for (int j = 0; j < n; ++j) xi.col(j) = sol.flow.col(j) / X.weight(j);
    return {Clustering(truncated(std::move(xi))), std::move(cert), sol.cost};
}

AnisotropicDiagram::AnisotropicDiagram(SiteSet sites, std::vector<double> sizes,
                                       NormFamily norms)
    : sites_(std::move(sites)), sizes_(std::move(sizes)), norms_(std::move(norms)) {
    require(static_cast<int>(sizes_.size()) == sites_.k(), "diagram has ", sites_.k(),
            " sites but ", sizes_.size(), " sizes");
    require(norms_.k() == sites_.k(), "diagram has ", sites_.k(), " sites but ", norms_.k(),
            " norms");
    require(norms_.dim() == sites_.dim(), "site dimension ", sites_.dim(),
            " does not match norm dimension ", norms_.dim());
    for (double s : sizes_) require(std::isfinite(s), "diagram sizes must be finite");
    for (int i = 0; i < sites_.k(); ++i)
        for (int l = i + 1; l < sites_.k(); ++l)
            require((sites_.site(i) - sites_.site(l)).norm() > 1e-12, "sites ", i, " and ", l,
                    " coincide; diagram cells would be degenerate");
}

double AnisotropicDiagram::envelope(const Vec& x) const {
    double h = g(0, x);
    for (int i = 1; i < k(); ++i) h = std::min(h, g(i, x));
    return h;
}

std::vector<int> AnisotropicDiagram::members(const Vec& x, double tol) const {
    std::vector<int> out;
    double h = envelope(x);
    for (int i = 0; i < k(); ++i)
        if (g(i, x) <= h + tol) out.push_back(i);
    return out;
}

Compatibility check_compatibility(const AnisotropicDiagram& P, const Clustering& C,
                                  const WeightedDataSet& X) {
    require(P.k() == C.k(), "diagram has ", P.k(), " cells but clustering has ", C.k());
    require(C.n() == X.n(), "clustering covers ", C.n(), " points but data set has ", X.n());
    require(P.dim() == X.dim(), "diagram dimension ", P.dim(), " vs point dimension ",
            X.dim());
    return classify(P, C, X).level;
}

DiagramExtraction extract_diagram(const WeightedDataSet& X, const SiteSet& S,
                                  const NormFamily& A, const WeightBounds& K,
                                  std::uint64_t seed) {
    check_shapes(X, S, A, K);
    K.check_feasible(X.total_weight());
    const int k = S.k();

    CompatReport last;
    for (int attempt = 0; attempt <= 5; ++attempt) {
        WeightedDataSet Xa = X;
        WeightBounds Ka = K;
        std::uint64_t attempt_seed = 0;
        if (attempt > 0) {
            // Multiplicative noise breaks the ties that produced a non-strict
            // pair; the bounds are rescaled by the weight-sum ratio, with the
            // rounding residue folded into the largest entry, so feasibility
            // stays exact even when a bound sum meets omega(X) exactly.
            attempt_seed = seed + static_cast<std::uint64_t>(attempt);
            Rng rng(attempt_seed);
            std::vector<double> w = X.weights();
            for (double& v : w) v *= 1.0 + 1e-9 * rng.uniform();
            double w_new = 0;
            for (double v : w) w_new += v;
            double f = w_new / X.total_weight();
            std::vector<double> lo(k), hi(k);
            for (int i = 0; i < k; ++i) {
                lo[i] = K.lower(i) * f;
                hi[i] = K.upper(i) == kInf ? kInf : K.upper(i) * f;
            }
            auto sum_of = [](const std::vector<double>& v) {
                double s = 0;
                for (double x : v) s += x;
                return s;
            };
            for (double s = sum_of(lo); s > w_new; s = sum_of(lo)) {
                int big = int(std::max_element(lo.begin(), lo.end()) - lo.begin());
                double fixed = std::max(0.0, lo[big] - (s - w_new));
                if (fixed == lo[big]) fixed = std::nextafter(lo[big], 0.0);
                lo[big] = fixed;
            }
            for (double s = sum_of(hi); s < w_new; s = sum_of(hi)) {
                int big = int(std::max_element(hi.begin(), hi.end()) - hi.begin());
                double fixed = hi[big] + (w_new - s);
                if (fixed == hi[big]) fixed = std::nextafter(hi[big], kInf);
                hi[big] = fixed;
            }
            Xa = WeightedDataSet(X.points(), std::move(w));
            Ka = WeightBounds(std::move(lo), std::move(hi));
        }

        AssignmentResult res = solve_assignment(Xa, S, A, Ka);
        res.certificate.seed = attempt_seed;
        Mat c = unit_costs(Xa, S, A);
        std::vector<double> sigma(k);
        for (int i = 0; i < k; ++i)
            sigma[i] = res.certificate.upper_price[i] - res.certificate.lower_price[i];
        sigma = refine_sizes(c, Xa, res.clustering, Ka, std::move(sigma));
        restate_certificate(res.certificate, c, Xa, res.clustering, Ka, sigma, res.cost);
        AnisotropicDiagram P(S, std::move(sigma), A);
        last = classify(P, res.clustering, Xa);
        if (last.level == Compatibility::strict)
            return {std::move(res.clustering), std::move(P), std::move(res.certificate),
                    attempt};
    }
    if (last.level == Compatibility::none)
        fail("diagram extraction failed: support point ", last.detail, " lies outside cell ",
             last.cell_a, " after 5 perturbation retries");
    if (last.level == Compatibility::compatible)
        fail("diagram extraction failed: cell ", last.cell_a, " contains point ", last.detail,
             " missing from its cluster support after 5 perturbation retries");
    fail("diagram extraction failed: cells ", last.cell_a, " and ", last.cell_b, " share ",
         last.detail, " data points after 5 perturbation retries");
}

MergingFunction::MergingFunction(std::vector<int> map, int target_count)
    : map_(std::move(map)), target_count_(target_count) {
    require(!map_.empty(), "merging function needs a nonempty source");
    require(target_count_ >= 1, "merging function needs a nonempty target");
    std::vector<char> hit(target_count_, 0);
    for (std::size_t j = 0; j < map_.size(); ++j) {
        require(map_[j] >= 0 && map_[j] < target_count_, "merge target of point ", j, " is ",
                map_[j], ", outside [0,", target_count_, ")");
        hit[map_[j]] = 1;
    }
    for (int t = 0; t < target_count_; ++t)
        require(hit[t], "merging function misses target ", t, "; it must be surjective");
}

MergingFunction MergingFunction::identity(int n) {
    std::vector<int> map(n);
    for (int j = 0; j < n; ++j) map[j] = j;
    return MergingFunction(std::move(map), n);
}

std::vector<std::vector<int>> MergingFunction::preimages() const {
    std::vector<std::vector<int>> pre(target_count_);
    for (int j = 0; j < source_count(); ++j) pre[map_[j]].push_back(j);
    return pre;
}

MergingFunction MergingFunction::then(const MergingFunction& next) const {
    require(next.source_count() == target_count_, "cannot compose: target count ",
            target_count_, " vs next source count ", next.source_count());
    std::vector<int> map(map_.size());
    for (std::size_t j = 0; j < map_.size(); ++j) map[j] = next.target(map_[j]);
    return MergingFunction(std::move(map), next.target_count());
}

void MergingFunction::check_weights(const WeightedDataSet& X,
                                    const WeightedDataSet& Xt) const {
    require(X.n() == source_count(), "merging function covers ", source_count(),
            " points but source has ", X.n());
    require(Xt.n() == target_count_, "merging function targets ", target_count_,
            " points but image has ", Xt.n());
    std::vector<double> sums(target_count_, 0.0);
    for (int j = 0; j < X.n(); ++j) sums[map_[j]] += X.weight(j);
    for (int t = 0; t < target_count_; ++t)
        require(std::abs(sums[t] - Xt.weight(t)) <= 1e-12 * std::abs(Xt.weight(t)),
                "weight of merged point ", t, " is ", Xt.weight(t),
                " but its preimage sums to ", sums[t]);
}

Clustering push_forward(const MergingFunction& p, const WeightedDataSet& X,
                        const WeightedDataSet& Xt, const Clustering& C) {
    p.check_weights(X, Xt);
    require(C.n() == X.n(), "clustering covers ", C.n(), " points but source has ", X.n());
    Mat xi = Mat::Zero(C.k(), Xt.n());
    for (int j = 0; j < X.n(); ++j) xi.col(p.target(j)) += X.weight(j) * C.matrix().col(j);
    for (int t = 0; t < Xt.n(); ++t) xi.col(t) /= Xt.weight(t);
    return Clustering(std::move(xi));
}

Clustering extend(const MergingFunction& p, const Clustering& Ct) {
    require(Ct.n() == p.target_count(), "clustering covers ", Ct.n(),
            " points but merging function targets ", p.target_count());
    Mat xi(Ct.k(), p.source_count());
    for (int j = 0; j < p.source_count(); ++j) xi.col(j) = Ct.matrix().col(p.target(j));
    return Clustering(std::move(xi));
}

}  // namespace wca
