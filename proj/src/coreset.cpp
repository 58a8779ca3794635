#include "wca/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include "wca/approx.hpp"
#include "wca/parallel.hpp"

namespace wca {

Projection project_to_pencils(const WeightedDataSet& X, const Clustering& approx,
                              const EpsilonNet& net) {
    require(approx.n() == X.n(), "clustering covers ", approx.n(),
            " points but the data set has ", X.n());
    require(approx.is_integral(), "projection needs an integral approximate clustering");
    require(net.dim == X.dim(), "net dimension ", net.dim,
            " does not match data dimension ", X.dim());

    const int n = X.n();
    const int d = X.dim();
    const int kh = approx.k();
    const int q_count = static_cast<int>(net.directions.size());

    std::vector<int> label(n, -1);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < kh; ++i) {
            if (approx.xi(i, j) > 0.5) {
                label[j] = i;
                break;
            }
        }
    }
    for (int i = 0; i < kh; ++i)
        require(!approx.support(i).empty(), "approximate cluster ", i,
                " is void; drop void clusters before projecting");

    SiteSet vertices = centroid_sites(X, approx);

    // Unit directions, one column per net vector; every pencil shares them.
    Mat U(d, q_count);
    for (int q = 0; q < q_count; ++q) U.col(q) = net.directions[q].normalized();

    std::vector<Pencil> pencils(kh);
    for (int i = 0; i < kh; ++i) {
        pencils[i].vertex = vertices.site(i);
        pencils[i].lines = net.directions;
    }

    std::vector<Vec> moved(n);
    std::vector<int> line(n);
    std::vector<double> parameter(n);
    std::vector<double> move_term(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t sj) {
        const int j = static_cast<int>(sj);
        const Vec& v = pencils[label[j]].vertex;
        Vec y = X.point(j) - v;
        Vec t = U.transpose() * y;
        const double y2 = y.squaredNorm();
        // Distance to the line spanned by unit u is |y|^2 - (u.y)^2; ties go
        // to the lowest direction index. The net contains each direction with
        // both signs, so projecting onto lines rather than rays loses nothing.
        int best = 0;
        double best_r = y2 - t(0) * t(0);
        for (int q = 1; q < q_count; ++q) {
            double r = y2 - t(q) * t(q);
            if (r < best_r) {
                best_r = r;
                best = q;
            }
        }
        line[j] = label[j] * q_count + best;
        parameter[j] = t(best);
        moved[j] = v + t(best) * U.col(best);
        move_term[j] = X.weight(j) * (X.point(j) - moved[j]).squaredNorm();
    });

    double movement = 0;
    for (int j = 0; j < n; ++j) movement += move_term[j];

    // The net guarantees a direction within eps0 of y/|y|, so each point moves
    // by at most eps0 * |y| and the total stays under eps0^2 * ALG.
    const double alg = opt_site_cost(X, approx, NormFamily::identity(kh, d));
    require(movement <= net.eps0 * net.eps0 * alg + 1e-12 * (1 + alg),
            "projection moved mass ", movement, " beyond the certified bound ",
            net.eps0 * net.eps0 * alg);

    Projection out{WeightedDataSet(std::move(moved), X.weights()), std::move(line),
                   std::move(parameter), std::move(pencils), movement};
    return out;
}

std::vector<Batch> batch_lines(const WeightedDataSet& Xbar, const std::vector<int>& line,
                               const std::vector<double>& parameter, double vbar) {
    const int n = Xbar.n();
    require(static_cast<int>(line.size()) == n && static_cast<int>(parameter.size()) == n,
            "line and parameter arrays must cover all ", n, " points");
    require(std::isfinite(vbar) && vbar >= 0,
            "batch threshold must be finite and nonnegative, got ", vbar);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (line[a] != line[b]) return line[a] < line[b];
        if (parameter[a] != parameter[b]) return parameter[a] < parameter[b];
        return a < b;
    });

    // Closing tolerance on the variation, absolute by contract: every batch
    // except the last of its line ends within tol of vbar.
    const double tol = 1e-9;

    std::vector<Batch> out;
    int pos = 0;
    while (pos < n) {
        const int line_id = line[order[pos]];
        int end = pos;
        while (end < n && line[order[end]] == line_id) ++end;

        if (vbar == 0) {
            // Degenerate threshold: batches are maximal runs of coincident
            // parameters. The pipeline hits this exactly when the clustering
            // stage is already exact (ALG = 0), where projected duplicates
            // collapse and everything else stays a singleton.
            int a = pos;
            while (a < end) {
                int b = a;
                while (b < end && parameter[order[b]] == parameter[order[a]]) ++b;
                Batch batch;
                batch.line = line_id;
                double W = 0;
                Vec sum = Vec::Zero(Xbar.dim());
                for (int t = a; t < b; ++t) {
                    const int j = order[t];
                    batch.member.push_back(j);
                    batch.fraction.push_back(1.0);
                    W += Xbar.weight(j);
                    sum += Xbar.weight(j) * Xbar.point(j);
                }
                batch.weight = W;
                batch.centroid = sum / W;
                double v = 0;
                for (int t = a; t < b; ++t) {
                    const int j = order[t];
                    v += Xbar.weight(j) * (Xbar.point(j) - batch.centroid).squaredNorm();
                }
                batch.variation = v;
                out.push_back(std::move(batch));
                a = b;
            }
            pos = end;
            continue;
        }

        std::vector<int> member;
        std::vector<double> frac;
        double W = 0, M = 0, Q2 = 0;
        Vec sum = Vec::Zero(Xbar.dim());

        auto flush = [&]() {
            Batch b;
            b.line = line_id;
            b.member = std::move(member);
            b.fraction = std::move(frac);
            b.weight = W;
            b.centroid = sum / W;
            b.variation = std::max(0.0, Q2 - M * M / W);
            out.push_back(std::move(b));
            member.clear();
            frac.clear();
            W = M = Q2 = 0;
            sum.setZero();
        };

        for (int t = pos; t < end; ++t) {
            const int j = order[t];
            const double wj = Xbar.weight(j);
            const double tj = parameter[j];
            double w_left = wj;
            for (;;) {
                const double Wn = W + w_left;
                const double Mn = M + w_left * tj;
                const double Qn = Q2 + w_left * tj * tj;
                const double v = Qn - Mn * Mn / Wn;
                if (v < vbar - tol) {
                    member.push_back(j);
                    frac.push_back(w_left / wj);
                    W = Wn;
                    M = Mn;
                    Q2 = Qn;
                    sum += w_left * Xbar.point(j);
                    break;
                }
                // A lone point has zero variation, so an empty batch always
                // absorbs the remainder whole; anything the tolerance lets
                // through closes the batch as-is.
                if (member.empty() || v <= vbar + tol) {
                    member.push_back(j);
                    frac.push_back(w_left / wj);
                    W = Wn;
                    M = Mn;
                    Q2 = Qn;
                    sum += w_left * Xbar.point(j);
                    flush();
                    break;
                }
                // Overshoot: assign just enough of the point to land on vbar.
                // variation(mu) = Q2 + mu t^2 - (M + mu t)^2 / (W + mu) is
                // linear in mu once cleared of the denominator (the mu^2
                // terms cancel), so the split solves exactly.
                double mu = (vbar * W - Q2 * W + M * M) /
                            (Q2 + tj * tj * W - 2 * M * tj - vbar);
                mu = std::min(std::max(mu, w_left * 1e-12), w_left * (1 - 1e-12));
                member.push_back(j);
                frac.push_back(mu / wj);
                W += mu;
                M += mu * tj;
                Q2 += mu * tj * tj;
                sum += mu * Xbar.point(j);
                flush();
                w_left -= mu;
            }
        }
        if (!member.empty()) flush();
        pos = end;
    }
    return out;
}

MergedBatches merge_batches(const WeightedDataSet& Xbar, const std::vector<Batch>& batches,
                            const NormFamily& A) {
    require(!batches.empty(), "cannot merge an empty batch list");
    require(A.dim() == Xbar.dim(), "norm dimension ", A.dim(),
            " does not match data dimension ", Xbar.dim());

    const int n = Xbar.n();
    std::vector<Vec> pts;
    std::vector<double> wts;
    pts.reserve(batches.size());
    wts.reserve(batches.size());
    std::vector<std::vector<Route>> routing(n);
    double total_variation = 0;

    for (std::size_t b = 0; b < batches.size(); ++b) {
        const Batch& batch = batches[b];
        require(!batch.member.empty() && batch.member.size() == batch.fraction.size(),
                "batch ", b, " has inconsistent member bookkeeping");

        double W = 0;
        Vec sum = Vec::Zero(Xbar.dim());
        for (std::size_t m = 0; m < batch.member.size(); ++m) {
            const int j = batch.member[m];
            require(j >= 0 && j < n, "batch ", b, " references point ", j,
                    " outside the data set");
            const double f = batch.fraction[m];
            require(f > 0 && f <= 1 + 1e-12, "batch ", b, " carries fraction ", f,
                    " for point ", j);
            W += f * Xbar.weight(j);
            sum += f * Xbar.weight(j) * Xbar.point(j);
            routing[j].push_back(Route{static_cast<int>(b), f});
        }
        require(std::abs(W - batch.weight) <= 1e-12 * (1 + W), "batch ", b,
                " stored weight ", batch.weight, " disagrees with its members (", W, ")");
        const Vec mean = sum / W;
        double v = 0;
        for (std::size_t m = 0; m < batch.member.size(); ++m) {
            const int j = batch.member[m];
            v += batch.fraction[m] * Xbar.weight(j) *
                 (Xbar.point(j) - mean).squaredNorm();
        }
        require(std::abs(v - batch.variation) <= 1e-9 * (1 + v), "batch ", b,
                " stored variation ", batch.variation, " disagrees with its points (", v,
                ")");
        pts.push_back(batch.centroid);
        wts.push_back(batch.weight);
        total_variation += v;
    }

    for (int j = 0; j < n; ++j) {
        require(!routing[j].empty(), "point ", j, " is not covered by any batch");
        double total = 0;
        for (const Route& r : routing[j]) total += r.fraction;
        require(std::abs(total - 1) <= 1e-9, "batch fractions of point ", j, " sum to ",
                total);
    }

    MergedBatches out{WeightedDataSet(std::move(pts), std::move(wts)), std::move(routing),
                      A.lambda_max() * total_variation, A.lambda_min() * total_variation};
    return out;
}

Coreset::Coreset(WeightedDataSet points, std::vector<std::vector<Route>> routing,
                 double source_weight, double epsilon, double delta, double delta_plus,
                 double delta_minus, Provenance provenance)
    : points_(std::move(points)),
      routing_(std::move(routing)),
      source_weight_(source_weight),
      epsilon_(epsilon),
      delta_(delta),
      delta_plus_(delta_plus),
      delta_minus_(delta_minus),
      provenance_(provenance) {
    require(!routing_.empty(), "a coreset must cover at least one source point");
    require(epsilon_ >= 0, "coreset accuracy must be nonnegative, got ", epsilon_);
    require(delta_ >= 1, "coreset delta must be at least 1, got ", delta_);
    require(delta_plus_ >= 0 && delta_minus_ >= 0, "coreset offsets must be nonnegative, got ",
            delta_plus_, " and ", delta_minus_);
    require(delta_plus_ <= delta_ * delta_minus_ + 1e-12 * (1 + delta_plus_),
            "offset condition violated: ", delta_plus_, " > ", delta_, " * ", delta_minus_);

    const int nt = points_.n();
    std::vector<char> hit(nt, 0);
    for (std::size_t j = 0; j < routing_.size(); ++j) {
        const auto& routes = routing_[j];
        require(!routes.empty(), "source point ", j, " has no route into the compressed set");
        double total = 0;
        for (const Route& r : routes) {
            require(r.target >= 0 && r.target < nt, "source point ", j, " routes to ",
                    r.target, " outside the compressed set");
            require(r.fraction > 0 && r.fraction <= 1 + 1e-12, "source point ", j,
                    " carries route fraction ", r.fraction);
            total += r.fraction;
            hit[r.target] = 1;
        }
        require(std::abs(total - 1) <= 1e-9, "routes of source point ", j, " sum to ", total);
    }
    for (int t = 0; t < nt; ++t) require(hit[t], "compressed point ", t, " receives no source mass");
    require(std::abs(points_.total_weight() - source_weight_) <= 1e-12 * (1 + source_weight_),
            "compressed weight ", points_.total_weight(), " drifted from the source weight ",
            source_weight_);
}

Coreset Coreset::identity(const WeightedDataSet& X) {
    std::vector<std::vector<Route>> routing(X.n());
    for (int j = 0; j < X.n(); ++j) routing[j] = {Route{j, 1.0}};
    return Coreset(X, std::move(routing), X.total_weight(), 0, 1, 0, 0, Provenance{});
}

Clustering Coreset::extend(const Clustering& Ct) const {
    require(Ct.n() == points_.n(), "clustering covers ", Ct.n(),
            " points but the coreset has ", points_.n());
    Mat xi = Mat::Zero(Ct.k(), source_n());
    for (int j = 0; j < source_n(); ++j)
        for (const Route& r : routing_[j]) xi.col(j) += r.fraction * Ct.matrix().col(r.target);
    return Clustering(std::move(xi));
}

Coreset build_coreset(const WeightedDataSet& X, int k, double epsilon, const NormFamily& A,
                      const CoresetConfig& config) {
    require(k >= 1, "cluster count must be at least 1, got ", k);
    require(epsilon > 0 && epsilon <= 0.5, "coreset accuracy must lie in (0, 1/2], got ",
            epsilon);
    require(A.k() == k, "norm family provides ", A.k(), " matrices for ", k, " clusters");
    require(A.dim() == X.dim(), "norm dimension ", A.dim(),
            " does not match data dimension ", X.dim());
    require(config.alpha >= 1, "approximation factor alpha must be at least 1, got ",
            config.alpha);

    // Both internal stages run at a third of the requested accuracy; they
    // compose to eps/3 + eps/3 + eps^2/9, which stays below eps.
    const double e_stage = epsilon / 3;

    ApproxResult approx = ab_approximate(X, k, config.beta, config.repeats, config.seed);
    const int kh = approx.clustering.k();

    const double eps0 =
        (e_stage / 4) * std::sqrt(A.lambda_min() / (config.alpha * A.lambda_max()));
    EpsilonNet net = build_epsilon_net(eps0, X.dim());
    Projection proj = project_to_pencils(X, approx.clustering, net);

    const long long lines =
        static_cast<long long>(kh) * static_cast<long long>(net.directions.size());
    const double vbar = e_stage * e_stage * approx.alg_cost /
                        (32.0 * config.alpha * k * A.lambda_max() * static_cast<double>(lines));

    std::vector<Batch> batches = batch_lines(proj.points, proj.line, proj.parameter, vbar);
    MergedBatches merged = merge_batches(proj.points, batches, A);

    if (vbar > 2e-9) {
        // Every closed batch consumed about vbar of the at-most-ALG total
        // variation, plus at most one unfinished batch per line. The guard
        // keeps the check out of the regime where the closing tolerance is
        // comparable to the threshold itself.
        const double bound =
            2 * approx.alg_cost / vbar + static_cast<double>(k) * static_cast<double>(lines);
        require(static_cast<double>(batches.size()) <= bound * (1 + 1e-9),
                "batch count ", batches.size(), " exceeds the size bound ", bound);
    }

    Provenance log;
    log.alg = approx.alg_cost;
    log.eps0 = eps0;
    log.vbar = vbar;
    log.lines = lines;
    log.batches = static_cast<long long>(batches.size());
    log.seed = config.seed;

    return Coreset(std::move(merged.points), std::move(merged.routing), X.total_weight(),
                   epsilon, A.lambda_max() / A.lambda_min(), merged.delta_plus,
                   merged.delta_minus, log);
}

Coreset compose(const Coreset& outer, const Coreset& inner) {
    require(inner.source_n() == outer.points().n(), "inner coreset covers ",
            inner.source_n(), " points but the outer compressed set has ",
            outer.points().n());
    require(std::abs(inner.source_weight() - outer.points().total_weight()) <=
                1e-12 * (1 + inner.source_weight()),
            "inner coreset source weight ", inner.source_weight(),
            " does not match the outer compressed weight ", outer.points().total_weight());

    std::vector<std::vector<Route>> routing(outer.source_n());
    for (int j = 0; j < outer.source_n(); ++j) {
        std::map<int, double> acc;
        for (const Route& a : outer.routing()[j])
            for (const Route& b : inner.routing()[a.target])
                acc[b.target] += a.fraction * b.fraction;
        routing[j].reserve(acc.size());
        for (const auto& [target, fraction] : acc)
            routing[j].push_back(Route{target, fraction});
    }

    const double e1 = outer.epsilon();
    const double e2 = inner.epsilon();
    return Coreset(inner.points(), std::move(routing), outer.source_weight(),
                   e1 + e2 + e1 * e2, std::max(outer.delta(), inner.delta()),
                   outer.delta_plus() + inner.delta_plus(),
                   outer.delta_minus() + inner.delta_minus(), inner.provenance());
}

MovementCertificate movement_coreset_certify(const WeightedDataSet& X,
                                             const WeightedDataSet& Xt,
                                             const MergingFunction& p, double epsilon,
                                             const NormFamily& A, double opt_lower_bound,
                                             bool heuristic_bound) {
    require(epsilon > 0 && epsilon <= 0.5, "movement criterion needs accuracy in (0, 1/2], got ",
            epsilon);
    require(std::isfinite(opt_lower_bound) && opt_lower_bound >= 0,
            "lower bound on the unconstrained optimum must be finite and nonnegative, got ",
            opt_lower_bound);
    require(X.dim() == Xt.dim(), "dimension mismatch between the data set (", X.dim(),
            ") and its merger (", Xt.dim(), ")");
    p.check_weights(X, Xt);

    MovementCertificate cert;
    cert.heuristic = heuristic_bound;
    for (int j = 0; j < X.n(); ++j)
        cert.movement += X.weight(j) * (X.point(j) - Xt.point(p.target(j))).squaredNorm();
    cert.bound =
        epsilon * epsilon * A.lambda_min() / (16 * A.lambda_max()) * opt_lower_bound;
    cert.certified = cert.movement <= cert.bound;
    return cert;
}

}  // namespace wca
