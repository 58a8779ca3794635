#include "wca/approx.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "wca/error.hpp"
#include "wca/parallel.hpp"
#include "wca/rng.hpp"

namespace wca {

namespace {

struct Run {
    std::vector<int> label;
    double cost = kInf;
};

// Collapse unused cluster indices so the returned clustering has no void
// rows; callers size downstream structures by the cluster count.
Clustering dense_integral(const std::vector<int>& label, int kh) {
    std::vector<int> remap(kh, -1);
    int kept = 0;
    for (int l : label)
        if (remap[l] < 0) remap[l] = -2;
    for (int i = 0; i < kh; ++i)
        if (remap[i] == -2) remap[i] = kept++;
    std::vector<int> dense(label.size());
    for (std::size_t j = 0; j < label.size(); ++j) dense[j] = remap[label[j]];
    return Clustering::integral(dense, kept);
}

Run seeded_lloyd(const WeightedDataSet& X, int kh, std::uint64_t seed) {
    const int n = X.n();
    Rng rng(seed);

    // D^2 seeding on the weighted points: the first center is drawn by
    // weight, the rest proportionally to omega_j times the squared distance
    // to the nearest center so far.
    std::vector<Vec> centers;
    centers.reserve(kh);
    centers.push_back(X.point(rng.weighted_index(X.weights())));
    std::vector<double> d2(n);
    for (int j = 0; j < n; ++j)
        d2[j] = X.weight(j) * (X.point(j) - centers[0]).squaredNorm();
    while (static_cast<int>(centers.size()) < kh) {
        centers.push_back(X.point(rng.weighted_index(d2)));
        for (int j = 0; j < n; ++j)
            d2[j] = std::min(d2[j],
                             X.weight(j) * (X.point(j) - centers.back()).squaredNorm());
    }

    Run run;
    run.label.assign(n, 0);
    std::vector<double> contrib(n), mass(kh);
    std::vector<Vec> sum(kh);
    double prev = kInf;
    for (int it = 0; it < 100; ++it) {
        for (int j = 0; j < n; ++j) {
            int best = 0;
            double bd = (X.point(j) - centers[0]).squaredNorm();
            for (int i = 1; i < kh; ++i) {
                double d = (X.point(j) - centers[i]).squaredNorm();
                if (d < bd) { bd = d; best = i; }
            }
            run.label[j] = best;
            contrib[j] = X.weight(j) * bd;
        }

        // Empty-cluster repair: hand each empty center the point that is
        // currently paying the most.
        std::vector<int> count(kh, 0);
        for (int l : run.label) ++count[l];
        for (int i = 0; i < kh; ++i) {
            if (count[i] > 0) continue;
            int worst = int(std::max_element(contrib.begin(), contrib.end()) -
                            contrib.begin());
            --count[run.label[worst]];
            run.label[worst] = i;
            ++count[i];
            contrib[worst] = 0;
        }

        for (int i = 0; i < kh; ++i) {
            mass[i] = 0;
            sum[i] = Vec::Zero(X.dim());
        }
        for (int j = 0; j < n; ++j) {
            mass[run.label[j]] += X.weight(j);
            sum[run.label[j]] += X.weight(j) * X.point(j);
        }
        for (int i = 0; i < kh; ++i)
            if (mass[i] > 0) centers[i] = sum[i] / mass[i];

        double now = 0;
        for (int j = 0; j < n; ++j)
            now += X.weight(j) * (X.point(j) - centers[run.label[j]]).squaredNorm();
        require(now <= prev + 1e-9 * (1 + prev),
                "refinement increased the cost from ", prev, " to ", now);
        if (prev - now < 1e-6 * prev + 1e-15) {
            run.cost = now;
            break;
        }
        prev = now;
        run.cost = now;
    }
    return run;
}

}  // namespace

ApproxResult ab_approximate(const WeightedDataSet& X, int k, int beta, int repeats,
                            std::uint64_t seed) {
    require(k >= 1, "cluster count must be positive, got ", k);
    require(beta >= 1, "center multiplier must be a positive integer, got ", beta);
    require(repeats >= 1, "repeat count must be positive, got ", repeats);

    const int n = X.n();
    if (static_cast<long long>(beta) * k >= n) {
        std::vector<int> label(n);
        for (int j = 0; j < n; ++j) label[j] = j;
        return {Clustering::integral(label, n), 0.0};
    }

    const int kh = beta * k;
    std::vector<Run> runs(repeats);
    parallel_for(repeats, [&](std::size_t r) {
        runs[r] = seeded_lloyd(X, kh, seed + static_cast<std::uint64_t>(r));
    });
    int best = 0;
    for (int r = 1; r < repeats; ++r)
        if (runs[r].cost < runs[best].cost) best = r;
    return {dense_integral(runs[best].label, kh), runs[best].cost};
}

double opt_bruteforce(const WeightedDataSet& X, int k) {
    require(k >= 1, "cluster count must be positive, got ", k);
    const int n = X.n();
    double states = std::pow(static_cast<double>(k), static_cast<double>(n));
    require(states <= 1e7, "brute force over ", k, "^", n,
            " assignments exceeds the 1e7 limit");

    std::vector<int> label(n, 0);
    std::vector<double> mass(k), norm2(k);
    std::vector<Vec> sum(k);
    double best = kInf;
    for (;;) {
        for (int i = 0; i < k; ++i) {
            mass[i] = 0;
            norm2[i] = 0;
            sum[i] = Vec::Zero(X.dim());
        }
        for (int j = 0; j < n; ++j) {
            int i = label[j];
            mass[i] += X.weight(j);
            norm2[i] += X.weight(j) * X.point(j).squaredNorm();
            sum[i] += X.weight(j) * X.point(j);
        }
        double total = 0;
        for (int i = 0; i < k; ++i)
            if (mass[i] > 0) total += norm2[i] - sum[i].squaredNorm() / mass[i];
        best = std::min(best, std::max(0.0, total));

        int p = 0;
        while (p < n && ++label[p] == k) label[p++] = 0;
        if (p == n) break;
    }
    return best;
}

}  // namespace wca
