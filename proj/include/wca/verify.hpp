#ifndef WCA_VERIFY_HPP
#define WCA_VERIFY_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wca/assign.hpp"
#include "wca/core.hpp"
#include "wca/coreset.hpp"

// Empirical certification harnesses. Nothing in this module proves a theorem:
// each check samples site sets and clusterings, measures both sides of the
// claimed inequality, and reports worst ratios and violations. Sampling
// cannot exhaust the "for all sites" quantifier, so adversarial families
// (far-site probes, sites at the data) run alongside the uniform draws.

namespace wca {

// A clustering problem in one bundle: data, cluster count, norm family, and
// weight windows. Consistency is enforced at construction.
struct Instance {
    Instance(WeightedDataSet data, int k, NormFamily norms, WeightBounds bounds);

    WeightedDataSet data;
    int k;
    NormFamily norms;
    WeightBounds bounds;
};

// Outcome of one harness run: verdict, the seed it ran under, wall-clock
// seconds, scalar metrics in insertion order, and free-form notes holding
// violations and exclusions.
struct Report {
    std::string name;
    bool pass = true;
    std::uint64_t seed = 0;
    double seconds = 0;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> notes;

    double metric(const std::string& key) const;
};

std::string reports_json(const std::vector<Report>& reports);
std::string reports_markdown(const std::vector<Report>& reports);

// k sites drawn coordinatewise uniform from the data bounding box inflated by
// 50 percent about its center. This is the harness distribution for "random
// sites", a sampling choice rather than a coverage claim.
SiteSet sample_sites(const WeightedDataSet& X, int k, std::uint64_t seed);

// A random vertex of the K-feasible clustering polytope: the transportation
// LP solved under iid uniform unit costs, so the draw ignores geometry
// entirely and different seeds reach different corners.
Clustering random_feasible(const WeightedDataSet& X, const WeightBounds& K,
                           std::uint64_t seed);

// Best-found weight-constrained clustering: multistart alternation between
// the assignment LP at fixed sites and the centroid update at a fixed
// clustering. The value is an upper bound on the constrained optimum, never
// a certificate.
struct SearchResult {
    Clustering clustering;
    SiteSet sites;    // centroids of the final clustering
    double cost = 0;  // cost at those centroids
};

SearchResult constrained_search(const WeightedDataSet& X, int k, const NormFamily& A,
                                const WeightBounds& K, int starts, std::uint64_t seed);

// Definition check on sampled sites. Per trial: one LP-optimal coreset
// clustering plus three random feasible ones feed the extension inequality
// (a), and the constrained optima of both data sets feed the compression
// inequality (b), each at relative slack 1e-7. Violations are report
// content, not exceptions.
Report check_coreset_properties(const Instance& inst, const Coreset& cs, int trials,
                                std::uint64_t seed);

// Centroid-form consequences on small instances (k <= 3, n <= 60): (a') on
// sampled random feasible coreset clusterings with the cost taken at each
// clustering's own centroids, and (b') comparing best-found constrained
// optima of coreset and data. (b') is reported as consistent or
// inconsistent, never certified, because both optima are heuristic.
Report check_centroid_form(const Instance& inst, const Coreset& cs, int trials,
                           std::uint64_t seed = 0x5eed0002);

// Approximation preservation at gamma >= delta, with eps = 3 * the coreset's
// recorded accuracy. Per trial the LP-optimal coreset clustering is degraded
// to a measured ratio gamma_hat <= gamma by blending with a random feasible
// clustering (cost is linear in the fractions, so the blend hits the target
// ratio exactly), extended, and compared against
// (1 + eps) * gamma_hat * cost_K(X, S) at relative slack 1e-7.
Report check_approx_preservation(const Instance& inst, const Coreset& cs, double gamma,
                                 int trials, std::uint64_t seed);

// One interval of a line dissection: the parameter range along the line and
// the diagram cells attaining the lower envelope on the interior, at a 1e-9
// gap tolerance.
struct LineInterval {
    double lo = 0;
    double hi = 0;
    std::vector<int> winners;
};

// Partition of the line c + t*q into maximal intervals of constant winner
// set. The restrictions of the cell functions g_i to the line are univariate
// quadratics; breakpoints are the real roots of their pairwise differences,
// and pairs whose coefficients agree within 1e-10 are degenerate (coinciding
// restrictions) and contribute none. When no pair degenerates, the interval
// count is checked against the structural bound 2k - 1.
std::vector<LineInterval> dissect_line(const AnisotropicDiagram& P, const Vec& c,
                                       const Vec& q);

// Empirical per-point sensitivity: the worst observed share of the LP cost
// over sampled site sets, a lower bound on the true supremum. Sites are
// `site_trials` random draws plus one far-site probe per data point, the
// adversarial family that forces a single point to carry the cost. Trials
// whose LP cost vanishes are excluded from the max and counted.
struct SensitivityEstimate {
    std::vector<double> point_bound;  // per-point lower bound, each in [0, 1]
    double total = 0;                 // sum of the bounds, at most n
    int trials = 0;                   // site sets sampled, probes included
    int zero_cost = 0;                // trials excluded for vanishing cost
    std::uint64_t seed = 0;
};

SensitivityEstimate sensitivity_estimate(const WeightedDataSet& X, int k,
                                         const WeightBounds& K, int site_trials,
                                         std::uint64_t seed);

// The circle instance whose total sensitivity approaches n: unit-weight
// points equally spaced on the radius-r circle, k = 2, cluster weights
// pinned to n-1 and 1. For every trapped index j0 the probe sites
// {0, x_j0 / r} admit a unique optimal clustering, x_j0 alone in the small
// cluster, with cost (n-1) r^2 + (1-r)^2. Construction solves every probe
// and insists the LP reproduces the closed form to 1e-9 relative.
struct SensitivityExample {
    WeightedDataSet data;
    WeightBounds bounds;
    int k = 2;
    double exact_cost = 0;
    double point_bound = 0;        // (1-r)^2 / exact_cost
    std::vector<SiteSet> probes;   // probe pair per trapped index
};

SensitivityExample sensitivity_example(int n, double r);

}  // namespace wca

#endif
