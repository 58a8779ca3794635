#ifndef WCA_APPROX_HPP
#define WCA_APPROX_HPP

#include <cstdint>

#include "wca/core.hpp"

namespace wca {

// Unconstrained front-end approximation: an integral clustering with at most
// beta*k nonvoid clusters, plus its Euclidean cost measured at the cluster
// centroids. Downstream thresholds consume the measured value, so alg_cost is
// the number that matters, not any theoretical constant.
struct ApproxResult {
    Clustering clustering;
    double alg_cost = 0;
};

// Weighted probabilistic seeding plus Lloyd-style refinement with beta*k
// centers, best of `repeats` independent runs (ties to the lowest run index,
// so the result is deterministic given the seed). If beta*k >= n the discrete
// clustering with one point per cluster wins outright with cost zero.
ApproxResult ab_approximate(const WeightedDataSet& X, int k, int beta = 1,
                            int repeats = 5, std::uint64_t seed = 0);

// Exact unconstrained optimum over integral assignments, enumerated with an
// odometer. Guarded by k^n <= 1e7; this is a test oracle, not a pipeline
// stage. Restricting to integral assignments loses nothing: at optimal sites
// every point can be moved fully to its nearest centroid without cost
// increase.
double opt_bruteforce(const WeightedDataSet& X, int k);

}  // namespace wca

#endif
