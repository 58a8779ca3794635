#ifndef WCA_TRANSPORT_HPP
#define WCA_TRANSPORT_HPP

#include <vector>

#include "wca/core.hpp"

namespace wca {

// Exact solver for the transportation LP behind weight-constrained assignment:
//
//   minimize    sum_{i,j} unit_cost(i,j) * x(i,j)
//   subject to  sum_i x(i,j) = w_j          for every point j
//               lo_i <= sum_j x(i,j) <= hi_i for every cluster i
//               x >= 0
//
// Bounded-variable network simplex on the bipartite graph plus a slack sink
// that absorbs omega(X) - sum lo. The returned flow is a basic optimal vertex
// (its support is a forest) and the potentials are exact tree duals with the
// sink normalized to zero, so for every support arc
// unit_cost(i,j) = point_potential[j] - cluster_potential[i].
struct TransportSolution {
    Mat flow;                                // k x n
    std::vector<double> point_potential;     // length n
    std::vector<double> cluster_potential;   // length k
    double cost = 0;
    long pivots = 0;
};

TransportSolution solve_transport(const Mat& unit_cost, const std::vector<double>& w,
                                  const std::vector<double>& lo,
                                  const std::vector<double>& hi);

}  // namespace wca

#endif
