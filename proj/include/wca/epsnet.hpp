#ifndef WCA_EPSNET_HPP
#define WCA_EPSNET_HPP

#include <vector>

#include "wca/core.hpp"

namespace wca {

// Directions covering the unit sphere: for every unit vector p some entry q
// satisfies ||p - q/||q||_2||_2 <= eps0. Entries are grid nodes on the facets
// of the cube [-1,1]^d, so each has rational coordinates and a coordinate
// equal to +-1 (hence none is zero).
struct EpsilonNet {
    double eps0 = 0;
    int dim = 0;
    std::vector<Vec> directions;
};

// Facet grid with rational step 2/m where m = ceil(2 / (eps0 / (2 sqrt(d)))).
// The half-diagonal of a grid cell is then at most eps0/4, and normalizing
// cube-surface points to the sphere at most doubles distances, which leaves a
// factor-two covering margin. d = 1 degenerates to the two endpoints.
EpsilonNet build_epsilon_net(double eps0, int d);

}  // namespace wca

#endif
