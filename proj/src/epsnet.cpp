#include "wca/epsnet.hpp"

#include <cmath>
#include <set>
#include <vector>

#include "wca/error.hpp"

namespace wca {

EpsilonNet build_epsilon_net(double eps0, int d) {
    require(eps0 > 0 && eps0 <= 0.5, "net accuracy must lie in (0, 1/2], got ", eps0);
    require(d >= 1, "dimension must be positive, got ", d);

    EpsilonNet net;
    net.eps0 = eps0;
    net.dim = d;
    if (d == 1) {
        net.directions.push_back(Vec::Constant(1, -1.0));
        net.directions.push_back(Vec::Constant(1, 1.0));
        return net;
    }

    int m = static_cast<int>(std::ceil(2.0 / (eps0 / (2.0 * std::sqrt(double(d))))));
    require(2.0 * d * std::pow(m + 1.0, d - 1) <= 1e7, "net with ", d, " dimensions at ",
            eps0, " would hold more than 1e7 directions");

    // Shared facet boundaries (edges, corners) would be enumerated once per
    // touching facet; nodes are deduplicated by exact coordinates, which is
    // sound because every facet computes them with the same expression.
    std::set<std::vector<double>> seen;
    std::vector<double> coord(d);
    std::vector<int> digit(d - 1);
    for (int axis = 0; axis < d; ++axis)
        for (double sign : {-1.0, 1.0}) {
            std::fill(digit.begin(), digit.end(), 0);
            for (;;) {
                coord[axis] = sign;
                int pos = 0;
                for (int a = 0; a < d; ++a) {
                    if (a == axis) continue;
                    coord[a] = (2.0 * digit[pos++]) / m - 1.0;
                }
                seen.insert(coord);
                int p = 0;
                while (p < d - 1 && ++digit[p] > m) digit[p++] = 0;
                if (p == d - 1) break;
            }
        }

    for (const auto& c : seen) {
        Vec q(d);
        for (int a = 0; a < d; ++a) q[a] = c[a];
        net.directions.push_back(std::move(q));
    }
    return net;
}

}  // namespace wca
