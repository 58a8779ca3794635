#include "doctest.h"

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "wca/epsnet.hpp"
#include "wca/error.hpp"
#include "wca/rng.hpp"

using namespace wca;

namespace {

// Columns are the net directions normalized to the sphere.
Mat normalized_columns(const EpsilonNet& net) {
    Mat U(net.dim, static_cast<int>(net.directions.size()));
    for (int q = 0; q < U.cols(); ++q) U.col(q) = net.directions[q].normalized();
    return U;
}

// Worst covering distance over `samples` random unit vectors. Both vectors
// are unit, so |p - q|^2 = 2 - 2 p.q and only the best dot product matters.
double worst_covering_gap(const EpsilonNet& net, int samples, Rng& rng) {
    Mat U = normalized_columns(net);
    double worst = 0;
    for (int s = 0; s < samples; ++s) {
        Vec p(net.dim);
        do {
            for (int a = 0; a < net.dim; ++a) p[a] = rng.gaussian();
        } while (p.norm() < 1e-6);
        p.normalize();
        double best_dot = (p.transpose() * U).maxCoeff();
        double gap2 = std::max(0.0, 2 - 2 * best_dot);
        worst = std::max(worst, std::sqrt(gap2));
    }
    return worst;
}

}  // namespace

TEST_CASE("build_epsilon_net: the 1-d net is the two endpoints") {
    auto net = build_epsilon_net(0.3, 1);
    REQUIRE(net.directions.size() == 2);
    CHECK(net.directions[0][0] == -1.0);
    CHECK(net.directions[1][0] == 1.0);
    CHECK(net.dim == 1);
    CHECK(net.eps0 == 0.3);
}

TEST_CASE("build_epsilon_net: accuracy domain is (0, 1/2]") {
    CHECK_THROWS_WITH_AS(build_epsilon_net(0.0, 2), doctest::Contains("net accuracy"), Error);
    CHECK_THROWS_WITH_AS(build_epsilon_net(0.51, 2), doctest::Contains("net accuracy"), Error);
    CHECK_THROWS_WITH_AS(build_epsilon_net(-0.1, 2), doctest::Contains("net accuracy"), Error);
    CHECK_THROWS_WITH_AS(build_epsilon_net(0.3, 0), doctest::Contains("dimension"), Error);
}

TEST_CASE("build_epsilon_net: 2-d node count is frozen") {
    auto net = build_epsilon_net(0.5, 2);
    // Square boundary with 13 nodes per side, corners shared: 4*13 - 4.
    CHECK(net.directions.size() == 48);
    for (const Vec& q : net.directions) {
        CHECK(q.norm() > 0);
        CHECK(std::max(std::abs(q[0]), std::abs(q[1])) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(std::abs(q[0]) <= 1.0 + 1e-15);
        CHECK(std::abs(q[1]) <= 1.0 + 1e-15);
    }
}

TEST_CASE("build_epsilon_net: 3-d node count matches the boundary-grid formula") {
    double eps0 = 0.3;
    auto net = build_epsilon_net(eps0, 3);
    int m = static_cast<int>(std::ceil(2.0 / (eps0 / (2.0 * std::sqrt(3.0)))));
    // Inclusion-exclusion over 6 facets, 12 edges, 8 corners of the cube.
    std::size_t expect = 6u * (m + 1) * (m + 1) - 12u * (m + 1) + 8u;
    CHECK(net.directions.size() == expect);
}

TEST_CASE("build_epsilon_net: Monte-Carlo covering in 2-d") {
    Rng rng(8101);
    for (double eps0 : {0.4, 0.15}) {
        auto net = build_epsilon_net(eps0, 2);
        CHECK(worst_covering_gap(net, 100000, rng) <= eps0);
    }
}

TEST_CASE("build_epsilon_net: Monte-Carlo covering in 3-d") {
    Rng rng(8102);
    auto net = build_epsilon_net(0.3, 3);
    CHECK(worst_covering_gap(net, 20000, rng) <= 0.3);
}

TEST_CASE("build_epsilon_net: size constants per dimension") {
    // |Q| * eps0^(d-1) stays below a per-dimension constant; the values here
    // are measured once and frozen as regression ceilings.
    for (double eps0 : {0.5, 0.4, 0.15}) {
        auto net = build_epsilon_net(eps0, 2);
        CHECK(static_cast<double>(net.directions.size()) * eps0 <= 26.0);
    }
    for (double eps0 : {0.45, 0.3}) {
        auto net = build_epsilon_net(eps0, 3);
        CHECK(static_cast<double>(net.directions.size()) * eps0 * eps0 <= 350.0);
    }
    auto oversized = [] { return build_epsilon_net(0.001, 4); };
    CHECK_THROWS_WITH_AS(oversized(), doctest::Contains("1e7"), Error);
}
