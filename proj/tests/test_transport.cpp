#include "doctest.h"

#include <vector>

#include "oracles.hpp"
#include "test_util.hpp"
#include "wca/rng.hpp"
#include "wca/transport.hpp"

using namespace wca;

namespace {

struct Instance {
    Mat c;  // k x n unit costs
    std::vector<double> w, lo, hi;
};

Instance random_instance(Rng& rng, int n, int k, bool unit_weights, bool integer_bounds) {
    Instance ins;
    ins.c = Mat(k, n);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) ins.c(i, j) = rng.uniform(0, 10);
    for (int j = 0; j < n; ++j) ins.w.push_back(unit_weights ? 1.0 : rng.uniform(0.5, 3.0));
    double W = 0;
    for (double x : ins.w) W += x;
    // Feasible bounds by construction: lower sums below W, uppers above.
    for (int i = 0; i < k; ++i) {
        double lo = integer_bounds ? double(rng.index(int(W / k) + 1)) : rng.uniform(0, W / k);
        double hi;
        switch (rng.index(3)) {
            case 0: hi = kInf; break;
            case 1: hi = lo; break;  // equality window
            default:
                hi = integer_bounds ? lo + 1 + rng.index(int(W) + 1) : lo + rng.uniform(0, W);
        }
        ins.lo.push_back(lo);
        ins.hi.push_back(hi);
    }
    // Repair: need sum lo <= W <= sum hi.
    double lo_sum = 0, hi_sum = 0;
    for (int i = 0; i < k; ++i) lo_sum += ins.lo[i], hi_sum += ins.hi[i];
    if (lo_sum > W)
        for (int i = 0; i < k; ++i) {
            if (ins.hi[i] == ins.lo[i]) ins.hi[i] = ins.lo[i] *= W / lo_sum * 0.99;
            else ins.lo[i] *= W / lo_sum * 0.99;
        }
    hi_sum = 0;
    for (int i = 0; i < k; ++i) hi_sum += ins.hi[i];
    if (hi_sum < W) ins.hi[0] = kInf;
    if (integer_bounds) {
        // Re-floor so the oracle's filter sees clean integers; keep feasibility.
        double ls = 0;
        for (int i = 0; i < k; ++i) {
            ins.lo[i] = std::floor(ins.lo[i]);
            if (ins.hi[i] != kInf) ins.hi[i] = std::max(ins.lo[i], std::floor(ins.hi[i]));
            ls += ins.lo[i];
        }
        double hs = 0;
        for (int i = 0; i < k; ++i) hs += ins.hi[i];
        if (ls > W || hs < W) { ins.lo.assign(k, 0.0); ins.hi.assign(k, kInf); }
    }
    return ins;
}

// Dual objective for the assignment LP at the solver's potentials; the
// cluster multiplier splits into the two bound prices by sign.
double dual_objective(const Instance& ins, const TransportSolution& sol) {
    double val = 0;
    for (std::size_t j = 0; j < ins.w.size(); ++j) val += ins.w[j] * sol.point_potential[j];
    for (std::size_t i = 0; i < ins.lo.size(); ++i) {
        double pi = sol.cluster_potential[i];
        double v_lo = std::max(0.0, -pi), v_hi = std::max(0.0, pi);
        val += ins.lo[i] * v_lo;
        if (v_hi > 0) {
            REQUIRE(ins.hi[i] != kInf);  // finite support of the dual
            val -= ins.hi[i] * v_hi;
        }
    }
    return val;
}

void check_certificate(const Instance& ins, const TransportSolution& sol) {
    int n = static_cast<int>(ins.w.size()), k = static_cast<int>(ins.lo.size());
    double cmax = ins.c.cwiseAbs().maxCoeff();
    double rc_tol = 1e-8 * (1 + cmax);
    // Primal feasibility.
    for (int j = 0; j < n; ++j) {
        double colsum = sol.flow.col(j).sum();
        CHECK(colsum == doctest::Approx(ins.w[j]).epsilon(1e-10));
        for (int i = 0; i < k; ++i) CHECK(sol.flow(i, j) >= 0);
    }
    for (int i = 0; i < k; ++i) {
        double mass = sol.flow.row(i).sum();
        CHECK(mass >= ins.lo[i] - 1e-9 * (1 + ins.w.size()));
        if (ins.hi[i] != kInf) CHECK(mass <= ins.hi[i] + 1e-9 * (1 + ins.w.size()));
    }
    // Dual feasibility and complementary slackness on the support.
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < k; ++i) {
            double rc = ins.c(i, j) - sol.point_potential[j] + sol.cluster_potential[i];
            CHECK(rc >= -rc_tol);
            if (sol.flow(i, j) > 1e-9) CHECK(std::abs(rc) <= rc_tol);
        }
    // Strong duality.
    double gap = std::abs(sol.cost - dual_objective(ins, sol));
    CHECK(gap <= 1e-8 * (1 + std::abs(sol.cost)));
}

// The support of a basic solution must be a forest in the bipartite graph.
void check_forest(const TransportSolution& sol) {
    int k = static_cast<int>(sol.flow.rows()), n = static_cast<int>(sol.flow.cols());
    std::vector<int> parent(n + k);
    for (int v = 0; v < n + k; ++v) parent[v] = v;
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < k; ++i)
            if (sol.flow(i, j) > 1e-9) {
                int a = find(j), b = find(n + i);
                CHECK(a != b);  // a repeated root would close a cycle
                parent[a] = b;
            }
}

}  // namespace

TEST_CASE("transport: one point, one cluster") {
    Mat c(1, 1);
    c << 3.5;
    auto sol = solve_transport(c, {2.0}, {0.0}, {kInf});
    CHECK(sol.cost == doctest::Approx(7.0));
    CHECK(sol.flow(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("transport: unconstrained picks the cheapest row") {
    Mat c(2, 3);
    c << 1, 5, 2,
         4, 0.5, 2;
    auto sol = solve_transport(c, {1, 1, 1}, {0, 0}, {kInf, kInf});
    CHECK(sol.cost == doctest::Approx(1 + 0.5 + 2));
    CHECK(sol.flow(0, 0) == doctest::Approx(1));
    CHECK(sol.flow(1, 1) == doctest::Approx(1));
}

TEST_CASE("transport: equality bounds force a swap") {
    // Both points prefer cluster 0, but each cluster must hold weight 1.
    Mat c(2, 2);
    c << 0, 1,
         5, 3;
    auto sol = solve_transport(c, {1, 1}, {1, 1}, {1, 1});
    CHECK(sol.cost == doctest::Approx(0 + 3));
    CHECK(sol.flow(0, 0) == doctest::Approx(1));
    CHECK(sol.flow(1, 1) == doctest::Approx(1));
    Instance ins{c, {1, 1}, {1, 1}, {1, 1}};
    check_certificate(ins, sol);
}

TEST_CASE("transport: infeasible bounds are rejected with the sums") {
    Mat c = Mat::Zero(2, 2);
    CHECK_THROWS_WITH_AS(solve_transport(c, {1, 1}, {3, 3}, {kInf, kInf}),
                         doctest::Contains("sum kappa^-"), Error);
    CHECK_THROWS_WITH_AS(solve_transport(c, {1, 1}, {0, 0}, {0.5, 0.5}),
                         doctest::Contains("sum kappa^+"), Error);
}

TEST_CASE("transport: fractional split under a tight upper bound") {
    // One point of weight 2, cluster 0 capped at 1.5: the point must split.
    Mat c(2, 1);
    c << 1, 2;
    auto sol = solve_transport(c, {2.0}, {0, 0}, {1.5, kInf});
    CHECK(sol.flow(0, 0) == doctest::Approx(1.5));
    CHECK(sol.flow(1, 0) == doctest::Approx(0.5));
    CHECK(sol.cost == doctest::Approx(1.5 + 1.0));
}

TEST_CASE("transport: matches the LP oracle on random instances") {
    Rng rng(902100);
    for (int rep = 0; rep < 150; ++rep) {
        int n = 1 + rng.index(7), k = 1 + rng.index(3);
        auto ins = random_instance(rng, n, k, false, false);
        auto sol = solve_transport(ins.c, ins.w, ins.lo, ins.hi);
        auto ref = oracle::solve_assignment_lp(ins.c, ins.w, ins.lo, ins.hi);
        REQUIRE(ref.feasible);
        CHECK(sol.cost == doctest::Approx(ref.cost).epsilon(1e-9));
        check_certificate(ins, sol);
        check_forest(sol);
    }
}

TEST_CASE("transport: unit weights and integer bounds match the integral oracle") {
    // Transportation vertices are integral here, so exhaustive search over
    // hard assignments is also an exact oracle.
    Rng rng(445566);
    for (int rep = 0; rep < 100; ++rep) {
        int n = 1 + rng.index(7), k = 1 + rng.index(3);
        auto ins = random_instance(rng, n, k, true, true);
        auto sol = solve_transport(ins.c, ins.w, ins.lo, ins.hi);
        auto ref = oracle::best_integral_assignment(ins.c, ins.w, ins.lo, ins.hi);
        REQUIRE(ref.feasible);
        CHECK(sol.cost == doctest::Approx(ref.cost).epsilon(1e-9));
    }
}

TEST_CASE("transport: determinism") {
    Rng rng(7);
    auto ins = random_instance(rng, 6, 3, false, false);
    auto a = solve_transport(ins.c, ins.w, ins.lo, ins.hi);
    auto b = solve_transport(ins.c, ins.w, ins.lo, ins.hi);
    CHECK(a.cost == b.cost);
    CHECK((a.flow - b.flow).cwiseAbs().maxCoeff() == 0);
    CHECK(a.pivots == b.pivots);
}

TEST_CASE("transport: a larger instance stays certified") {
    Rng rng(123987);
    int n = 300, k = 5;
    Instance ins;
    ins.c = Mat(k, n);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) ins.c(i, j) = rng.uniform(0, 100);
    for (int j = 0; j < n; ++j) ins.w.push_back(rng.uniform(0.1, 2.0));
    double W = 0;
    for (double x : ins.w) W += x;
    for (int i = 0; i < k; ++i) {
        ins.lo.push_back(0.9 * W / k);
        ins.hi.push_back(1.1 * W / k);
    }
    auto sol = solve_transport(ins.c, ins.w, ins.lo, ins.hi);
    check_certificate(ins, sol);
    check_forest(sol);
}
