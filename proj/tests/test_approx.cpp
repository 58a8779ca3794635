#include "doctest.h"

#include <vector>

#include "test_util.hpp"
#include "wca/approx.hpp"
#include "wca/core.hpp"
#include "wca/rng.hpp"

using namespace wca;
using tu::v;

TEST_CASE("ab_approximate: n <= beta*k collapses to the discrete clustering") {
    Rng rng(7001);
    auto X = tu::random_data(rng, 5, 2);
    auto res = ab_approximate(X, 2, 3, 5, 1);
    CHECK(res.alg_cost == 0.0);
    CHECK(res.clustering.k() == 5);
    CHECK(res.clustering.is_integral());
    for (int i = 0; i < 5; ++i) CHECK(res.clustering.support(i).size() == 1);
    // beta*k == n runs the algorithm proper but still lands at zero.
    auto tight = ab_approximate(X, 5, 1, 3, 1);
    CHECK(tight.alg_cost <= 1e-12);
}

TEST_CASE("ab_approximate: two well-separated pairs split cleanly") {
    WeightedDataSet X({v({0, 0}), v({1, 0}), v({10, 0}), v({11, 0})}, tu::ones(4));
    auto res = ab_approximate(X, 2, 1, 5, 42);
    CHECK(res.alg_cost == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.alg_cost == doctest::Approx(opt_bruteforce(X, 2)).epsilon(1e-12));
    CHECK(res.clustering.is_integral());
}

TEST_CASE("opt_bruteforce: closed forms") {
    Rng rng(7002);
    auto X = tu::random_data(rng, 3, 2);
    CHECK(opt_bruteforce(X, 3) == 0.0);

    WeightedDataSet pairs({v({0, 0}), v({1, 0}), v({10, 0}), v({11, 0})}, tu::ones(4));
    CHECK(opt_bruteforce(pairs, 2) == doctest::Approx(1.0).epsilon(1e-12));

    auto Y = tu::random_data(rng, 6, 3);
    Mat I = Mat::Identity(3, 3);
    WeightedDataSet all = Y;
    CHECK(opt_bruteforce(Y, 1) == doctest::Approx(variation(all, I)).epsilon(1e-12));
}

TEST_CASE("opt_bruteforce: rejects oversized instances") {
    Rng rng(7003);
    auto X = tu::random_data(rng, 20, 2);
    CHECK_THROWS_WITH_AS(opt_bruteforce(X, 3), doctest::Contains("limit"), Error);
}

TEST_CASE("ab_approximate: never beats the exact optimum") {
    Rng rng(7004);
    for (int rep = 0; rep < 30; ++rep) {
        int n = 4 + rng.index(7), k = 1 + rng.index(3), d = 1 + rng.index(3);
        auto X = tu::random_data(rng, n, d);
        auto res = ab_approximate(X, k, 1, 5, 1000 + rep);
        double opt = opt_bruteforce(X, k);
        CHECK(res.alg_cost + 1e-9 >= opt);
        CHECK(res.clustering.is_integral());
        CHECK(res.clustering.k() <= k);
        // The reported value is the cost of the returned clustering at its
        // own centroids, nothing else.
        NormFamily I = NormFamily::identity(res.clustering.k(), d);
        CHECK(res.alg_cost ==
              doctest::Approx(opt_site_cost(X, res.clustering, I)).epsilon(1e-9));
        for (int i = 0; i < res.clustering.k(); ++i)
            CHECK(!res.clustering.support(i).empty());
    }
}

TEST_CASE("ab_approximate: deterministic for a fixed seed") {
    Rng rng(7005);
    auto X = tu::random_data(rng, 40, 3);
    auto a = ab_approximate(X, 3, 2, 4, 77);
    auto b = ab_approximate(X, 3, 2, 4, 77);
    CHECK(a.alg_cost == b.alg_cost);
    CHECK((a.clustering.matrix() - b.clustering.matrix()).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("ab_approximate: larger instance stays sane") {
    Rng rng(7006);
    auto X = tu::random_data(rng, 200, 2);
    auto res = ab_approximate(X, 5, 2, 5, 9);
    CHECK(res.clustering.k() <= 10);
    CHECK(res.clustering.is_integral());
    // More centers cannot be worse than the single-cluster variation.
    Mat I = Mat::Identity(2, 2);
    CHECK(res.alg_cost <= variation(X, I) + 1e-9);
}
