#include "doctest.h"

#include "test_util.hpp"
#include "wca/core.hpp"
#include "wca/rng.hpp"

using namespace wca;
using tu::v;

TEST_CASE("cost: coincident site gives zero") {
    WeightedDataSet X({v({0, 0})}, {1});
    Clustering C(Mat::Ones(1, 1));
    SiteSet S({v({0, 0})});
    CHECK(cost(X, C, S, NormFamily::identity(1, 2)) == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("cost: single unit distance") {
    WeightedDataSet X({v({0, 0}), v({1, 0})}, {1, 1});
    Clustering C(Mat::Ones(1, 2));
    SiteSet S({v({0, 0})});
    CHECK(cost(X, C, S, NormFamily::identity(1, 2)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cost: anisotropic norm scales the squared distance") {
    // x^T diag(4,1) x at x=(1,0) is 4, times weight 2.
    WeightedDataSet X({v({1, 0})}, {2});
    Clustering C(Mat::Ones(1, 1));
    SiteSet S({v({0, 0})});
    NormFamily A({tu::diag({4, 1})});
    CHECK(cost(X, C, S, A) == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("cost: dimension mismatch names the problem") {
    WeightedDataSet X({v({0, 0})}, {1});
    Clustering C(Mat::Ones(1, 1));
    SiteSet S3({v({0, 0, 0})});
    CHECK_THROWS_AS(cost(X, C, S3, NormFamily::identity(1, 2)), Error);
}

TEST_CASE("centroid_and_weight: all mass on one spot") {
    WeightedDataSet X({v({2, 3}), v({2, 3})}, {1, 2.5});
    Clustering C(Mat::Ones(1, 2));
    auto [c, w] = centroid_and_weight(X, C, 0);
    CHECK(c.isApprox(v({2, 3}), 1e-12));
    CHECK(w == doctest::Approx(3.5));
}

TEST_CASE("centroid_and_weight: void cluster gets the zero vector") {
    WeightedDataSet X({v({5, 7})}, {2});
    Mat xi(2, 1);
    xi << 1, 0;
    Clustering C(xi);
    auto [c, w] = centroid_and_weight(X, C, 1);
    CHECK(c.isZero(0));
    CHECK(w == 0);
}

TEST_CASE("centroid_and_weight: weighted mean") {
    WeightedDataSet X({v({0, 0}), v({2, 0})}, {1, 3});
    Clustering C(Mat::Ones(1, 2));
    auto [c, w] = centroid_and_weight(X, C, 0);
    CHECK(c.isApprox(v({1.5, 0}), 1e-12));
    CHECK(w == doctest::Approx(4));
}

TEST_CASE("variation: singleton is zero") {
    WeightedDataSet X({v({3, 1})}, {2});
    CHECK(variation(X, Mat::Identity(2, 2)) == doctest::Approx(0));
}

TEST_CASE("variation: symmetric pair") {
    WeightedDataSet X({v({-1, 0}), v({1, 0})}, {1, 1});
    CHECK(variation(X, Mat::Identity(2, 2)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("variation: weighted pair") {
    // centroid (0.75, 0); 1 * 0.5625 + 3 * 0.0625 = 0.75
    WeightedDataSet X({v({0, 0}), v({1, 0})}, {1, 3});
    CHECK(variation(X, Mat::Identity(2, 2)) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("empty data set is rejected") {
    CHECK_THROWS_AS(WeightedDataSet({}, {}), Error);
}

TEST_CASE("opt_site_cost: one cluster at its centroid") {
    WeightedDataSet X({v({0, 0}), v({2, 0})}, {1, 1});
    Clustering C(Mat::Ones(1, 2));
    CHECK(opt_site_cost(X, C, NormFamily::identity(1, 2)) == doctest::Approx(2.0));
}

TEST_CASE("opt_site_cost: singleton clusters cost nothing") {
    WeightedDataSet X({v({0, 0}), v({10, 10})}, {1, 1});
    Clustering C = Clustering::integral({0, 1}, 2);
    CHECK(opt_site_cost(X, C, NormFamily::identity(2, 2)) == doctest::Approx(0));
}

TEST_CASE("clustering construction enforces column sums and signs") {
    Mat bad(2, 1);
    bad << 0.5, 0.6;
    CHECK_THROWS_AS(Clustering{bad}, Error);
    Mat neg(2, 1);
    neg << 1.5, -0.5;
    CHECK_THROWS_AS(Clustering{neg}, Error);
    Mat ok(2, 1);
    ok << 0.5, 0.5 + 5e-10;  // inside the 1e-9 column-sum tolerance
    CHECK_NOTHROW(Clustering{ok});
    CHECK(Clustering::integral({0, 1, 0}, 2).is_integral());
    CHECK_FALSE(Clustering(ok).is_integral());
}

TEST_CASE("weight bounds validate and report feasibility") {
    CHECK_THROWS_AS(WeightBounds({-1}, {2}), Error);
    CHECK_THROWS_AS(WeightBounds({3}, {2}), Error);
    WeightBounds K({1, 1}, {2, kInf});
    CHECK_NOTHROW(K.check_feasible(3));
    CHECK_THROWS_AS(K.check_feasible(1.5), Error);  // sum kappa^- = 2 > 1.5
    WeightBounds finite({0, 0}, {1, 1});
    CHECK_THROWS_AS(finite.check_feasible(3), Error);  // 3 > sum kappa^+ = 2
    CHECK(WeightBounds::unconstrained(3).is_unconstrained());
    CHECK_FALSE(K.is_unconstrained());
}

TEST_CASE("norm family rejects asymmetry and indefiniteness") {
    Mat asym(2, 2);
    asym << 1, 0.5, 0, 1;
    CHECK_THROWS_AS(NormFamily{std::vector<Mat>{asym}}, Error);
    Mat indef(2, 2);
    indef << 1, 0, 0, -1;
    CHECK_THROWS_AS(NormFamily{std::vector<Mat>{indef}}, Error);
    NormFamily A({tu::diag({4, 1}), tu::diag({2, 3})});
    CHECK(A.lambda_max() == doctest::Approx(4));
    CHECK(A.lambda_min() == doctest::Approx(1));
    CHECK(NormFamily::identity(2, 3).is_identity());
    CHECK_FALSE(A.is_identity());
}

TEST_CASE("center replacement identity") {
    // sum w |x-s|^2_A = omega |c-s|^2_A + V_A for random instances.
    Rng rng(20240811);
    for (int rep = 0; rep < 200; ++rep) {
        int d = 1 + rng.index(4), n = 1 + rng.index(12);
        auto X = tu::random_data(rng, n, d);
        Mat A = tu::random_spd(rng, d, 0.2, 5.0);
        Vec s = tu::random_point(rng, d, 3.0);
        double lhs = 0;
        Vec csum = Vec::Zero(d);
        for (int j = 0; j < n; ++j) {
            Vec diff = X.point(j) - s;
            lhs += X.weight(j) * diff.dot(A * diff);
            csum += X.weight(j) * X.point(j);
        }
        Vec c = csum / X.total_weight();
        Vec cs = c - s;
        double rhs = X.total_weight() * cs.dot(A * cs) + variation(X, A);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("norm equivalence squeezes the anisotropic variation") {
    Rng rng(77001);
    for (int rep = 0; rep < 200; ++rep) {
        int d = 1 + rng.index(4), n = 2 + rng.index(10);
        auto X = tu::random_data(rng, n, d);
        Mat A = tu::random_spd(rng, d, 0.3, 6.0);
        auto [lo, hi] = eigen_range(A);
        double ve = variation(X, Mat::Identity(d, d));
        double va = variation(X, A);
        CHECK(va >= lo * ve * (1 - 1e-9));
        CHECK(va <= hi * ve * (1 + 1e-9));
    }
}

TEST_CASE("centroids are the optimal sites") {
    Rng rng(5150);
    for (int rep = 0; rep < 100; ++rep) {
        int d = 1 + rng.index(3), n = 3 + rng.index(8), k = 1 + rng.index(3);
        auto X = tu::random_data(rng, n, d);
        auto C = tu::random_clustering(rng, k, n);
        std::vector<Mat> mats;
        for (int i = 0; i < k; ++i) mats.push_back(tu::random_spd(rng, d, 0.3, 4.0));
        NormFamily A(mats);
        std::vector<Vec> sites;
        for (int i = 0; i < k; ++i) sites.push_back(tu::random_point(rng, d, 2.0));
        double anywhere = cost(X, C, SiteSet(sites), A);
        double at_centroids = opt_site_cost(X, C, A);
        CHECK(anywhere >= at_centroids * (1 - 1e-9) - 1e-12);
    }
}

TEST_CASE("cost is invariant under simultaneous permutation") {
    Rng rng(31337);
    int n = 9, k = 3, d = 2;
    auto X = tu::random_data(rng, n, d);
    auto C = tu::random_clustering(rng, k, n);
    std::vector<Vec> sites;
    for (int i = 0; i < k; ++i) sites.push_back(tu::random_point(rng, d));
    NormFamily A = NormFamily::identity(k, d);
    double base = cost(X, C, SiteSet(sites), A);

    std::vector<int> perm(n);
    for (int j = 0; j < n; ++j) perm[j] = j;
    for (int j = n - 1; j > 0; --j) std::swap(perm[j], perm[rng.index(j + 1)]);
    std::vector<Vec> pp(n);
    std::vector<double> pw(n);
    Mat pxi(k, n);
    for (int j = 0; j < n; ++j) {
        pp[j] = X.point(perm[j]);
        pw[j] = X.weight(perm[j]);
        pxi.col(j) = C.matrix().col(perm[j]);
    }
    double permuted = cost(WeightedDataSet(pp, pw), Clustering(pxi), SiteSet(sites), A);
    CHECK(permuted == doctest::Approx(base).epsilon(1e-12));
}
