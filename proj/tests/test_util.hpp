#ifndef WCA_TESTS_UTIL_HPP
#define WCA_TESTS_UTIL_HPP

// Small helpers shared by the test suites: literal constructors for points
// and matrices, and random instance generators driven by wca::Rng.

#include <initializer_list>
#include <vector>

#include "wca/core.hpp"
#include "wca/rng.hpp"

namespace tu {

inline wca::Vec v(std::initializer_list<double> xs) {
    wca::Vec out(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) out[i++] = x;
    return out;
}

inline wca::Mat diag(std::initializer_list<double> ds) {
    int n = static_cast<int>(ds.size());
    wca::Mat out = wca::Mat::Zero(n, n);
    int i = 0;
    for (double d : ds) out(i, i) = d, ++i;
    return out;
}

inline std::vector<double> ones(int n) { return std::vector<double>(n, 1.0); }

// Random SPD matrix with eigenvalues in [lo, hi]: rotate a diagonal by the Q
// factor of a Gaussian matrix.
inline wca::Mat random_spd(wca::Rng& rng, int d, double lo, double hi) {
    wca::Mat g(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) g(r, c) = rng.gaussian();
    Eigen::HouseholderQR<wca::Mat> qr(g);
    wca::Mat q = qr.householderQ();
    wca::Vec ev(d);
    for (int i = 0; i < d; ++i) ev[i] = rng.uniform(lo, hi);
    return q * ev.asDiagonal() * q.transpose();
}

inline wca::Vec random_point(wca::Rng& rng, int d, double scale = 1.0) {
    wca::Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = scale * rng.gaussian();
    return p;
}

inline wca::WeightedDataSet random_data(wca::Rng& rng, int n, int d, bool unit_weights = false) {
    std::vector<wca::Vec> pts;
    std::vector<double> w;
    for (int j = 0; j < n; ++j) {
        pts.push_back(random_point(rng, d, 2.0));
        w.push_back(unit_weights ? 1.0 : rng.uniform(0.25, 4.0));
    }
    return wca::WeightedDataSet(std::move(pts), std::move(w));
}

// Random column-stochastic clustering, mixing integral and fractional columns.
inline wca::Clustering random_clustering(wca::Rng& rng, int k, int n) {
    wca::Mat xi = wca::Mat::Zero(k, n);
    for (int j = 0; j < n; ++j) {
        if (rng.uniform() < 0.5) {
            xi(rng.index(k), j) = 1.0;
        } else {
            double sum = 0;
            for (int i = 0; i < k; ++i) {
                xi(i, j) = rng.uniform();
                sum += xi(i, j);
            }
            for (int i = 0; i < k; ++i) xi(i, j) /= sum;
        }
    }
    return wca::Clustering(std::move(xi));
}

}  // namespace tu

#endif
