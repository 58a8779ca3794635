#include "wca/core.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace wca {

namespace {
constexpr double kColumnSumTol = 1e-9;   // absolute, on clustering column sums
constexpr double kVoidRelTol = 1e-12;    // relative, on cluster weights
constexpr double kSymmetryTol = 1e-12;   // relative, on norm matrices
}  // namespace

WeightedDataSet::WeightedDataSet(std::vector<Vec> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
    require(!points_.empty(), "weighted data set needs at least one point");
    require(points_.size() == weights_.size(), "points/weights length mismatch: ",
            points_.size(), " vs ", weights_.size());
    const auto d = points_[0].size();
    require(d >= 1, "points must have dimension >= 1");
    for (std::size_t j = 0; j < points_.size(); ++j) {
        require(points_[j].size() == d, "point ", j, " has dimension ", points_[j].size(),
                ", expected ", d);
        require(points_[j].allFinite(), "point ", j, " has non-finite coordinates");
        require(std::isfinite(weights_[j]) && weights_[j] > 0, "weight ", j, " is ",
                weights_[j], ", must be finite and > 0");
    }
    double total = 0;
    for (double w : weights_) total += w;
    total_weight_ = total;
}

Clustering::Clustering(Mat xi) : xi_(std::move(xi)) {
    require(xi_.rows() >= 1 && xi_.cols() >= 1, "clustering matrix must be nonempty");
    for (int j = 0; j < xi_.cols(); ++j) {
        double sum = 0;
        for (int i = 0; i < xi_.rows(); ++i) {
            double v = xi_(i, j);
            require(std::isfinite(v) && v >= 0, "xi(", i, ",", j, ") = ", v,
                    " is negative or non-finite");
            sum += v;
        }
        require(std::abs(sum - 1.0) <= kColumnSumTol, "column ", j, " of xi sums to ", sum,
                ", not 1 within ", kColumnSumTol);
    }
}

std::vector<int> Clustering::support(int i) const {
    std::vector<int> out;
    for (int j = 0; j < n(); ++j)
        if (xi_(i, j) > 0) out.push_back(j);
    return out;
}

bool Clustering::is_integral(double tol) const {
    for (int j = 0; j < n(); ++j)
        for (int i = 0; i < k(); ++i) {
            double v = xi_(i, j);
            if (v > tol && v < 1.0 - tol) return false;
        }
    return true;
}

Clustering Clustering::integral(const std::vector<int>& label, int k) {
    Mat xi = Mat::Zero(k, static_cast<int>(label.size()));
    for (std::size_t j = 0; j < label.size(); ++j) {
        require(label[j] >= 0 && label[j] < k, "label ", j, " = ", label[j],
                " out of range [0,", k, ")");
        xi(label[j], static_cast<int>(j)) = 1.0;
    }
    return Clustering(std::move(xi));
}

WeightBounds::WeightBounds(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    require(!lower_.empty() && lower_.size() == upper_.size(),
            "weight bounds need matching nonempty lower/upper lists");
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        require(std::isfinite(lower_[i]) && lower_[i] >= 0, "kappa^-[", i, "] = ", lower_[i],
                ", must be finite and >= 0");
        require(!std::isnan(upper_[i]) && upper_[i] >= lower_[i], "kappa bounds [", i,
                "] invalid: lower ", lower_[i], " > upper ", upper_[i]);
        lower_sum_ += lower_[i];
        upper_sum_ += upper_[i];
    }
}

WeightBounds WeightBounds::unconstrained(int k) {
    return WeightBounds(std::vector<double>(k, 0.0), std::vector<double>(k, kInf));
}

bool WeightBounds::is_unconstrained() const {
    for (int i = 0; i < k(); ++i)
        if (lower_[i] != 0 || upper_[i] != kInf) return false;
    return true;
}

void WeightBounds::check_feasible(double total_weight) const {
    require(lower_sum_ <= total_weight, "infeasible bounds: sum kappa^- = ", lower_sum_,
            " exceeds omega(X) = ", total_weight);
    require(total_weight <= upper_sum_, "infeasible bounds: omega(X) = ", total_weight,
            " exceeds sum kappa^+ = ", upper_sum_);
}

NormFamily::NormFamily(std::vector<Mat> matrices) : matrices_(std::move(matrices)) {
    require(!matrices_.empty(), "norm family needs at least one matrix");
    const auto d = matrices_[0].rows();
    lambda_max_ = -kInf;
    lambda_min_ = kInf;
    identity_ = true;
    for (std::size_t i = 0; i < matrices_.size(); ++i) {
        Mat& A = matrices_[i];
        require(A.rows() == d && A.cols() == d, "matrix ", i, " is ", A.rows(), "x", A.cols(),
                ", expected ", d, "x", d);
        double scale = 1.0 + A.cwiseAbs().maxCoeff();
        double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
        require(asym <= kSymmetryTol * scale, "matrix ", i, " asymmetric: |A - A^T| = ", asym);
        A = ((A + A.transpose()) * 0.5).eval();
        auto [lo, hi] = eigen_range(A);
        require(lo > 0, "matrix ", i, " not positive definite: min eigenvalue ", lo);
        lambda_min_ = std::min(lambda_min_, lo);
        lambda_max_ = std::max(lambda_max_, hi);
        if (!A.isIdentity(0.0)) identity_ = false;
    }
}

NormFamily NormFamily::identity(int k, int d) {
    return NormFamily(std::vector<Mat>(k, Mat::Identity(d, d)));
}

SiteSet::SiteSet(std::vector<Vec> sites) : sites_(std::move(sites)) {
    require(!sites_.empty(), "site set needs at least one site");
    const auto d = sites_[0].size();
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        require(sites_[i].size() == d, "site ", i, " has dimension ", sites_[i].size(),
                ", expected ", d);
        require(sites_[i].allFinite(), "site ", i, " has non-finite coordinates");
    }
}

std::pair<double, double> eigen_range(const Mat& A) {
    Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
    require(es.info() == Eigen::Success, "eigendecomposition failed");
    const auto& ev = es.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

double cost(const WeightedDataSet& X, const Clustering& C, const SiteSet& S,
            const NormFamily& A) {
    require(C.k() == S.k(), "clustering has ", C.k(), " clusters but site set has ", S.k());
    require(C.k() == A.k(), "clustering has ", C.k(), " clusters but norm family has ", A.k());
    require(C.n() == X.n(), "clustering covers ", C.n(), " points but data set has ", X.n());
    require(S.dim() == X.dim(), "sites have dimension ", S.dim(), " but points have ", X.dim());
    require(A.dim() == X.dim(), "norms have dimension ", A.dim(), " but points have ", X.dim());
    double total = 0;
    for (int i = 0; i < C.k(); ++i) {
        const Vec& s = S.site(i);
        for (int j = 0; j < X.n(); ++j) {
            double f = C.xi(i, j);
            if (f <= 0) continue;
            total += f * X.weight(j) * A.norm2(i, X.point(j) - s);
        }
    }
    return total;
}

std::pair<Vec, double> centroid_and_weight(const WeightedDataSet& X, const Clustering& C,
                                           int i) {
    require(i >= 0 && i < C.k(), "cluster index ", i, " out of range [0,", C.k(), ")");
    require(C.n() == X.n(), "clustering covers ", C.n(), " points but data set has ", X.n());
    Vec sum = Vec::Zero(X.dim());
    double w = 0;
    for (int j = 0; j < X.n(); ++j) {
        double m = C.xi(i, j) * X.weight(j);
        if (m <= 0) continue;
        sum += m * X.point(j);
        w += m;
    }
    if (w <= kVoidRelTol * X.total_weight()) return {Vec::Zero(X.dim()), w};
    return {sum / w, w};
}

SiteSet centroid_sites(const WeightedDataSet& X, const Clustering& C) {
    std::vector<Vec> sites;
    sites.reserve(C.k());
    for (int i = 0; i < C.k(); ++i) sites.push_back(centroid_and_weight(X, C, i).first);
    return SiteSet(std::move(sites));
}

double variation(const WeightedDataSet& X0, const Mat& A) {
    Vec sum = Vec::Zero(X0.dim());
    for (int j = 0; j < X0.n(); ++j) sum += X0.weight(j) * X0.point(j);
    Vec c = sum / X0.total_weight();
    double v = 0;
    for (int j = 0; j < X0.n(); ++j) {
        Vec diff = X0.point(j) - c;
        v += X0.weight(j) * diff.dot(A * diff);
    }
    return v;
}

double opt_site_cost(const WeightedDataSet& X, const Clustering& C, const NormFamily& A) {
    require(C.k() == A.k(), "clustering has ", C.k(), " clusters but norm family has ", A.k());
    return cost(X, C, centroid_sites(X, C), A);
}

}  // namespace wca
