#ifndef WCA_CORE_HPP
#define WCA_CORE_HPP

#include <Eigen/Dense>
#include <limits>
#include <utility>
#include <vector>

#include "wca/error.hpp"

// Domain types for weight-constrained anisotropic assignment: a weighted point
// set, a fractional clustering, per-cluster weight windows, a family of
// ellipsoidal norms, and the sites the cost is measured against. All types are
// immutable after construction; the operations below are pure functions.

namespace wca {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Points x_1..x_n in d-space with strictly positive weights; the total weight
// is computed once and cached.
class WeightedDataSet {
  public:
    WeightedDataSet(std::vector<Vec> points, std::vector<double> weights);

    int n() const { return static_cast<int>(points_.size()); }
    int dim() const { return static_cast<int>(points_[0].size()); }
    const Vec& point(int j) const { return points_[j]; }
    double weight(int j) const { return weights_[j]; }
    double total_weight() const { return total_weight_; }
    const std::vector<Vec>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }

  private:
    std::vector<Vec> points_;
    std::vector<double> weights_;
    double total_weight_ = 0;
};

// k x n matrix of fractions xi(i,j): how much of point j sits in cluster i.
// Columns must be stochastic: entries nonnegative, each column summing to 1
// within 1e-9 absolute. Violations are rejected at construction rather than
// renormalized, so downstream LP certificates stay meaningful.
class Clustering {
  public:
    explicit Clustering(Mat xi);

    int k() const { return static_cast<int>(xi_.rows()); }
    int n() const { return static_cast<int>(xi_.cols()); }
    double xi(int i, int j) const { return xi_(i, j); }
    const Mat& matrix() const { return xi_; }

    // Indices j with xi(i,j) > 0.
    std::vector<int> support(int i) const;
    bool is_integral(double tol = 0) const;

    static Clustering integral(const std::vector<int>& label, int k);

  private:
    Mat xi_;
};

// Per-cluster weight windows [kappa_i^-, kappa_i^+]; upper bounds may be +inf.
class WeightBounds {
  public:
    WeightBounds(std::vector<double> lower, std::vector<double> upper);
    static WeightBounds unconstrained(int k);

    int k() const { return static_cast<int>(lower_.size()); }
    double lower(int i) const { return lower_[i]; }
    double upper(int i) const { return upper_[i]; }
    double lower_sum() const { return lower_sum_; }
    double upper_sum() const { return upper_sum_; }  // +inf if any upper is
    bool is_unconstrained() const;

    // A data set is admissible iff sum kappa^- <= omega(X) <= sum kappa^+.
    void check_feasible(double total_weight) const;

  private:
    std::vector<double> lower_, upper_;
    double lower_sum_ = 0, upper_sum_ = 0;
};

// k symmetric positive-definite matrices A_i defining |x|^2_{A_i} = x^T A_i x.
// Inputs are symmetrized as (A + A^T)/2 after an asymmetry check at 1e-12;
// the family-wide eigenvalue extremes are cached at construction.
class NormFamily {
  public:
    explicit NormFamily(std::vector<Mat> matrices);
    static NormFamily identity(int k, int d);

    int k() const { return static_cast<int>(matrices_.size()); }
    int dim() const { return static_cast<int>(matrices_[0].rows()); }
    const Mat& matrix(int i) const { return matrices_[i]; }
    double lambda_max() const { return lambda_max_; }  // max_i of largest eigenvalue
    double lambda_min() const { return lambda_min_; }  // min_i of smallest eigenvalue
    bool is_identity() const { return identity_; }

    // |v|^2 under A_i.
    double norm2(int i, const Vec& v) const {
        return identity_ ? v.squaredNorm() : v.dot(matrices_[i] * v);
    }

  private:
    std::vector<Mat> matrices_;
    double lambda_max_ = 1, lambda_min_ = 1;
    bool identity_ = false;
};

// Reference points s_1..s_k. Duplicates are allowed here (the diagram type is
// the one that needs pairwise-distinct sites).
class SiteSet {
  public:
    explicit SiteSet(std::vector<Vec> sites);

    int k() const { return static_cast<int>(sites_.size()); }
    int dim() const { return static_cast<int>(sites_[0].size()); }
    const Vec& site(int i) const { return sites_[i]; }
    const std::vector<Vec>& sites() const { return sites_; }

  private:
    std::vector<Vec> sites_;
};

// sum_i sum_j xi(i,j) * omega_j * |x_j - s_i|^2_{A_i}. Ignores weight bounds.
double cost(const WeightedDataSet& X, const Clustering& C, const SiteSet& S,
            const NormFamily& A);

// (c_i, omega(C_i)); a void cluster (omega(C_i) <= 1e-12 * omega(X)) gets the
// zero vector as its centroid.
std::pair<Vec, double> centroid_and_weight(const WeightedDataSet& X, const Clustering& C,
                                           int i);

// Sites at the cluster centroids (zero vector for void clusters).
SiteSet centroid_sites(const WeightedDataSet& X, const Clustering& C);

// V_A(X0) = sum omega_x |x - c0|^2_A with c0 the centroid of X0.
double variation(const WeightedDataSet& X0, const Mat& A);

// Cost of C evaluated at the optimal sites, i.e. at the cluster centroids.
double opt_site_cost(const WeightedDataSet& X, const Clustering& C, const NormFamily& A);

// Smallest/largest eigenvalue of a symmetric matrix (helper for norm bounds).
std::pair<double, double> eigen_range(const Mat& A);

}  // namespace wca

#endif
