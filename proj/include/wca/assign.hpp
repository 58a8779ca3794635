#ifndef WCA_ASSIGN_HPP
#define WCA_ASSIGN_HPP

#include <cstdint>
#include <vector>

#include "wca/core.hpp"

// Weight-constrained anisotropic assignment: exact LP solves against fixed
// sites, diagram extraction from the LP duals, compatibility classification,
// and the merging/extension maps between a data set and a compressed one.

namespace wca {

// Optimality evidence for one assignment solve. point_price[j] is the value
// of the lower envelope at x_j; lower/upper_price are the nonnegative
// multipliers of the cluster weight window sides. seed records the weight
// perturbation used (0 means the instance was solved as given).
struct DualCertificate {
    std::vector<double> point_price;
    std::vector<double> lower_price;
    std::vector<double> upper_price;
    double dual_objective = 0;
    double duality_gap = 0;    // |primal - dual|
    double cs_residual = 0;    // worst complementary-slackness product
    std::uint64_t seed = 0;
};

struct AssignmentResult {
    Clustering clustering;
    DualCertificate certificate;
    double cost = 0;
};

// Minimize sum xi_ij w_j |x_j - s_i|^2_{A_i} over clusterings obeying K.
// Unconstrained instances short-circuit to nearest-site assignment (ties to
// the lowest cluster index); everything else goes through the transportation
// LP. The result is a basic vertex, certified optimal (duality gap and
// complementary slackness at 1e-8 relative), then fractions below 1e-9 are
// truncated and columns renormalized.
AssignmentResult solve_assignment(const WeightedDataSet& X, const SiteSet& S,
                                  const NormFamily& A, const WeightBounds& K);

// Cells P_i = {x : g_i(x) <= g_l(x) for all l} with g_i(x) = |x-t_i|^2_{A_i}
// + sigma_i. Sites must be pairwise distinct; cells cover space and overlap
// on their boundaries.
class AnisotropicDiagram {
  public:
    AnisotropicDiagram(SiteSet sites, std::vector<double> sizes, NormFamily norms);

    int k() const { return sites_.k(); }
    int dim() const { return sites_.dim(); }
    const SiteSet& sites() const { return sites_; }
    double size(int i) const { return sizes_[i]; }
    const std::vector<double>& sizes() const { return sizes_; }
    const NormFamily& norms() const { return norms_; }

    double g(int i, const Vec& x) const {
        return norms_.norm2(i, x - sites_.site(i)) + sizes_[i];
    }
    // Lower envelope h(x) = min_i g_i(x).
    double envelope(const Vec& x) const;
    // Cells containing x: g_i(x) <= h(x) + tol.
    std::vector<int> members(const Vec& x, double tol = 1e-9) const;

  private:
    SiteSet sites_;
    std::vector<double> sizes_;
    NormFamily norms_;
};

enum class Compatibility { none, compatible, strong, strict };

// compatible: supp(C_i) within cell i for every i. strong: the two sets are
// equal. strict: strong, and no two cells share more than one data point.
// Cell membership uses the 1e-9 tolerance on g-value gaps.
Compatibility check_compatibility(const AnisotropicDiagram& P, const Clustering& C,
                                  const WeightedDataSet& X);

struct DiagramExtraction {
    Clustering clustering;
    AnisotropicDiagram diagram;
    DualCertificate certificate;
    int attempts = 0;  // perturbation rounds used; 0 = solved as given
};

inline constexpr std::uint64_t kDefaultPerturbationSeed = 0x5eed0001;

// Solve the assignment LP and read the diagram sizes off the duals, so that
// the returned (clustering, diagram) pair is strictly compatible. Degenerate
// instances are retried up to 5 times with multiplicative weight noise in
// [1, 1+1e-9] (bounds rescaled to keep feasibility exact); the result then
// belongs to the perturbed instance, with the seed recorded.
DiagramExtraction extract_diagram(const WeightedDataSet& X, const SiteSet& S,
                                  const NormFamily& A, const WeightBounds& K,
                                  std::uint64_t seed = kDefaultPerturbationSeed);

// Surjection from source point indices onto compressed point indices.
class MergingFunction {
  public:
    MergingFunction(std::vector<int> map, int target_count);
    static MergingFunction identity(int n);

    int source_count() const { return static_cast<int>(map_.size()); }
    int target_count() const { return target_count_; }
    int target(int j) const { return map_[j]; }
    const std::vector<int>& map() const { return map_; }
    std::vector<std::vector<int>> preimages() const;

    // Composition: first this map, then `next` on its targets.
    MergingFunction then(const MergingFunction& next) const;

    // Weight conservation against a concrete pair of data sets, to 1e-12
    // relative per compressed point.
    void check_weights(const WeightedDataSet& X, const WeightedDataSet& Xt) const;

  private:
    std::vector<int> map_;
    int target_count_ = 0;
};

// Image clustering on the compressed set: merged fractions are the
// weight-averaged fractions of the preimage.
Clustering push_forward(const MergingFunction& p, const WeightedDataSet& X,
                        const WeightedDataSet& Xt, const Clustering& C);

// Extension f: every source point copies the fractions of its merged image.
// Cluster weights are preserved, so f maps K-feasible to K-feasible.
Clustering extend(const MergingFunction& p, const Clustering& Ct);

}  // namespace wca

#endif
