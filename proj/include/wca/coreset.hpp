#ifndef WCA_CORESET_HPP
#define WCA_CORESET_HPP

#include <cstdint>
#include <vector>

#include "wca/assign.hpp"
#include "wca/core.hpp"
#include "wca/epsnet.hpp"

namespace wca {

// One pencil per approximate cluster: every net direction anchored at the
// cluster centroid.
struct Pencil {
    Vec vertex;
    std::vector<Vec> lines;
};

// Every data point projected onto the nearest line of its own cluster's
// pencil. Line ids are global, pencil index * |Q| + direction index; the
// parameter is the position along the unit direction measured from the
// vertex, which is also how batching orders points later.
struct Projection {
    WeightedDataSet points;
    std::vector<int> line;
    std::vector<double> parameter;
    std::vector<Pencil> pencils;
    double movement = 0;  // sum omega_j ||x_j - xbar_j||^2
};

Projection project_to_pencils(const WeightedDataSet& X, const Clustering& approx,
                              const EpsilonNet& net);

// A batch of consecutive points on one line. A point split between two
// batches appears in both member lists with complementary fractions; that is
// the literal two-point split, kept against the original index instead of
// materializing a copy.
struct Batch {
    int line = -1;
    std::vector<int> member;
    std::vector<double> fraction;
    Vec centroid;
    double weight = 0;
    double variation = 0;  // Euclidean variation of the assigned fractions
};

// Greedy left-to-right batching per line: a batch closes exactly when its
// variation reaches vbar, splitting the closing point fractionally when it
// would overshoot. All batches except the last per line have variation vbar
// within 1e-9. vbar = 0 degenerates to runs of coincident projections.
std::vector<Batch> batch_lines(const WeightedDataSet& Xbar, const std::vector<int>& line,
                               const std::vector<double>& parameter, double vbar);

// Fractional routing of one source point into compressed targets.
struct Route {
    int target = 0;
    double fraction = 1;
};

struct MergedBatches {
    WeightedDataSet points;
    std::vector<std::vector<Route>> routing;
    double delta_plus = 0;   // lambda^+ * sum of batch variations
    double delta_minus = 0;  // lambda^- * sum of batch variations
};

// Collapses every batch to its centroid. Batch statistics are recomputed
// from the raw projected points and checked against the stored values; the
// recomputed variations are the authoritative source of the offsets.
MergedBatches merge_batches(const WeightedDataSet& Xbar, const std::vector<Batch>& batches,
                            const NormFamily& A);

struct Provenance {
    double alg = 0;
    double eps0 = 0;
    double vbar = 0;
    long long lines = 0;
    long long batches = 0;
    std::uint64_t seed = 0;
};

// Compressed weighted set with the fractional routing that defines both the
// merging map and the extension: a coreset clustering is pulled back to the
// source by xi(i, j) = sum over routes (target, fraction) of j of
// fraction * xi~(i, target).
class Coreset {
  public:
    Coreset(WeightedDataSet points, std::vector<std::vector<Route>> routing,
            double source_weight, double epsilon, double delta, double delta_plus,
            double delta_minus, Provenance provenance);

    static Coreset identity(const WeightedDataSet& X);

    const WeightedDataSet& points() const { return points_; }
    int source_n() const { return static_cast<int>(routing_.size()); }
    double source_weight() const { return source_weight_; }
    const std::vector<std::vector<Route>>& routing() const { return routing_; }
    double epsilon() const { return epsilon_; }
    double delta() const { return delta_; }
    double delta_plus() const { return delta_plus_; }
    double delta_minus() const { return delta_minus_; }
    const Provenance& provenance() const { return provenance_; }

    Clustering extend(const Clustering& Ct) const;

  private:
    WeightedDataSet points_;
    std::vector<std::vector<Route>> routing_;
    double source_weight_ = 0;
    double epsilon_ = 0;
    double delta_ = 1;
    double delta_plus_ = 0;
    double delta_minus_ = 0;
    Provenance provenance_;
};

struct CoresetConfig {
    int beta = 1;
    int repeats = 5;
    std::uint64_t seed = 0;
    double alpha = 16;  // assumed approximation quality inside eps0; smaller
                        // alpha tightens the net but is not certified
};

// Three-step pipeline: unconstrained approximation, projection onto pencils
// over an eps0-net, batching at the variation threshold. Both stages run at
// accuracy epsilon/3, composing to at most epsilon.
Coreset build_coreset(const WeightedDataSet& X, int k, double epsilon, const NormFamily& A,
                      const CoresetConfig& config = {});

// inner must be built on outer's compressed set.
Coreset compose(const Coreset& outer, const Coreset& inner);

struct MovementCertificate {
    bool certified = false;
    double movement = 0;
    double bound = 0;
    bool heuristic = false;  // set when opt_lower_bound was not an exact oracle
};

// Movement criterion: the merger (X~, p) is a linear epsilon-coreset whenever
// sum omega_j ||x_j - x~_{p(j)}||^2 <= eps^2 lambda^-/(16 lambda^+) * OPT(X).
// The caller supplies a lower bound on the unconstrained Euclidean optimum
// and must flag it when it is heuristic.
MovementCertificate movement_coreset_certify(const WeightedDataSet& X,
                                             const WeightedDataSet& Xt,
                                             const MergingFunction& p, double epsilon,
                                             const NormFamily& A, double opt_lower_bound,
                                             bool heuristic_bound = false);

}  // namespace wca

#endif
