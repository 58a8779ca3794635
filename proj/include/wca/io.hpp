#ifndef WCA_IO_HPP
#define WCA_IO_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wca/core.hpp"
#include "wca/coreset.hpp"

// File formats for the command line tools. Points travel as CSV with a
// header (d coordinate columns plus an optional `weight` column), clusterings
// as sparse cluster,point,fraction triplets, coresets as JSON. Fractions,
// weights and offsets are written as hexadecimal doubles so that a
// write-then-read round trip is bit exact. All parse errors name the file
// and the 1-based line.

namespace wca {

// Exact hexadecimal rendering of a finite double, strtod-parseable.
std::string hex_double(double v);

// Instance configuration file: JSON object with optional keys `k`,
// `kappa` (one [lo, hi] pair per cluster, "inf" for an open upper side) and
// `A` (either the string "identity" or one d x d matrix per cluster).
// Unknown keys are rejected.
struct InstanceConfig {
    int k = 0;  // 0 when the file does not pin k
    std::optional<std::vector<std::pair<double, double>>> kappa;
    std::optional<std::vector<Mat>> norms;

    // Resolve against the cluster count (and data dimension) of the run;
    // missing sections fall back to unconstrained bounds / identity norms.
    WeightBounds bounds(int clusters) const;
    NormFamily norm_family(int clusters, int dim) const;
};

InstanceConfig read_config(const std::string& path);
void write_config(const std::string& path, int k,
                  const std::vector<std::pair<double, double>>& kappa);

WeightedDataSet read_points_csv(const std::string& path);
void write_points_csv(const std::string& path, const WeightedDataSet& X);

// Same table layout as a points file; a `weight` column is ignored.
SiteSet read_sites_csv(const std::string& path);
void write_sites_csv(const std::string& path, const SiteSet& S);

// n is the number of data points the clustering refers to. The cluster count
// is inferred from the largest index present, raised to at least k_min.
Clustering read_clustering_csv(const std::string& path, int n, int k_min = 1);
void write_clustering_csv(const std::string& path, const Clustering& C);

Coreset read_coreset_json(const std::string& path);
void write_coreset_json(const std::string& path, const Coreset& cs);

}  // namespace wca

#endif
