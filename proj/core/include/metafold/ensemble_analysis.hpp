#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "metafold/geometry.hpp"
#include "metafold/structure_io.hpp"

namespace metafold {

/// Indices of members whose mean pLDDT is >= the threshold, in order.
/// Throws AllFiltered when nothing survives.
std::vector<std::size_t> filter_by_plddt(const Ensemble& ensemble, double min_mean_plddt);

/// Contiguous residue span, 1-based and inclusive.
struct VariableRegion {
  std::size_t start = 1;
  std::size_t end = 1;
  double score = 0.0;

  std::size_t length() const { return end - start + 1; }
  std::vector<std::size_t> indices() const;  // 0-based
  friend bool operator==(const VariableRegion&, const VariableRegion&) = default;
};

struct RegionOptions {
  std::size_t smoothing_window = 5;
  double z = 1.0;                 // candidates exceed mean + z * std
  std::size_t min_length = 5;
  // The rest of the chain must stay stable: its internal mean distance
  // variance may be at most this fraction of the region score, otherwise
  // the variability is global and the whole chain is returned.
  double stability_ratio = 0.25;
};

/// Per-residue variability (mean distance variance to every other residue).
std::vector<double> residue_variability(const ContactMapStats& stats);

VariableRegion detect_variable_region(const ContactMapStats& stats,
                                      const RegionOptions& options = {});

struct ClusterResult {
  std::vector<std::vector<std::size_t>> clusters;  // member indices, biggest first
  std::vector<std::size_t> representatives;        // one per cluster
  std::vector<std::size_t> outliers;
  std::vector<std::size_t> kept;
  VariableRegion region;

  std::size_t K() const { return clusters.size(); }
};

struct ClusterOptions {
  double tm_threshold = 0.6;
  double min_cluster_frac = 0.01;
  unsigned threads = 1;
};

/// Average-linkage agglomeration on a symmetric distance matrix; merging
/// stops once the closest pair of clusters is farther than
/// `max_merge_distance`. Returns groups of row indices, each sorted, in
/// order of their smallest index.
std::vector<std::vector<std::size_t>> average_linkage(const Eigen::MatrixXd& distance,
                                                      double max_merge_distance);

/// Outlier removal, size ordering and representative choice for a partition
/// of `kept` (groups hold positions into `kept`).
ClusterResult assemble_clusters(const Ensemble& ensemble, std::span<const std::size_t> kept,
                                const std::vector<std::vector<std::size_t>>& groups,
                                const VariableRegion& region, double min_cluster_frac);

/// Clusters the kept members on 1 - TM-score over the variable region.
ClusterResult cluster_ensemble(const Ensemble& ensemble, std::span<const std::size_t> kept,
                               const VariableRegion& region, const ClusterOptions& options = {});

std::size_t min_cluster_size(std::size_t kept_count, double min_cluster_frac);

/// Versioned plain-text table: header comments, then one row per kept
/// member with its 1-based index, cluster id (0 for outliers),
/// representative flag and outlier flag.
void write_cluster_table(std::ostream& out, const std::string& protein_id,
                         const ClusterResult& result);
ClusterResult read_cluster_table(std::istream& in);

} // namespace metafold
