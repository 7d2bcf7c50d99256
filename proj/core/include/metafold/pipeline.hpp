#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metafold/ensemble_analysis.hpp"
#include "metafold/error.hpp"
#include "metafold/features.hpp"
#include "metafold/forest.hpp"

namespace metafold {

struct PipelineConfig {
  double plddt_min = 70.0;
  double tm_cut = 0.6;
  double min_cluster_frac = 0.01;
  RegionOptions region;
  unsigned threads = 1;
};

struct ProteinAnalysis {
  ClusterResult clusters;
  FeatureVector features;
};

/// pLDDT filter, contact-map variance, variable region, clustering and
/// features. Errors are rethrown with the protein id prefixed.
ProteinAnalysis analyze_protein(const Ensemble& ensemble, const PipelineConfig& config = {});

struct RankingEntry {
  std::string protein_id;
  double probability = 0.0;
  int K = 1;
  double min_tm = 1.0;
  std::optional<double> top_plddt;
};

struct RankingFailure {
  std::string protein_id;
  ErrorKind kind = ErrorKind::InvalidArgument;
  std::string message;
};

struct RankingResult {
  std::vector<RankingEntry> entries;    // probability desc, id asc
  std::vector<RankingFailure> failures; // id asc
};

RankingResult rank_proteins(const ForestModel& model, std::span<const Ensemble> ensembles,
                            const PipelineConfig& config = {});

/// Same, loading each source lazily. A source is a directory of PDB files
/// or a multi-model PDB file; loading errors become failures.
RankingResult rank_sources(const ForestModel& model,
                           std::span<const std::filesystem::path> sources,
                           const PipelineConfig& config = {});

/// Subdirectories and .pdb/.ent files directly under `dir`, sorted.
std::vector<std::filesystem::path> list_ensemble_sources(const std::filesystem::path& dir);

void write_ranking_csv(std::ostream& out, std::span<const RankingEntry> entries);
void write_failures_csv(std::ostream& out, std::span<const RankingFailure> failures);

} // namespace metafold
