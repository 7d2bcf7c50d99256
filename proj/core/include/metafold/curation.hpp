#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metafold/structure_io.hpp"

namespace metafold {

inline constexpr double kAtlasMaxMeanRmsf = 0.83;       // Angstrom, strict <
inline constexpr double kCodnasMaxPairRmsd = 0.80;      // Angstrom, strict <
inline constexpr double kMetamorphicMinRmsd = 4.0;      // Angstrom, strict >
inline constexpr std::size_t kMinAlignmentDepth = 20;   // sequences, >=

enum class Verdict { SingleFoldAtlas, SingleFoldCodnas, MetamorphicCandidate, Excluded };

std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

struct CurationRecord {
  std::string protein_id;
  std::optional<double> avg_rmsf;
  std::optional<double> max_pair_rmsd;
  std::optional<std::size_t> msa_depth;
  Verdict verdict = Verdict::Excluded;
  std::string reason;
};

struct FilterOutcome {
  bool pass = false;
  double value = 0.0;
};

/// Trajectory frames as ensemble members; pass iff mean RMSF < threshold.
FilterOutcome atlas_filter(const Ensemble& trajectory, double threshold = kAtlasMaxMeanRmsf);
/// Pass iff the largest pairwise RMSD < threshold.
FilterOutcome codnas_filter(std::span<const Structure> structures,
                            double threshold = kCodnasMaxPairRmsd);
/// Pass iff RMSD(a, b) > threshold.
FilterOutcome metamorphic_check(const Structure& a, const Structure& b,
                                double threshold = kMetamorphicMinRmsd);
bool depth_filter(const AlignmentDepthRecord& record, std::size_t min_depth = kMinAlignmentDepth);

struct CurationThresholds {
  double atlas = kAtlasMaxMeanRmsf;
  double codnas = kCodnasMaxPairRmsd;
  double metamorphic = kMetamorphicMinRmsd;
  std::size_t min_depth = kMinAlignmentDepth;
};

/// Recomputes the verdict a record's stored metrics imply.
Verdict rederive_verdict(const CurationRecord& record, Verdict source_class,
                         const CurationThresholds& thresholds = {});

CurationRecord curate_atlas(const Ensemble& trajectory,
                            const std::optional<AlignmentDepthRecord>& msa = std::nullopt,
                            const CurationThresholds& thresholds = {});
CurationRecord curate_codnas(std::string protein_id, std::span<const Structure> structures,
                             const std::optional<AlignmentDepthRecord>& msa = std::nullopt,
                             const CurationThresholds& thresholds = {});
CurationRecord curate_metamorphic(std::string protein_id, const Structure& a, const Structure& b,
                                  const std::optional<AlignmentDepthRecord>& msa = std::nullopt,
                                  const CurationThresholds& thresholds = {});
/// Depth screen alone; a passing record keeps `source_class`.
CurationRecord curate_depth(const AlignmentDepthRecord& msa, Verdict source_class,
                            const CurationThresholds& thresholds = {});

/// id,avg_rmsf,max_pair_rmsd,msa_depth,verdict,reason (NA when unavailable).
void write_curation_csv(std::ostream& out, std::span<const CurationRecord> records);

} // namespace metafold
