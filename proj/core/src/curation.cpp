#include "metafold/curation.hpp"

#include <algorithm>
#include <ostream>

#include "metafold/error.hpp"
#include "metafold/features.hpp"
#include "metafold/geometry.hpp"

namespace metafold {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::SingleFoldAtlas: return "single_fold_atlas";
    case Verdict::SingleFoldCodnas: return "single_fold_codnas";
    case Verdict::MetamorphicCandidate: return "metamorphic_candidate";
    case Verdict::Excluded: return "excluded";
  }
  return "excluded";
}

Verdict verdict_from_string(std::string_view s) {
  for (Verdict v : {Verdict::SingleFoldAtlas, Verdict::SingleFoldCodnas,
                    Verdict::MetamorphicCandidate, Verdict::Excluded})
    if (to_string(v) == s)
      return v;
  fail(ErrorKind::InvalidArgument, "unknown verdict '" + std::string(s) + "'");
}

FilterOutcome atlas_filter(const Ensemble& trajectory, double threshold) {
  const double mean = rmsf(trajectory).mean;
  return {mean < threshold, mean};
}

FilterOutcome codnas_filter(std::span<const Structure> structures, double threshold) {
  if (structures.size() < 2)
    fail(ErrorKind::InvalidArgument, "pairwise RMSD screen needs at least 2 structures");
  double worst = 0.0;
  for (std::size_t i = 0; i < structures.size(); ++i)
    for (std::size_t j = i + 1; j < structures.size(); ++j)
      worst = std::max(worst, rmsd(structures[i], structures[j]));
  return {worst < threshold, worst};
}

FilterOutcome metamorphic_check(const Structure& a, const Structure& b, double threshold) {
  const double d = rmsd(a, b);
  return {d > threshold, d};
}

bool depth_filter(const AlignmentDepthRecord& record, std::size_t min_depth) {
  return record.depth >= min_depth;
}

Verdict rederive_verdict(const CurationRecord& r, Verdict source, const CurationThresholds& t) {
  if (r.msa_depth && *r.msa_depth < t.min_depth)
    return Verdict::Excluded;
  switch (source) {
    case Verdict::SingleFoldAtlas:
      if (r.avg_rmsf && !(*r.avg_rmsf < t.atlas))
        return Verdict::Excluded;
      break;
    case Verdict::SingleFoldCodnas:
      if (r.max_pair_rmsd && !(*r.max_pair_rmsd < t.codnas))
        return Verdict::Excluded;
      break;
    case Verdict::MetamorphicCandidate:
      if (r.max_pair_rmsd && !(*r.max_pair_rmsd > t.metamorphic))
        return Verdict::Excluded;
      break;
    case Verdict::Excluded:
      break;
  }
  return source;
}

namespace {

void apply_depth(CurationRecord& r, const std::optional<AlignmentDepthRecord>& msa,
                 const CurationThresholds& t) {
  if (!msa)
    return;
  r.msa_depth = msa->depth;
  if (r.verdict != Verdict::Excluded && !depth_filter(*msa, t.min_depth)) {
    r.verdict = Verdict::Excluded;
    r.reason = "alignment depth " + std::to_string(msa->depth) + " < " +
               std::to_string(t.min_depth);
  }
}

} // namespace

CurationRecord curate_atlas(const Ensemble& trajectory,
                            const std::optional<AlignmentDepthRecord>& msa,
                            const CurationThresholds& t) {
  CurationRecord r;
  r.protein_id = trajectory.protein_id();
  FilterOutcome o = atlas_filter(trajectory, t.atlas);
  r.avg_rmsf = o.value;
  r.verdict = o.pass ? Verdict::SingleFoldAtlas : Verdict::Excluded;
  r.reason = o.pass ? "average RMSF below " + format_real(t.atlas)
                    : "average RMSF not below " + format_real(t.atlas);
  apply_depth(r, msa, t);
  return r;
}

CurationRecord curate_codnas(std::string protein_id, std::span<const Structure> structures,
                             const std::optional<AlignmentDepthRecord>& msa,
                             const CurationThresholds& t) {
  CurationRecord r;
  r.protein_id = std::move(protein_id);
  FilterOutcome o = codnas_filter(structures, t.codnas);
  r.max_pair_rmsd = o.value;
  r.verdict = o.pass ? Verdict::SingleFoldCodnas : Verdict::Excluded;
  r.reason = o.pass ? "maximum pairwise RMSD below " + format_real(t.codnas)
                    : "maximum pairwise RMSD not below " + format_real(t.codnas);
  apply_depth(r, msa, t);
  return r;
}

CurationRecord curate_metamorphic(std::string protein_id, const Structure& a, const Structure& b,
                                  const std::optional<AlignmentDepthRecord>& msa,
                                  const CurationThresholds& t) {
  CurationRecord r;
  r.protein_id = std::move(protein_id);
  FilterOutcome o = metamorphic_check(a, b, t.metamorphic);
  r.max_pair_rmsd = o.value;
  r.verdict = o.pass ? Verdict::MetamorphicCandidate : Verdict::Excluded;
  r.reason = o.pass ? "conformations differ by more than " + format_real(t.metamorphic) + " A"
                    : "conformations within " + format_real(t.metamorphic) + " A";
  apply_depth(r, msa, t);
  return r;
}

CurationRecord curate_depth(const AlignmentDepthRecord& msa, Verdict source,
                            const CurationThresholds& t) {
  CurationRecord r;
  r.protein_id = msa.protein_id;
  r.msa_depth = msa.depth;
  if (depth_filter(msa, t.min_depth)) {
    r.verdict = source;
    r.reason = "alignment depth " + std::to_string(msa.depth) + " >= " + std::to_string(t.min_depth);
  } else {
    r.verdict = Verdict::Excluded;
    r.reason = "alignment depth " + std::to_string(msa.depth) + " < " + std::to_string(t.min_depth);
  }
  return r;
}

void write_curation_csv(std::ostream& out, std::span<const CurationRecord> records) {
  out << "id,avg_rmsf,max_pair_rmsd,msa_depth,verdict,reason\n";
  for (const auto& r : records) {
    out << r.protein_id << ',' << (r.avg_rmsf ? format_real(*r.avg_rmsf) : "NA") << ','
        << (r.max_pair_rmsd ? format_real(*r.max_pair_rmsd) : "NA") << ','
        << (r.msa_depth ? std::to_string(*r.msa_depth) : "NA") << ',' << to_string(r.verdict)
        << ',' << r.reason << '\n';
  }
}

} // namespace metafold
