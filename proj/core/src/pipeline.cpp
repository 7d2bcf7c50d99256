#include "metafold/pipeline.hpp"

#include <algorithm>
#include <ostream>

#include "metafold/geometry.hpp"
#include "metafold/parallel.hpp"

namespace metafold {

ProteinAnalysis analyze_protein(const Ensemble& ensemble, const PipelineConfig& config) {
  try {
    auto kept = filter_by_plddt(ensemble, config.plddt_min);
    ContactMapStats stats = contact_map_stats(ensemble, kept);
    VariableRegion region = detect_variable_region(stats, config.region);
    ClusterOptions opts;
    opts.tm_threshold = config.tm_cut;
    opts.min_cluster_frac = config.min_cluster_frac;
    opts.threads = config.threads;
    ProteinAnalysis out;
    out.clusters = cluster_ensemble(ensemble, kept, region, opts);
    out.features = extract_features(out.clusters, ensemble, config.threads);
    return out;
  } catch (const Error& e) {
    fail(e.kind(), ensemble.protein_id() + ": " + e.what());
  }
}

namespace {

// Per-protein slots are filled independently, then reduced in a fixed order.
struct Slot {
  std::optional<RankingEntry> entry;
  std::optional<RankingFailure> failure;
};

Slot score_one(const ForestModel& model, const Ensemble& ensemble, const PipelineConfig& inner) {
  Slot slot;
  try {
    ProteinAnalysis a = analyze_protein(ensemble, inner);
    RankingEntry e;
    e.protein_id = ensemble.protein_id();
    e.probability = model.predict_proba(a.features);
    e.K = a.features.K;
    e.min_tm = a.features.min_tm;
    e.top_plddt = a.features.plddt[0];
    slot.entry = std::move(e);
  } catch (const Error& err) {
    slot.failure = RankingFailure{ensemble.protein_id(), err.kind(), err.what()};
  }
  return slot;
}

RankingResult reduce(std::vector<Slot>& slots) {
  RankingResult out;
  for (auto& s : slots) {
    if (s.entry)
      out.entries.push_back(std::move(*s.entry));
    if (s.failure)
      out.failures.push_back(std::move(*s.failure));
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const auto& a, const auto& b) {
    if (a.probability != b.probability)
      return a.probability > b.probability;
    return a.protein_id < b.protein_id;
  });
  std::sort(out.failures.begin(), out.failures.end(),
            [](const auto& a, const auto& b) { return a.protein_id < b.protein_id; });
  return out;
}

} // namespace

RankingResult rank_proteins(const ForestModel& model, std::span<const Ensemble> ensembles,
                            const PipelineConfig& config) {
  PipelineConfig inner = config;
  inner.threads = 1;
  std::vector<Slot> slots(ensembles.size());
  parallel_for(ensembles.size(), config.threads,
               [&](std::size_t i) { slots[i] = score_one(model, ensembles[i], inner); });
  return reduce(slots);
}

RankingResult rank_sources(const ForestModel& model,
                           std::span<const std::filesystem::path> sources,
                           const PipelineConfig& config) {
  PipelineConfig inner = config;
  inner.threads = 1;
  std::vector<Slot> slots(sources.size());
  parallel_for(sources.size(), config.threads, [&](std::size_t i) {
    try {
      Ensemble e = load_ensemble(sources[i]);
      slots[i] = score_one(model, e, inner);
    } catch (const Error& err) {
      const auto& p = sources[i];
      std::string id = std::filesystem::is_directory(p) ? p.filename().string() : p.stem().string();
      slots[i].failure = RankingFailure{id, err.kind(), err.what()};
    }
  });
  return reduce(slots);
}

std::vector<std::filesystem::path> list_ensemble_sources(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    fail(ErrorKind::Io, dir.string() + ": not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) {
      out.push_back(entry.path());
      continue;
    }
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (entry.is_regular_file() && (ext == ".pdb" || ext == ".ent"))
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Ids and messages may carry commas or quotes.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"')
      q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + '"';
}

} // namespace

void write_ranking_csv(std::ostream& out, std::span<const RankingEntry> entries) {
  out << "rank,id,probability,K,min_tm,top_plddt\n";
  std::size_t rank = 0;
  for (const auto& e : entries)
    out << ++rank << ',' << csv_field(e.protein_id) << ',' << format_real(e.probability) << ','
        << e.K << ',' << format_real(e.min_tm) << ','
        << (e.top_plddt ? format_real(*e.top_plddt) : "NA") << '\n';
}

void write_failures_csv(std::ostream& out, std::span<const RankingFailure> failures) {
  out << "id,error,message\n";
  for (const auto& f : failures)
    out << csv_field(f.protein_id) << ',' << to_string(f.kind) << ',' << csv_field(f.message)
        << '\n';
}

} // namespace metafold
