// metafold command-line tool.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metafold/curation.hpp"
#include "metafold/ensemble_analysis.hpp"
#include "metafold/evaluation.hpp"
#include "metafold/features.hpp"
#include "metafold/forest.hpp"
#include "metafold/model_io.hpp"
#include "metafold/pipeline.hpp"
#include "metafold/synthetic.hpp"

namespace fs = std::filesystem;
using namespace metafold;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in)
    fail(ErrorKind::Io, p.string() + ": cannot open for reading");
  return in;
}

// Writes go to a buffer first so a failed run leaves no partial file.
template <class Fn>
void write_file(const fs::path& p, Fn&& fn) {
  std::ostringstream buf;
  fn(buf);
  if (p == "-") {
    std::cout << buf.str();
    return;
  }
  if (p.has_parent_path())
    fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << buf.str();
  if (!out)
    fail(ErrorKind::Io, p.string() + ": write failed");
}

struct PipelineArgs {
  double plddt_min = 70.0;
  double tm_cut = 0.6;
  double min_cluster_frac = 0.01;

  void add(CLI::App* app) {
    app->add_option("--plddt-min", plddt_min, "Minimum mean pLDDT of a kept member")
        ->capture_default_str();
    app->add_option("--tm-cut", tm_cut, "TM-score threshold for merging clusters")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--min-cluster-frac", min_cluster_frac,
                    "Clusters smaller than this fraction of kept members are outliers")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
  }
  PipelineConfig config(unsigned threads) const {
    PipelineConfig c;
    c.plddt_min = plddt_min;
    c.tm_cut = tm_cut;
    c.min_cluster_frac = min_cluster_frac;
    c.threads = threads;
    return c;
  }
};

Dataset load_training(const fs::path& features, const std::optional<fs::path>& labels) {
  auto in = open_in(features);
  FeatureTable table = read_feature_csv(in);
  std::vector<LabeledExample> examples;
  if (labels) {
    auto lin = open_in(*labels);
    auto map = read_label_csv(lin);
    examples = attach_labels(table, &map);
  } else {
    examples = attach_labels(table, nullptr);
  }
  return Dataset::from_examples(examples);
}

HyperGrid grid_from_arg(const std::string& arg) {
  if (arg == "default")
    return HyperGrid{};
  auto in = open_in(arg);
  return load_grid(in);
}

std::optional<AlignmentDepthRecord> find_msa(const std::optional<fs::path>& dir,
                                             const std::string& id) {
  if (!dir)
    return std::nullopt;
  for (const char* ext : {".a3m", ".fasta", ".fa", ".aln"}) {
    fs::path p = *dir / (id + ext);
    if (fs::exists(p))
      return read_alignment_depth(p);
  }
  return std::nullopt;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classify proteins as metamorphic or single-fold from conformational ensembles"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "metafold 0.1.0");
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")
      ->capture_default_str();

  // features
  auto* features = app.add_subcommand("features", "Extract the feature table from ensembles");
  std::vector<fs::path> feat_inputs;
  fs::path feat_out;
  PipelineArgs feat_pipe;
  features->add_option("inputs", feat_inputs, "Ensemble directories or multi-model PDB files")
      ->required();
  features->add_option("--out", feat_out, "Feature CSV")->required();
  feat_pipe.add(features);

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Cluster one ensemble and write the cluster table");
  fs::path clu_input, clu_out;
  PipelineArgs clu_pipe;
  cluster->add_option("ensemble", clu_input, "Ensemble directory or multi-model PDB file")
      ->required();
  cluster->add_option("--out", clu_out, "Cluster table")->required();
  clu_pipe.add(cluster);

  // train and cv share their inputs
  fs::path tr_features, tr_out, tr_grid_results;
  std::optional<fs::path> tr_labels;
  std::string tr_grid = "default";
  std::uint64_t tr_seed = 0;
  std::size_t tr_k = 5;
  auto* train = app.add_subcommand("train", "Grid-search CV, then refit the best configuration");
  auto* cv = app.add_subcommand("cv", "Cross-validate the hyperparameter grid");
  fs::path cv_report, cv_roc;
  for (auto* sub : {train, cv}) {
    sub->add_option("--features", tr_features, "Feature CSV")->required();
    sub->add_option("--labels", tr_labels, "id,label CSV (default: label column of --features)");
    sub->add_option("--grid", tr_grid, "'default' or a JSON grid file")->capture_default_str();
    sub->add_option("--seed", tr_seed, "Random seed")->capture_default_str();
    sub->add_option("--k", tr_k, "Number of folds")->check(CLI::Range(2, 1000))
        ->capture_default_str();
    sub->add_option("--grid-results", tr_grid_results, "Per-fold results of every configuration");
  }
  train->add_option("--out", tr_out, "Model file")->required();
  train->add_option("--report", cv_report, "CV report of the chosen configuration");
  cv->add_option("--report", cv_report, "CV report CSV")->required();
  cv->add_option("--roc", cv_roc, "Per-fold ROC points CSV");

  // predict
  auto* predict = app.add_subcommand("predict", "Score a feature table");
  fs::path pr_model, pr_features, pr_out;
  predict->add_option("--model", pr_model, "Model file")->required();
  predict->add_option("--features", pr_features, "Feature CSV")->required();
  predict->add_option("--out", pr_out, "Scores CSV")->required();

  // rank
  auto* rank = app.add_subcommand("rank", "Analyse and rank a directory of ensembles");
  fs::path rk_model, rk_dir, rk_out, rk_failures;
  PipelineArgs rk_pipe;
  rank->add_option("--model", rk_model, "Model file")->required();
  rank->add_option("--ensembles", rk_dir, "Directory of ensembles")->required();
  rank->add_option("--out", rk_out, "Ranking CSV")->required();
  rank->add_option("--failures", rk_failures, "Failures CSV");
  rk_pipe.add(rank);

  // curate
  auto* curate = app.add_subcommand("curate", "Apply the dataset curation filters");
  std::string cu_mode;
  std::vector<fs::path> cu_inputs;
  fs::path cu_out;
  std::optional<fs::path> cu_msa_dir;
  std::string cu_verdict = "metamorphic_candidate";
  CurationThresholds cu_t;
  curate->add_option("--mode", cu_mode, "atlas | codnas | metamorphic | depth")
      ->required()
      ->check(CLI::IsMember({"atlas", "codnas", "metamorphic", "depth"}));
  curate->add_option("inputs", cu_inputs,
                     "atlas: trajectories; codnas/metamorphic: one structure set per protein; "
                     "depth: alignment files")
      ->required();
  curate->add_option("--out", cu_out, "Curation CSV")->required();
  curate->add_option("--msa-dir", cu_msa_dir, "Alignments named <id>.a3m or <id>.fasta");
  curate->add_option("--verdict", cu_verdict, "depth mode: verdict kept by passing alignments")
      ->capture_default_str();
  curate->add_option("--atlas-threshold", cu_t.atlas)->capture_default_str();
  curate->add_option("--codnas-threshold", cu_t.codnas)->capture_default_str();
  curate->add_option("--metamorphic-threshold", cu_t.metamorphic)->capture_default_str();
  curate->add_option("--min-depth", cu_t.min_depth)->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic ensemble");
  SynthesisSpec sy;
  std::size_t sy_modes = 2, sy_per_mode = 50;
  fs::path sy_out;
  synth->add_option("--modes", sy_modes, "Planted modes")->check(CLI::Range(1, 4))
      ->capture_default_str();
  synth->add_option("--per-mode", sy_per_mode, "Members per mode")->check(CLI::Range(1, 100000))
      ->capture_default_str();
  synth->add_option("--length", sy.length, "Residues")->capture_default_str();
  synth->add_option("--sigma", sy.noise_sigma, "Coordinate noise, Angstrom")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth->add_option("--decoys", sy.decoys, "Extra low-confidence members")->capture_default_str();
  synth->add_option("--seed", sy.seed, "Random seed")->capture_default_str();
  std::optional<std::string> sy_id;
  synth->add_option("--id", sy_id, "Protein id (default: output directory name)");
  synth->add_option("--out", sy_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (features->parsed()) {
      std::vector<FeatureVector> rows;
      for (const auto& input : feat_inputs) {
        Ensemble e = load_ensemble(input);
        rows.push_back(analyze_protein(e, feat_pipe.config(threads)).features);
      }
      write_file(feat_out, [&](std::ostream& o) { write_feature_csv(o, rows); });
    } else if (cluster->parsed()) {
      Ensemble e = load_ensemble(clu_input);
      ProteinAnalysis a = analyze_protein(e, clu_pipe.config(threads));
      write_file(clu_out,
                 [&](std::ostream& o) { write_cluster_table(o, e.protein_id(), a.clusters); });
    } else if (train->parsed() || cv->parsed()) {
      Dataset data = load_training(tr_features, tr_labels);
      HyperGrid grid = grid_from_arg(tr_grid);
      GridSearchResult r = grid_search_cv(data, grid, tr_k, tr_seed, threads, train->parsed());
      if (!tr_grid_results.empty())
        write_file(tr_grid_results, [&](std::ostream& o) { write_grid_results_csv(o, r.report); });
      if (!cv_report.empty())
        write_file(cv_report, [&](std::ostream& o) { write_cv_report_csv(o, r.report); });
      if (!cv_roc.empty())
        write_file(cv_roc, [&](std::ostream& o) { write_roc_csv(o, r.report); });
      if (train->parsed())
        write_file(tr_out, [&](std::ostream& o) { save_model(o, r.model); });
    } else if (predict->parsed()) {
      auto min = open_in(pr_model);
      ForestModel model = load_model(min);
      auto fin = open_in(pr_features);
      FeatureTable table = read_feature_csv(fin);
      write_file(pr_out, [&](std::ostream& o) {
        o << "id,probability,metamorphic\n";
        for (const auto& row : table.rows) {
          double p = model.predict_proba(row);
          o << row.protein_id << ',' << format_real(p) << ',' << (p > model.tau ? 1 : 0) << '\n';
        }
      });
    } else if (rank->parsed()) {
      auto min = open_in(rk_model);
      ForestModel model = load_model(min);
      auto sources = list_ensemble_sources(rk_dir);
      RankingResult r = rank_sources(model, sources, rk_pipe.config(threads));
      write_file(rk_out, [&](std::ostream& o) { write_ranking_csv(o, r.entries); });
      if (!rk_failures.empty())
        write_file(rk_failures, [&](std::ostream& o) { write_failures_csv(o, r.failures); });
      for (const auto& f : r.failures)
        std::cerr << "metafold: " << f.message << '\n';
    } else if (curate->parsed()) {
      std::vector<CurationRecord> records;
      for (const auto& input : cu_inputs) {
        if (cu_mode == "depth") {
          records.push_back(
              curate_depth(read_alignment_depth(input), verdict_from_string(cu_verdict), cu_t));
          continue;
        }
        Ensemble e = load_ensemble(input);
        auto msa = find_msa(cu_msa_dir, e.protein_id());
        if (cu_mode == "atlas") {
          records.push_back(curate_atlas(e, msa, cu_t));
        } else if (cu_mode == "codnas") {
          records.push_back(curate_codnas(e.protein_id(), e.members(), msa, cu_t));
        } else {
          if (e.size() != 2)
            throw UsageError(input.string() + ": metamorphic mode needs exactly 2 structures, got " +
                             std::to_string(e.size()));
          records.push_back(curate_metamorphic(e.protein_id(), e[0], e[1], msa, cu_t));
        }
      }
      write_file(cu_out, [&](std::ostream& o) { write_curation_csv(o, records); });
    } else if (synth->parsed()) {
      sy.mode_sizes.assign(sy_modes, sy_per_mode);
      sy.protein_id = sy_id ? *sy_id : fs::absolute(sy_out).lexically_normal().filename().string();
      SyntheticEnsemble s = synthesize_ensemble(sy);
      fs::create_directories(sy_out);
      const auto& members = s.ensemble.members();
      for (std::size_t i = 0; i < members.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "member_%04zu.pdb", i + 1);
        write_file(sy_out / name, [&](std::ostream& o) { write_pdb(o, members[i]); });
      }
      write_file(sy_out / "modes.csv", [&](std::ostream& o) {
        o << "member,mode\n";
        for (std::size_t i = 0; i < s.labels.size(); ++i)
          o << i + 1 << ',' << s.labels[i] << '\n';
      });
    }
  } catch (const UsageError& e) {
    std::cerr << "metafold: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "metafold: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "metafold: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
