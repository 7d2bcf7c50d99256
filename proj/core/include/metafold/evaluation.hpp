#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "metafold/forest.hpp"

namespace metafold {

struct Rates {
  double tpr = 0.0;
  double tnr = 0.0;
  double balanced() const { return 0.5 * (tpr + tnr); }
};

/// Positive prediction is prob > tau, negative is prob <= tau. Throws
/// UndefinedRate unless both classes are present.
Rates classification_rates(std::span<const int> labels, std::span<const double> probs, double tau);
double balanced_accuracy(std::span<const int> labels, std::span<const double> probs, double tau);

/// 0.01, 0.02, ..., 0.99
std::vector<double> threshold_grid();

struct ThresholdChoice {
  double tau = 0.5;
  Rates rates;
};

/// Grid threshold with the best balanced accuracy; ties go to the smallest
/// |TPR - TNR|, then the smallest tau.
ThresholdChoice tune_threshold(std::span<const int> labels, std::span<const double> probs);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // predictions >= threshold count as positive
};

struct RocCurve {
  double auc = 0.0;
  std::vector<RocPoint> points;
};

/// Rank-statistic AUC with midranks for ties, and one ROC point per
/// distinct score (plus the origin).
RocCurve roc_auc(std::span<const int> labels, std::span<const double> probs);

/// Per-class shuffle, then round-robin into k folds. Returns row indices per
/// fold, each sorted.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, std::size_t k,
                                                       std::uint64_t seed);

struct HyperGrid {
  std::vector<std::size_t> n_trees{500};
  std::vector<int> max_depth{5, 10, 15};
  std::vector<std::size_t> min_samples_leaf{6, 8, 10, 12};
  std::vector<double> alpha{1, 2, 4, 6, 8, 10};
  std::vector<double> min_impurity_decrease{0.0, 0.01};
  std::vector<std::size_t> features_per_split{3};

  /// Cartesian product, nested in declaration order (last field fastest).
  std::vector<Hyperparams> expand() const;
};

struct FoldMetrics {
  double auc = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
  double balanced_accuracy = 0.0;
  double tau = 0.5;
  std::vector<RocPoint> roc;
};

struct ConfigResult {
  Hyperparams hyperparams;
  std::vector<FoldMetrics> folds;
  double mean_balanced_accuracy = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation across folds
};

struct CVReport {
  std::vector<FoldMetrics> folds;  // of the chosen configuration
  MetricSummary auc, tpr, tnr, balanced_accuracy, tau;
  Hyperparams chosen;
  std::size_t chosen_index = 0;
  std::vector<ConfigResult> configs;  // every configuration, grid order
};

struct GridSearchResult {
  CVReport report;
  ForestModel model;  // refit on all rows with the chosen configuration
};

MetricSummary summarize(std::span<const double> values);

/// k-fold CV of every grid configuration on the same stratified folds; the
/// configuration with the highest mean validation balanced accuracy wins
/// (first in grid order on ties) and is refit on the full data.
GridSearchResult grid_search_cv(const Dataset& data, const HyperGrid& grid, std::size_t k,
                                std::uint64_t seed, unsigned threads = 1, bool refit = true);

void write_cv_report_csv(std::ostream& out, const CVReport& report);
void write_roc_csv(std::ostream& out, const CVReport& report);
/// One row per (configuration, fold), enough to re-score the selection.
void write_grid_results_csv(std::ostream& out, const CVReport& report);
std::vector<ConfigResult> read_grid_results_csv(std::istream& in);

} // namespace metafold
