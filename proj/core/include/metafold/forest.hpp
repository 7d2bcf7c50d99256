#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metafold/features.hpp"
#include "metafold/random.hpp"

namespace metafold {

/// Row-major design matrix; NaN marks a missing value.
class Dataset {
public:
  Dataset() = default;
  Dataset(std::size_t n_features, std::vector<double> values, std::vector<int> labels);
  static Dataset from_examples(std::span<const LabeledExample> examples);

  std::size_t rows() const { return labels_.size(); }
  std::size_t features() const { return n_features_; }
  double value(std::size_t row, std::size_t feature) const {
    return values_[row * n_features_ + feature];
  }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * n_features_, n_features_};
  }
  int label(std::size_t r) const { return labels_[r]; }
  const std::vector<int>& labels() const { return labels_; }
  std::size_t count(int label) const;

  Dataset subset(std::span<const std::size_t> rows) const;

private:
  std::size_t n_features_ = 0;
  std::vector<double> values_;
  std::vector<int> labels_;
};

struct ClassWeights {
  double single_fold = 0.5;
  double metamorphic = 0.5;
  double of(int label) const { return label == 1 ? metamorphic : single_fold; }
};

/// (n / (2 (1 + alpha) n_single), alpha n / (2 (1 + alpha) n_meta)).
ClassWeights class_weights(std::size_t n_single, std::size_t n_meta, double alpha);

struct Hyperparams {
  std::size_t n_trees = 500;
  int max_depth = 10;
  std::size_t min_samples_leaf = 6;
  double min_impurity_decrease = 0.0;
  double alpha = 1.0;
  std::size_t features_per_split = 3;
  std::uint64_t seed = 0;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Flat binary tree. Internal nodes send x <= threshold left; a missing
/// value follows `missing_left`. A threshold of +inf is the pure
/// missing-versus-present split.
struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  bool missing_left = false;
  int left = -1;
  int right = -1;
  double w0 = 0.0;  // class-weighted counts reaching the node
  double w1 = 0.0;

  bool is_leaf() const { return feature < 0; }
  double probability() const { return w0 + w1 > 0.0 ? w1 / (w0 + w1) : 0.0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  const TreeNode& leaf_for(std::span<const double> x) const;
  double predict(std::span<const double> x) const { return leaf_for(x).probability(); }
};

/// Record of one node during growth, for auditing split choices.
struct NodeTrace {
  int node = 0;
  int depth = 0;
  std::vector<std::size_t> samples;   // dataset rows, repeated per bootstrap draw
  std::vector<std::size_t> features;  // candidate features drawn for this node
  bool split = false;
  double decrease = 0.0;              // of the chosen split, if any
};

struct GrownTree {
  Tree tree;
  std::vector<double> importance;     // impurity decrease per feature
  std::vector<std::size_t> in_bag;    // bootstrap multiplicity per row
};

/// Weighted Gini of a (w0, w1) node.
double gini(double w0, double w1);

/// CART growth on a bootstrap sample with class-weighted Gini and MIA
/// handling of missing values. The split decrease is
/// (W G - W_l G_l - W_r G_r) / W_root in weighted counts.
GrownTree grow_tree(const Dataset& data, const ClassWeights& weights, const Hyperparams& hp,
                    Rng& rng, std::vector<NodeTrace>* trace = nullptr);

struct ForestModel {
  std::vector<Tree> trees;
  Hyperparams hyperparams;
  ClassWeights class_weights;
  double tau = 0.5;
  std::vector<std::string> feature_names;
  std::vector<double> importance;  // sums to 1

  /// Mean of the per-tree leaf probabilities.
  double predict_proba(std::span<const double> x) const;
  double predict_proba(const FeatureVector& v) const;
  bool predict(std::span<const double> x) const { return predict_proba(x) > tau; }
};

struct TrainingDiagnostics {
  std::vector<double> oob_probability;  // NaN for rows never out of bag
};

/// Grows hp.n_trees trees from per-tree sub-streams of hp.seed, normalises
/// mean-decrease-in-impurity importance and tunes tau on out-of-bag
/// probabilities. Throws DegenerateTraining if a class is absent.
ForestModel train_forest(const Dataset& data, const Hyperparams& hp, unsigned threads = 1,
                         TrainingDiagnostics* diagnostics = nullptr);

} // namespace metafold
