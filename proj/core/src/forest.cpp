#include "metafold/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "metafold/error.hpp"
#include "metafold/evaluation.hpp"
#include "metafold/parallel.hpp"

namespace metafold {

namespace {

// splits must improve impurity by more than rounding noise
constexpr double kMinGain = 1e-12;

// W * Gini for weighted class counts
double weighted_impurity(double w0, double w1) {
  double w = w0 + w1;
  return w > 0.0 ? 2.0 * w0 * w1 / w : 0.0;
}

struct Tally {
  double w0 = 0.0, w1 = 0.0;
  std::size_t n = 0;

  void add(int label, double weight) {
    (label == 1 ? w1 : w0) += weight;
    ++n;
  }
  Tally operator+(const Tally& o) const { return {w0 + o.w0, w1 + o.w1, n + o.n}; }
  Tally operator-(const Tally& o) const { return {w0 - o.w0, w1 - o.w1, n - o.n}; }
};

struct Split {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  bool missing_left = false;
  double decrease = 0.0;
};

class TreeGrower {
public:
  TreeGrower(const Dataset& data, const ClassWeights& weights, const Hyperparams& hp, Rng& rng,
             std::vector<NodeTrace>* trace)
      : data_(data), weights_(weights), hp_(hp), rng_(rng), trace_(trace),
        importance_(data.features(), 0.0) {}

  GrownTree run() {
    const std::size_t n = data_.rows();
    std::vector<std::size_t> in_bag(n, 0);
    std::vector<std::size_t> sample(n);
    for (std::size_t i = 0; i < n; ++i) {
      sample[i] = static_cast<std::size_t>(rng_.below(n));
      ++in_bag[sample[i]];
    }
    std::sort(sample.begin(), sample.end());
    root_weight_ = 0.0;
    for (std::size_t r : sample)
      root_weight_ += weights_.of(data_.label(r));
    grow(sample, 0);
    return {std::move(tree_), std::move(importance_), std::move(in_bag)};
  }

private:
  int grow(const std::vector<std::size_t>& samples, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    Tally total;
    for (std::size_t r : samples)
      total.add(data_.label(r), weights_.of(data_.label(r)));
    tree_.nodes[id].w0 = total.w0;
    tree_.nodes[id].w1 = total.w1;

    const bool splittable = depth < hp_.max_depth && total.n >= 2 * hp_.min_samples_leaf &&
                            total.w0 > 0.0 && total.w1 > 0.0;
    std::vector<std::size_t> features;
    Split best;
    if (splittable) {
      features = draw_features();
      best = best_split(samples, features, total);
    }
    const bool do_split = best.valid && best.decrease > kMinGain &&
                          best.decrease >= hp_.min_impurity_decrease;
    if (trace_)
      trace_->push_back({id, depth, samples, features, do_split, do_split ? best.decrease : 0.0});
    if (!do_split)
      return id;

    std::vector<std::size_t> left, right;
    for (std::size_t r : samples) {
      double x = data_.value(r, static_cast<std::size_t>(best.feature));
      bool go_left = std::isnan(x) ? best.missing_left : x <= best.threshold;
      (go_left ? left : right).push_back(r);
    }
    importance_[static_cast<std::size_t>(best.feature)] += best.decrease;
    tree_.nodes[id].feature = best.feature;
    tree_.nodes[id].threshold = best.threshold;
    tree_.nodes[id].missing_left = best.missing_left;
    int l = grow(left, depth + 1);
    int r = grow(right, depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  std::vector<std::size_t> draw_features() {
    const std::size_t p = data_.features();
    std::vector<std::size_t> all(p);
    std::iota(all.begin(), all.end(), 0);
    const std::size_t m = std::min(std::max<std::size_t>(hp_.features_per_split, 1), p);
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng_.below(p - i));
      std::swap(all[i], all[j]);
    }
    all.resize(m);
    return all;
  }

  void consider(Split& best, const Tally& parent, const Tally& left, const Tally& right,
                int feature, double threshold, bool missing_left) const {
    if (left.n < hp_.min_samples_leaf || right.n < hp_.min_samples_leaf)
      return;
    double dec = (weighted_impurity(parent.w0, parent.w1) - weighted_impurity(left.w0, left.w1) -
                  weighted_impurity(right.w0, right.w1)) /
                 root_weight_;
    if (!best.valid || dec > best.decrease)
      best = {true, feature, threshold, missing_left, dec};
  }

  Split best_split(const std::vector<std::size_t>& samples,
                   const std::vector<std::size_t>& features, const Tally& total) const {
    Split best;
    std::vector<std::pair<double, std::size_t>> present;
    present.reserve(samples.size());
    for (std::size_t f : features) {
      const int feature = static_cast<int>(f);
      present.clear();
      Tally missing;
      for (std::size_t r : samples) {
        double x = data_.value(r, f);
        if (std::isnan(x))
          missing.add(data_.label(r), weights_.of(data_.label(r)));
        else
          present.emplace_back(x, r);
      }
      std::sort(present.begin(), present.end());
      const Tally present_total = total - missing;

      Tally left;
      for (std::size_t k = 0; k + 1 < present.size(); ++k) {
        int y = data_.label(present[k].second);
        left.add(y, weights_.of(y));
        const double lo = present[k].first, hi = present[k + 1].first;
        if (!(lo < hi))
          continue;
        double threshold = lo + (hi - lo) / 2.0;
        if (!(threshold < hi))
          threshold = lo;
        const Tally right = present_total - left;
        if (missing.n > 0) {
          consider(best, total, left + missing, right, feature, threshold, true);
          consider(best, total, left, right + missing, feature, threshold, false);
        } else {
          consider(best, total, left, right, feature, threshold, left.n >= right.n);
        }
      }
      if (missing.n > 0 && present_total.n > 0)
        consider(best, total, present_total, missing, feature,
                 std::numeric_limits<double>::infinity(), false);
    }
    return best;
  }

  const Dataset& data_;
  ClassWeights weights_;
  Hyperparams hp_;
  Rng& rng_;
  std::vector<NodeTrace>* trace_;
  Tree tree_;
  std::vector<double> importance_;
  double root_weight_ = 1.0;
};

std::uint64_t tree_seed(std::uint64_t seed, std::size_t tree) {
  return splitmix64(seed ^ splitmix64(0x5eed0000ULL + tree));
}

} // namespace

Dataset::Dataset(std::size_t n_features, std::vector<double> values, std::vector<int> labels)
    : n_features_(n_features), values_(std::move(values)), labels_(std::move(labels)) {
  if (values_.size() != n_features_ * labels_.size())
    fail(ErrorKind::InvalidArgument, "dataset shape mismatch");
  for (int y : labels_)
    if (y != 0 && y != 1)
      fail(ErrorKind::InvalidArgument, "labels must be 0 or 1");
}

Dataset Dataset::from_examples(std::span<const LabeledExample> examples) {
  std::vector<double> values;
  std::vector<int> labels;
  values.reserve(examples.size() * kFeatureCount);
  for (const auto& e : examples) {
    auto v = e.features.values();
    values.insert(values.end(), v.begin(), v.end());
    labels.push_back(e.label);
  }
  return Dataset(kFeatureCount, std::move(values), std::move(labels));
}

std::size_t Dataset::count(int label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<double> values;
  std::vector<int> labels;
  values.reserve(rows.size() * n_features_);
  for (std::size_t r : rows) {
    auto x = row(r);
    values.insert(values.end(), x.begin(), x.end());
    labels.push_back(labels_[r]);
  }
  return Dataset(n_features_, std::move(values), std::move(labels));
}

ClassWeights class_weights(std::size_t n_single, std::size_t n_meta, double alpha) {
  if (n_single == 0 || n_meta == 0)
    fail(ErrorKind::DegenerateTraining, "class weights need both classes present");
  if (!(alpha > 0.0))
    fail(ErrorKind::InvalidArgument, "class-weight alpha must be positive");
  const double total = static_cast<double>(n_single + n_meta);
  return {total / (2.0 * (1.0 + alpha) * static_cast<double>(n_single)),
          alpha * total / (2.0 * (1.0 + alpha) * static_cast<double>(n_meta))};
}

double gini(double w0, double w1) {
  double w = w0 + w1;
  return w > 0.0 ? 2.0 * w0 * w1 / (w * w) : 0.0;
}

const TreeNode& Tree::leaf_for(std::span<const double> x) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    double v = x[static_cast<std::size_t>(node->feature)];
    bool go_left = std::isnan(v) ? node->missing_left : v <= node->threshold;
    node = &nodes[static_cast<std::size_t>(go_left ? node->left : node->right)];
  }
  return *node;
}

GrownTree grow_tree(const Dataset& data, const ClassWeights& weights, const Hyperparams& hp,
                    Rng& rng, std::vector<NodeTrace>* trace) {
  if (data.rows() == 0)
    fail(ErrorKind::DegenerateTraining, "cannot grow a tree on no data");
  return TreeGrower(data, weights, hp, rng, trace).run();
}

double ForestModel::predict_proba(std::span<const double> x) const {
  double sum = 0.0;
  for (const Tree& t : trees)
    sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

double ForestModel::predict_proba(const FeatureVector& v) const {
  auto x = v.values();
  return predict_proba(std::span<const double>(x));
}

ForestModel train_forest(const Dataset& data, const Hyperparams& hp, unsigned threads,
                         TrainingDiagnostics* diagnostics) {
  const std::size_t n0 = data.count(0), n1 = data.count(1);
  if (n0 == 0 || n1 == 0)
    fail(ErrorKind::DegenerateTraining, "training data must contain both classes");
  if (hp.n_trees == 0)
    fail(ErrorKind::InvalidArgument, "a forest needs at least one tree");

  ForestModel model;
  model.hyperparams = hp;
  model.class_weights = class_weights(n0, n1, hp.alpha);
  if (data.features() == kFeatureCount)
    model.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
  else
    for (std::size_t f = 0; f < data.features(); ++f)
      model.feature_names.push_back("x" + std::to_string(f));

  std::vector<GrownTree> grown(hp.n_trees);
  parallel_for(hp.n_trees, threads, [&](std::size_t b) {
    Rng rng(tree_seed(hp.seed, b));
    grown[b] = grow_tree(data, model.class_weights, hp, rng);
  });

  const std::size_t p = data.features();
  model.importance.assign(p, 0.0);
  std::vector<double> oob_sum(data.rows(), 0.0);
  std::vector<std::size_t> oob_count(data.rows(), 0);
  for (GrownTree& g : grown) {
    double total = std::accumulate(g.importance.begin(), g.importance.end(), 0.0);
    if (total > 0.0)
      for (std::size_t f = 0; f < p; ++f)
        model.importance[f] += g.importance[f] / total;
    for (std::size_t r = 0; r < data.rows(); ++r)
      if (g.in_bag[r] == 0) {
        oob_sum[r] += g.tree.predict(data.row(r));
        ++oob_count[r];
      }
    model.trees.push_back(std::move(g.tree));
  }
  double total = std::accumulate(model.importance.begin(), model.importance.end(), 0.0);
  for (double& v : model.importance)
    v = total > 0.0 ? v / total : 1.0 / static_cast<double>(p);

  std::vector<int> labels;
  std::vector<double> probs;
  std::vector<double> oob(data.rows(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < data.rows(); ++r)
    if (oob_count[r] > 0) {
      oob[r] = oob_sum[r] / static_cast<double>(oob_count[r]);
      labels.push_back(data.label(r));
      probs.push_back(oob[r]);
    }
  const bool both = std::count(labels.begin(), labels.end(), 1) > 0 &&
                    std::count(labels.begin(), labels.end(), 0) > 0;
  model.tau = both ? tune_threshold(labels, probs).tau : 0.5;
  if (diagnostics)
    diagnostics->oob_probability = std::move(oob);
  return model;
}

} // namespace metafold
