#include "metafold/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "metafold/error.hpp"
#include "metafold/parallel.hpp"

namespace metafold {

namespace {

void require_both_classes(std::span<const int> labels, std::span<const double> probs) {
  if (labels.size() != probs.size())
    fail(ErrorKind::InvalidArgument, "labels and probabilities differ in length");
  std::size_t pos = 0, neg = 0;
  for (int y : labels)
    (y == 1 ? pos : neg)++;
  if (pos == 0 || neg == 0)
    fail(ErrorKind::UndefinedRate, "rates need both classes present");
}

std::string fmt(double x) {
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

} // namespace

Rates classification_rates(std::span<const int> labels, std::span<const double> probs,
                           double tau) {
  require_both_classes(labels, probs);
  std::size_t tp = 0, tn = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++pos;
      if (probs[i] > tau)
        ++tp;
    } else {
      ++neg;
      if (probs[i] <= tau)
        ++tn;
    }
  }
  return {static_cast<double>(tp) / static_cast<double>(pos),
          static_cast<double>(tn) / static_cast<double>(neg)};
}

double balanced_accuracy(std::span<const int> labels, std::span<const double> probs, double tau) {
  return classification_rates(labels, probs, tau).balanced();
}

std::vector<double> threshold_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 99; ++i)
    grid.push_back(i / 100.0);
  return grid;
}

ThresholdChoice tune_threshold(std::span<const int> labels, std::span<const double> probs) {
  require_both_classes(labels, probs);
  ThresholdChoice best;
  bool first = true;
  for (double tau : threshold_grid()) {
    Rates r = classification_rates(labels, probs, tau);
    if (first) {
      best = {tau, r};
      first = false;
      continue;
    }
    double ba = r.balanced(), best_ba = best.rates.balanced();
    if (ba > best_ba ||
        (ba == best_ba && std::abs(r.tpr - r.tnr) < std::abs(best.rates.tpr - best.rates.tnr)))
      best = {tau, r};
  }
  return best;
}

RocCurve roc_auc(std::span<const int> labels, std::span<const double> probs) {
  require_both_classes(labels, probs);
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return probs[a] < probs[b];
  });

  double pos = 0.0, neg = 0.0, pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && probs[order[j]] == probs[order[i]])
      ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == 1) {
        pos_rank_sum += midrank;
        pos += 1.0;
      } else {
        neg += 1.0;
      }
    i = j;
  }
  RocCurve curve;
  curve.auc = (pos_rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);

  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = n; i > 0;) {
    std::size_t j = i;
    const double score = probs[order[i - 1]];
    while (j > 0 && probs[order[j - 1]] == score) {
      (labels[order[j - 1]] == 1 ? tp : fp) += 1.0;
      --j;
    }
    curve.points.push_back({fp / neg, tp / pos, score});
    i = j;
  }
  return curve;
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, std::size_t k,
                                                       std::uint64_t seed) {
  if (k < 2)
    fail(ErrorKind::InvalidArgument, "cross-validation needs k >= 2");
  std::vector<std::vector<std::size_t>> folds(k);
  Rng rng(seed);
  std::size_t next_fold = 0;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls)
        rows.push_back(i);
    if (rows.size() < k)
      fail(ErrorKind::Stratification, "class " + std::to_string(cls) + " has " +
                                          std::to_string(rows.size()) + " rows, fewer than k=" +
                                          std::to_string(k));
    for (std::size_t i = rows.size(); i > 1; --i)
      std::swap(rows[i - 1], rows[static_cast<std::size_t>(rng.below(i))]);
    for (std::size_t r : rows) {
      folds[next_fold].push_back(r);
      next_fold = (next_fold + 1) % k;
    }
  }
  for (auto& f : folds)
    std::sort(f.begin(), f.end());
  return folds;
}

std::vector<Hyperparams> HyperGrid::expand() const {
  std::vector<Hyperparams> out;
  for (std::size_t trees : n_trees)
    for (int depth : max_depth)
      for (std::size_t leaf : min_samples_leaf)
        for (double a : alpha)
          for (double mid : min_impurity_decrease)
            for (std::size_t mtry : features_per_split) {
              Hyperparams hp;
              hp.n_trees = trees;
              hp.max_depth = depth;
              hp.min_samples_leaf = leaf;
              hp.alpha = a;
              hp.min_impurity_decrease = mid;
              hp.features_per_split = mtry;
              out.push_back(hp);
            }
  return out;
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty())
    return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values)
      ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

GridSearchResult grid_search_cv(const Dataset& data, const HyperGrid& grid, std::size_t k,
                                std::uint64_t seed, unsigned threads, bool refit) {
  const std::vector<Hyperparams> configs = grid.expand();
  if (configs.empty())
    fail(ErrorKind::InvalidArgument, "hyperparameter grid is empty");
  const auto folds = stratified_kfold(data.labels(), k, seed);

  std::vector<Dataset> train(k), valid(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> rows;
    for (std::size_t g = 0; g < k; ++g)
      if (g != f)
        rows.insert(rows.end(), folds[g].begin(), folds[g].end());
    std::sort(rows.begin(), rows.end());
    train[f] = data.subset(rows);
    valid[f] = data.subset(folds[f]);
  }

  std::vector<ConfigResult> results(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    results[c].hyperparams = configs[c];
    results[c].hyperparams.seed = seed;
    results[c].folds.resize(k);
  }
  parallel_for(configs.size() * k, threads, [&](std::size_t job) {
    const std::size_t c = job / k, f = job % k;
    Hyperparams hp = configs[c];
    hp.seed = splitmix64(seed + 1 + f);
    ForestModel model = train_forest(train[f], hp, 1);
    std::vector<double> probs;
    for (std::size_t r = 0; r < valid[f].rows(); ++r)
      probs.push_back(model.predict_proba(valid[f].row(r)));
    const auto& labels = valid[f].labels();
    FoldMetrics m;
    RocCurve roc = roc_auc(labels, probs);
    Rates rates = classification_rates(labels, probs, model.tau);
    m.auc = roc.auc;
    m.roc = std::move(roc.points);
    m.tpr = rates.tpr;
    m.tnr = rates.tnr;
    m.balanced_accuracy = rates.balanced();
    m.tau = model.tau;
    results[c].folds[f] = std::move(m);
  });

  std::size_t best = 0;
  for (std::size_t c = 0; c < results.size(); ++c) {
    double sum = 0.0;
    for (const auto& m : results[c].folds)
      sum += m.balanced_accuracy;
    results[c].mean_balanced_accuracy = sum / static_cast<double>(k);
    if (results[c].mean_balanced_accuracy > results[best].mean_balanced_accuracy)
      best = c;
  }

  GridSearchResult out;
  CVReport& rep = out.report;
  rep.chosen_index = best;
  rep.chosen = results[best].hyperparams;
  rep.folds = results[best].folds;
  auto column = [&](auto member) {
    std::vector<double> v;
    for (const auto& m : rep.folds)
      v.push_back(m.*member);
    return summarize(v);
  };
  rep.auc = column(&FoldMetrics::auc);
  rep.tpr = column(&FoldMetrics::tpr);
  rep.tnr = column(&FoldMetrics::tnr);
  rep.balanced_accuracy = column(&FoldMetrics::balanced_accuracy);
  rep.tau = column(&FoldMetrics::tau);
  rep.configs = std::move(results);
  if (refit)
    out.model = train_forest(data, rep.chosen, threads);
  return out;
}

namespace {

void write_hyperparams_comment(std::ostream& out, const Hyperparams& hp) {
  out << "# chosen n_trees=" << hp.n_trees << " max_depth=" << hp.max_depth
      << " min_samples_leaf=" << hp.min_samples_leaf
      << " min_impurity_decrease=" << fmt(hp.min_impurity_decrease) << " alpha=" << fmt(hp.alpha)
      << " features_per_split=" << hp.features_per_split << " seed=" << hp.seed << '\n';
}

} // namespace

void write_cv_report_csv(std::ostream& out, const CVReport& r) {
  write_hyperparams_comment(out, r.chosen);
  out << "fold,auc,tpr,tnr,balanced_accuracy,tau\n";
  for (std::size_t f = 0; f < r.folds.size(); ++f) {
    const auto& m = r.folds[f];
    out << f + 1 << ',' << fmt(m.auc) << ',' << fmt(m.tpr) << ',' << fmt(m.tnr) << ','
        << fmt(m.balanced_accuracy) << ',' << fmt(m.tau) << '\n';
  }
  out << "mean," << fmt(r.auc.mean) << ',' << fmt(r.tpr.mean) << ',' << fmt(r.tnr.mean) << ','
      << fmt(r.balanced_accuracy.mean) << ',' << fmt(r.tau.mean) << '\n';
  out << "sd," << fmt(r.auc.sd) << ',' << fmt(r.tpr.sd) << ',' << fmt(r.tnr.sd) << ','
      << fmt(r.balanced_accuracy.sd) << ',' << fmt(r.tau.sd) << '\n';
}

void write_roc_csv(std::ostream& out, const CVReport& r) {
  out << "fold,fpr,tpr,threshold\n";
  for (std::size_t f = 0; f < r.folds.size(); ++f)
    for (const auto& p : r.folds[f].roc)
      out << f + 1 << ',' << fmt(p.fpr) << ',' << fmt(p.tpr) << ',' << fmt(p.threshold) << '\n';
}

void write_grid_results_csv(std::ostream& out, const CVReport& r) {
  out << "config,n_trees,max_depth,min_samples_leaf,min_impurity_decrease,alpha,"
         "features_per_split,fold,balanced_accuracy,auc,tpr,tnr,tau\n";
  for (std::size_t c = 0; c < r.configs.size(); ++c) {
    const auto& cfg = r.configs[c];
    const auto& hp = cfg.hyperparams;
    for (std::size_t f = 0; f < cfg.folds.size(); ++f) {
      const auto& m = cfg.folds[f];
      out << c + 1 << ',' << hp.n_trees << ',' << hp.max_depth << ',' << hp.min_samples_leaf
          << ',' << fmt(hp.min_impurity_decrease) << ',' << fmt(hp.alpha) << ','
          << hp.features_per_split << ',' << f + 1 << ',' << fmt(m.balanced_accuracy) << ','
          << fmt(m.auc) << ',' << fmt(m.tpr) << ',' << fmt(m.tnr) << ',' << fmt(m.tau) << '\n';
    }
  }
}

std::vector<ConfigResult> read_grid_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("config,"))
    fail(ErrorKind::Parse, "grid results: missing header");
  std::vector<ConfigResult> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');)
      f.push_back(cell);
    if (f.size() != 13)
      fail(ErrorKind::Parse, "grid results line " + std::to_string(line_no) + ": expected 13 fields");
    try {
      std::size_t c = std::stoul(f[0]);
      if (c == 0)
        throw std::invalid_argument("config index");
      if (out.size() < c)
        out.resize(c);
      ConfigResult& cfg = out[c - 1];
      cfg.hyperparams.n_trees = std::stoul(f[1]);
      cfg.hyperparams.max_depth = std::stoi(f[2]);
      cfg.hyperparams.min_samples_leaf = std::stoul(f[3]);
      cfg.hyperparams.min_impurity_decrease = std::stod(f[4]);
      cfg.hyperparams.alpha = std::stod(f[5]);
      cfg.hyperparams.features_per_split = std::stoul(f[6]);
      FoldMetrics m;
      m.balanced_accuracy = std::stod(f[8]);
      m.auc = std::stod(f[9]);
      m.tpr = std::stod(f[10]);
      m.tnr = std::stod(f[11]);
      m.tau = std::stod(f[12]);
      cfg.folds.push_back(m);
    } catch (const std::logic_error&) {
      fail(ErrorKind::Parse, "grid results line " + std::to_string(line_no) + ": malformed number");
    }
  }
  for (auto& cfg : out) {
    double sum = 0.0;
    for (const auto& m : cfg.folds)
      sum += m.balanced_accuracy;
    cfg.mean_balanced_accuracy = cfg.folds.empty() ? 0.0 : sum / static_cast<double>(cfg.folds.size());
  }
  return out;
}

} // namespace metafold
