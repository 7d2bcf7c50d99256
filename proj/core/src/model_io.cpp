#include "metafold/model_io.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "metafold/error.hpp"

namespace metafold {

using nlohmann::json;

namespace {

json node_to_json(const Tree& tree, int index) {
  const TreeNode& n = tree.nodes[static_cast<std::size_t>(index)];
  if (n.is_leaf())
    return json{{"leaf", {{"w0", n.w0}, {"w1", n.w1}}}};
  json j;
  j["feature"] = n.feature;
  if (std::isinf(n.threshold))
    j["threshold"] = "inf";
  else
    j["threshold"] = n.threshold;
  j["missing"] = n.missing_left ? "left" : "right";
  j["counts"] = {{"w0", n.w0}, {"w1", n.w1}};
  j["left"] = node_to_json(tree, n.left);
  j["right"] = node_to_json(tree, n.right);
  return j;
}

int node_from_json(const json& j, Tree& tree, int n_features) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("leaf")) {
    tree.nodes[id].w0 = j.at("leaf").at("w0").get<double>();
    tree.nodes[id].w1 = j.at("leaf").at("w1").get<double>();
    return id;
  }
  TreeNode n;
  n.feature = j.at("feature").get<int>();
  if (n.feature < 0 || n.feature >= n_features)
    fail(ErrorKind::Parse, "model: feature index out of range");
  const json& t = j.at("threshold");
  n.threshold = t.is_string() ? std::numeric_limits<double>::infinity() : t.get<double>();
  const std::string miss = j.at("missing").get<std::string>();
  if (miss != "left" && miss != "right")
    fail(ErrorKind::Parse, "model: missing branch must be left or right");
  n.missing_left = miss == "left";
  n.w0 = j.at("counts").at("w0").get<double>();
  n.w1 = j.at("counts").at("w1").get<double>();
  int l = node_from_json(j.at("left"), tree, n_features);
  int r = node_from_json(j.at("right"), tree, n_features);
  n.left = l;
  n.right = r;
  tree.nodes[id] = n;
  return id;
}

} // namespace

void save_model(std::ostream& out, const ForestModel& m) {
  const Hyperparams& hp = m.hyperparams;
  json j;
  j["format"] = "metafold-forest";
  j["version"] = kModelFormatVersion;
  j["hyperparams"] = {{"n_trees", hp.n_trees},
                      {"max_depth", hp.max_depth},
                      {"min_samples_leaf", hp.min_samples_leaf},
                      {"min_impurity_decrease", hp.min_impurity_decrease},
                      {"alpha", hp.alpha},
                      {"features_per_split", hp.features_per_split},
                      {"seed", hp.seed}};
  j["class_weights"] = {{"single_fold", m.class_weights.single_fold},
                        {"metamorphic", m.class_weights.metamorphic}};
  j["tau"] = m.tau;
  j["feature_names"] = m.feature_names;
  j["importance"] = m.importance;
  json trees = json::array();
  for (const Tree& t : m.trees)
    trees.push_back(node_to_json(t, 0));
  j["trees"] = std::move(trees);
  out << j.dump(1) << '\n';
}

ForestModel load_model(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("model: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "metafold-forest")
      fail(ErrorKind::Parse, "model: not a metafold forest document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      fail(ErrorKind::Parse, "model: unsupported version");
    ForestModel m;
    const json& hp = j.at("hyperparams");
    m.hyperparams.n_trees = hp.at("n_trees").get<std::size_t>();
    m.hyperparams.max_depth = hp.at("max_depth").get<int>();
    m.hyperparams.min_samples_leaf = hp.at("min_samples_leaf").get<std::size_t>();
    m.hyperparams.min_impurity_decrease = hp.at("min_impurity_decrease").get<double>();
    m.hyperparams.alpha = hp.at("alpha").get<double>();
    m.hyperparams.features_per_split = hp.at("features_per_split").get<std::size_t>();
    m.hyperparams.seed = hp.at("seed").get<std::uint64_t>();
    m.class_weights.single_fold = j.at("class_weights").at("single_fold").get<double>();
    m.class_weights.metamorphic = j.at("class_weights").at("metamorphic").get<double>();
    m.tau = j.at("tau").get<double>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.importance = j.at("importance").get<std::vector<double>>();
    const int p = static_cast<int>(m.feature_names.size());
    for (const json& t : j.at("trees")) {
      Tree tree;
      node_from_json(t, tree, p);
      m.trees.push_back(std::move(tree));
    }
    if (m.trees.empty())
      fail(ErrorKind::Parse, "model: no trees");
    if (!(m.tau > 0.0 && m.tau < 1.0))
      fail(ErrorKind::Parse, "model: tau outside (0, 1)");
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("model: ") + e.what());
  }
}

HyperGrid load_grid(std::istream& in) {
  json j;
  try {
    in >> j;
    if (!j.is_object())
      fail(ErrorKind::Parse, "grid: expected a JSON object");
    HyperGrid g;
    for (const auto& [key, value] : j.items()) {
      if (!value.is_array() || value.empty())
        fail(ErrorKind::Parse, "grid: '" + key + "' must be a non-empty list");
      if (key == "n_trees")
        g.n_trees = value.get<std::vector<std::size_t>>();
      else if (key == "max_depth")
        g.max_depth = value.get<std::vector<int>>();
      else if (key == "min_samples_leaf")
        g.min_samples_leaf = value.get<std::vector<std::size_t>>();
      else if (key == "alpha")
        g.alpha = value.get<std::vector<double>>();
      else if (key == "min_impurity_decrease")
        g.min_impurity_decrease = value.get<std::vector<double>>();
      else if (key == "features_per_split")
        g.features_per_split = value.get<std::vector<std::size_t>>();
      else
        fail(ErrorKind::Parse, "grid: unknown key '" + key + "'");
    }
    return g;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("grid: ") + e.what());
  }
}

} // namespace metafold
