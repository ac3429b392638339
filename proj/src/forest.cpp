#include "entrofix/forest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "entrofix/errors.hpp"

namespace entrofix {

namespace {

constexpr const char* kFormat = "stability-forest";
constexpr int kVersion = 1;

double label_entropy(std::int64_t c0, std::int64_t c1) {
  const std::int64_t n = c0 + c1;
  if (n == 0) return 0.0;
  double h = 0.0;
  for (const std::int64_t c : {c0, c1}) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

OnlineForest::OnlineForest(ForestParams params) : params_(params), rng_(params.seed) {
  if (params_.trees < 1) throw std::invalid_argument("forest needs at least one tree");
  if (params_.feature_subsample < 1 || params_.feature_subsample > 4)
    throw std::invalid_argument("feature_subsample must be in [1,4]");
  trees_.resize(static_cast<size_t>(params_.trees));
  for (Tree& tree : trees_) {
    std::array<int, 4> dims = {0, 1, 2, 3};
    for (int i = 3; i > 0; --i)
      std::swap(dims[i], dims[rng_() % static_cast<std::uint64_t>(i + 1)]);
    tree.features.assign(dims.begin(), dims.begin() + params_.feature_subsample);
    std::sort(tree.features.begin(), tree.features.end());
    tree.nodes.emplace_back();
  }
}

void OnlineForest::update(const FeatureVector& x, int y) {
  if (y != 0 && y != 1) throw std::invalid_argument("label must be 0 or 1");
  const std::array<double, 4> v = x.as_array();
  for (const double d : v)
    if (!std::isfinite(d)) throw std::invalid_argument("features must be finite");
  ++samples_seen_;
  for (Tree& tree : trees_) update_tree(tree, v, y);
}

void OnlineForest::update_tree(Tree& tree, const std::array<double, 4>& x, int y) {
  int index = 0;
  int depth = 0;
  while (tree.nodes[index].feature >= 0) {
    const Node& node = tree.nodes[index];
    index = x[node.feature] < node.threshold ? node.left : node.right;
    ++depth;
  }
  Node& leaf = tree.nodes[index];
  ++leaf.counts[y];
  ++leaf.seen;
  if (static_cast<int>(leaf.reservoir.size()) < params_.reservoir_capacity) {
    leaf.reservoir.emplace_back(x, y);
  } else {
    const std::uint64_t j = rng_() % static_cast<std::uint64_t>(leaf.seen);
    if (j < static_cast<std::uint64_t>(params_.reservoir_capacity))
      leaf.reservoir[j] = {x, y};
  }
  if (depth < params_.max_depth && leaf.seen >= params_.split_trigger &&
      leaf.counts[0] > 0 && leaf.counts[1] > 0)
    try_split(tree, index);
}

void OnlineForest::try_split(Tree& tree, int node_index) {
  const std::vector<std::pair<std::array<double, 4>, int>> samples =
      tree.nodes[node_index].reservoir;
  const int n = static_cast<int>(samples.size());
  if (n < 2) return;
  std::int64_t total0 = 0, total1 = 0;
  for (const auto& [x, y] : samples) (y == 0 ? total0 : total1)++;
  const double parent = label_entropy(total0, total1);
  if (parent <= 0.0) return;

  int best_feature = -1;
  double best_threshold = 0.0;
  double best_gain = 0.0;
  std::vector<double> values;
  for (const int f : tree.features) {
    values.clear();
    for (const auto& [x, y] : samples) values.push_back(x[f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (const double thr : values) {
      std::int64_t l0 = 0, l1 = 0;
      for (const auto& [x, y] : samples)
        if (x[f] < thr) (y == 0 ? l0 : l1)++;
      const std::int64_t nl = l0 + l1;
      const std::int64_t nr = n - nl;
      if (nl == 0 || nr == 0) continue;
      const double child = (static_cast<double>(nl) * label_entropy(l0, l1) +
                            static_cast<double>(nr) * label_entropy(total0 - l0, total1 - l1)) /
                           static_cast<double>(n);
      const double gain = parent - child;
      if (gain > best_gain + 1e-12) {
        best_gain = gain;
        best_feature = f;
        best_threshold = thr;
      }
    }
  }
  if (best_feature < 0) return;

  const int left = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  const int right = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  Node& node = tree.nodes[node_index];
  node.feature = best_feature;
  node.threshold = best_threshold;
  node.left = left;
  node.right = right;
  for (const auto& sample : samples) {
    Node& child =
        tree.nodes[sample.first[best_feature] < best_threshold ? left : right];
    ++child.counts[sample.second];
    ++child.seen;
    child.reservoir.push_back(sample);
  }
  node.reservoir.clear();
  node.reservoir.shrink_to_fit();
}

double OnlineForest::leaf_prob(const Tree& tree, const std::array<double, 4>& x) const {
  int index = 0;
  while (tree.nodes[index].feature >= 0) {
    const Node& node = tree.nodes[index];
    index = x[node.feature] < node.threshold ? node.left : node.right;
  }
  const Node& leaf = tree.nodes[index];
  if (leaf.seen == 0) return 0.5;
  return static_cast<double>(leaf.counts[1]) /
         static_cast<double>(leaf.counts[0] + leaf.counts[1]);
}

double OnlineForest::predict_prob(const FeatureVector& x) const {
  const std::array<double, 4> v = x.as_array();
  double sum = 0.0;
  for (const Tree& tree : trees_) sum += leaf_prob(tree, v);
  return sum / static_cast<double>(trees_.size());
}

int OnlineForest::predict(const FeatureVector& x) const {
  return predict_prob(x) > 0.5 ? 1 : 0;
}

std::string OnlineForest::save() const {
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["params"] = {{"trees", params_.trees},
                 {"max_depth", params_.max_depth},
                 {"split_trigger", params_.split_trigger},
                 {"feature_subsample", params_.feature_subsample},
                 {"reservoir_capacity", params_.reservoir_capacity},
                 {"seed", params_.seed}};
  j["samples_seen"] = samples_seen_;
  std::ostringstream rng_state;
  rng_state << rng_;
  j["rng"] = rng_state.str();
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const Tree& tree : trees_) {
    nlohmann::ordered_json tj;
    tj["features"] = tree.features;
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const Node& node : tree.nodes) {
      nlohmann::ordered_json nj;
      nj["f"] = node.feature;
      nj["thr"] = node.threshold;
      nj["l"] = node.left;
      nj["r"] = node.right;
      nj["c"] = node.counts;
      nj["seen"] = node.seen;
      nlohmann::ordered_json res = nlohmann::ordered_json::array();
      for (const auto& [x, y] : node.reservoir)
        res.push_back({x[0], x[1], x[2], x[3], y});
      nj["res"] = std::move(res);
      nodes.push_back(std::move(nj));
    }
    tj["nodes"] = std::move(nodes);
    trees.push_back(std::move(tj));
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

OnlineForest OnlineForest::load(const std::string& bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw FormatVersionMismatch(std::string("not a forest file: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != kFormat)
      throw FormatVersionMismatch("not a forest file (missing format tag)");
    if (j.value("version", -1) != kVersion)
      throw FormatVersionMismatch("unsupported forest file version");
    ForestParams params;
    const auto& pj = j.at("params");
    params.trees = pj.at("trees").get<int>();
    params.max_depth = pj.at("max_depth").get<int>();
    params.split_trigger = pj.at("split_trigger").get<int>();
    params.feature_subsample = pj.at("feature_subsample").get<int>();
    params.reservoir_capacity = pj.at("reservoir_capacity").get<int>();
    params.seed = pj.at("seed").get<std::uint64_t>();
    OnlineForest forest(params);
    forest.samples_seen_ = j.at("samples_seen").get<std::int64_t>();
    std::istringstream rng_state(j.at("rng").get<std::string>());
    rng_state >> forest.rng_;
    if (!rng_state) throw FormatVersionMismatch("corrupt rng state");
    forest.trees_.clear();
    for (const auto& tj : j.at("trees")) {
      Tree tree;
      tree.features = tj.at("features").get<std::vector<int>>();
      for (const auto& nj : tj.at("nodes")) {
        Node node;
        node.feature = nj.at("f").get<int>();
        node.threshold = nj.at("thr").get<double>();
        node.left = nj.at("l").get<int>();
        node.right = nj.at("r").get<int>();
        node.counts = nj.at("c").get<std::array<std::int64_t, 2>>();
        node.seen = nj.at("seen").get<std::int64_t>();
        for (const auto& rj : nj.at("res")) {
          std::array<double, 4> x = {rj.at(0).get<double>(), rj.at(1).get<double>(),
                                     rj.at(2).get<double>(), rj.at(3).get<double>()};
          node.reservoir.emplace_back(x, rj.at(4).get<int>());
        }
        tree.nodes.push_back(std::move(node));
      }
      if (tree.nodes.empty()) throw FormatVersionMismatch("tree without nodes");
      forest.trees_.push_back(std::move(tree));
    }
    if (forest.trees_.empty()) throw FormatVersionMismatch("forest without trees");
    return forest;
  } catch (const nlohmann::json::exception& e) {
    throw FormatVersionMismatch(std::string("malformed forest file: ") + e.what());
  }
}

std::vector<PredictionSample> fit_training_run(OnlineForest& forest, const Model& model,
                                               const std::vector<SolutionSample>& solutions) {
  if (solutions.empty())
    throw EmptyHistoryError("training run recorded no solutions; nothing to fit");

  Tracker final_tracker(model);
  for (const SolutionSample& s : solutions) final_tracker.record_classes(s.classes);
  const std::vector<int> labels = final_tracker.stability_labels();

  std::vector<PredictionSample> dataset;
  dataset.reserve(solutions.size() * static_cast<size_t>(final_tracker.object_count()));
  Tracker replay(model);
  for (const SolutionSample& s : solutions) {
    replay.record_classes(s.classes);
    for (int v = 0; v < replay.object_count(); ++v) {
      PredictionSample sample;
      sample.x = replay.features(v);
      sample.y = labels[v];
      forest.update(sample.x, sample.y);
      dataset.push_back(sample);
    }
  }
  return dataset;
}

double dataset_accuracy(const OnlineForest& forest,
                        const std::vector<PredictionSample>& dataset) {
  if (dataset.empty()) return 1.0;
  std::int64_t hits = 0;
  for (const PredictionSample& s : dataset)
    if (forest.predict(s.x) == s.y) ++hits;
  return static_cast<double>(hits) / static_cast<double>(dataset.size());
}

}  // namespace entrofix
