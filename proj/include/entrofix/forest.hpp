#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "entrofix/run_record.hpp"
#include "entrofix/stats.hpp"

namespace entrofix {

struct ForestParams {
  int trees = 10;
  int max_depth = 6;
  int split_trigger = 20;       // samples a leaf needs before it may split
  int feature_subsample = 2;    // feature dimensions each tree may split on
  int reservoir_capacity = 32;  // threshold candidates kept per leaf
  std::uint64_t seed = 0;
};

// Incremental random forest over the 4-dimensional class-history features,
// predicting the stability label. Updates touch one root-to-leaf path per
// tree; leaves split once they have seen split_trigger samples and the best
// reservoir threshold reduces label entropy.
class OnlineForest {
 public:
  explicit OnlineForest(ForestParams params = {});

  void update(const FeatureVector& x, int y);
  double predict_prob(const FeatureVector& x) const;  // mean leaf stable-fraction
  int predict(const FeatureVector& x) const;          // 1 iff predict_prob > 0.5 strictly

  const ForestParams& params() const { return params_; }
  std::int64_t samples_seen() const { return samples_seen_; }

  std::string save() const;
  static OnlineForest load(const std::string& bytes);  // throws FormatVersionMismatch

 private:
  struct Node {
    int feature = -1;  // -1: leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::array<std::int64_t, 2> counts = {0, 0};  // label 0 / label 1
    std::int64_t seen = 0;
    std::vector<std::pair<std::array<double, 4>, int>> reservoir;
  };
  struct Tree {
    std::vector<int> features;  // subsampled dimensions, ascending
    std::vector<Node> nodes;    // nodes[0] is the root
  };

  void update_tree(Tree& tree, const std::array<double, 4>& x, int y);
  void try_split(Tree& tree, int node_index);
  double leaf_prob(const Tree& tree, const std::array<double, 4>& x) const;

  ForestParams params_;
  std::vector<Tree> trees_;
  std::mt19937_64 rng_;
  std::int64_t samples_seen_ = 0;
};

// Replays a completed baseline run into a fresh tracker, labels every object
// by the median split of the FINAL history, and streams (features-at-t,
// final-label) pairs through the forest in chronological order. The emitted
// dataset is returned for audit. Throws EmptyHistoryError when the run
// recorded no solutions.
std::vector<PredictionSample> fit_training_run(OnlineForest& forest, const Model& model,
                                               const std::vector<SolutionSample>& solutions);

// Fraction of samples the forest classifies correctly.
double dataset_accuracy(const OnlineForest& forest,
                        const std::vector<PredictionSample>& dataset);

}  // namespace entrofix
