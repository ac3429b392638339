#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "entrofix/model.hpp"

namespace entrofix {

// [mean, variance, max, min] of the visited-class sequence of one object.
struct FeatureVector {
  double mean = 0.0;
  double variance = 0.0;  // population variance
  double max = 0.0;
  double min = 0.0;

  std::array<double, 4> as_array() const { return {mean, variance, max, min}; }
};

// Running statistics of the classes visited by one object. No per-sample
// storage: counts plus Welford mean/M2 and extrema.
struct ClassHistory {
  std::int64_t t = 0;
  std::map<int, std::int64_t> histogram;  // class label -> count
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations from the mean
  int min_label = 0;
  int max_label = 0;

  void add(int label);
};

// One ClassHistory per object of a model, in group order. All histories share
// the same sample count once recording starts.
class Tracker {
 public:
  Tracker() = default;
  explicit Tracker(const Model& model);

  // Record one integer-feasible assignment; throws NotOneHotError when a
  // group is not one-hot. O(|V|) per call.
  void record(const Assignment& assignment);
  // Record pre-extracted classes, one per group in group order.
  void record_classes(const std::vector<int>& classes);

  std::int64_t sample_count() const { return t_; }
  int object_count() const { return static_cast<int>(histories_.size()); }
  const std::vector<int>& object_ids() const { return object_ids_; }
  const ClassHistory& history(int object_index) const { return histories_[object_index]; }
  int index_of(int object_id) const;

  FeatureVector features(int object_index) const;  // throws EmptyHistoryError when t = 0
  double entropy(int object_index) const;          // natural-log Shannon entropy
  double entropy_score(int object_index) const { return -entropy(object_index); }
  int majority_class(int object_index) const;      // ties by smallest label

  // s_v = 0 iff H(K_v) > median strictly; indexed like histories.
  std::vector<int> stability_labels() const;
  double entropy_median() const;

 private:
  std::vector<OneHotGroup> groups_;
  std::vector<int> object_ids_;
  std::vector<ClassHistory> histories_;
  std::int64_t t_ = 0;
};

double shannon_entropy(const std::map<int, std::int64_t>& histogram, std::int64_t total);

// Feature/label pair used to train the stability classifier.
struct PredictionSample {
  FeatureVector x;
  int y = 0;  // 1 = stable
};

// CSV with header mean,var,max,min,label.
std::string dataset_to_csv(const std::vector<PredictionSample>& samples);

}  // namespace entrofix
