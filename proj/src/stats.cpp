#include "entrofix/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "entrofix/errors.hpp"

namespace entrofix {

void ClassHistory::add(int label) {
  if (t == 0) {
    min_label = max_label = label;
  } else {
    min_label = std::min(min_label, label);
    max_label = std::max(max_label, label);
  }
  ++t;
  ++histogram[label];
  const double delta = label - mean;
  mean += delta / static_cast<double>(t);
  m2 += delta * (label - mean);
}

Tracker::Tracker(const Model& model) : groups_(model.groups) {
  histories_.resize(groups_.size());
  object_ids_.reserve(groups_.size());
  for (const OneHotGroup& g : groups_) object_ids_.push_back(g.object_id);
}

int Tracker::index_of(int object_id) const {
  for (int i = 0; i < object_count(); ++i)
    if (object_ids_[i] == object_id) return i;
  return -1;
}

void Tracker::record(const Assignment& assignment) {
  std::vector<int> classes;
  classes.reserve(groups_.size());
  for (const OneHotGroup& g : groups_) classes.push_back(class_of_or_throw(assignment, g));
  record_classes(classes);
}

void Tracker::record_classes(const std::vector<int>& classes) {
  if (classes.size() != histories_.size())
    throw std::invalid_argument("class vector length does not match object count");
  for (size_t i = 0; i < classes.size(); ++i) histories_[i].add(classes[i]);
  ++t_;
}

FeatureVector Tracker::features(int object_index) const {
  const ClassHistory& h = histories_.at(object_index);
  if (h.t == 0) throw EmptyHistoryError("features requested before any sample");
  FeatureVector f;
  f.mean = h.mean;
  f.variance = h.m2 / static_cast<double>(h.t);
  if (f.variance < 0.0) f.variance = 0.0;
  f.max = h.max_label;
  f.min = h.min_label;
  return f;
}

double shannon_entropy(const std::map<int, std::int64_t>& histogram, std::int64_t total) {
  double h = 0.0;
  for (const auto& [label, count] : histogram) {
    if (count == 0) continue;  // 0 log 0 := 0
    const double p = static_cast<double>(count) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h < 0.0 ? 0.0 : h;
}

double Tracker::entropy(int object_index) const {
  const ClassHistory& h = histories_.at(object_index);
  if (h.t == 0) throw EmptyHistoryError("entropy requested before any sample");
  return shannon_entropy(h.histogram, h.t);
}

int Tracker::majority_class(int object_index) const {
  const ClassHistory& h = histories_.at(object_index);
  if (h.t == 0) throw EmptyHistoryError("majority class requested before any sample");
  int best_label = 0;
  std::int64_t best_count = -1;
  for (const auto& [label, count] : h.histogram) {
    if (count > best_count) {  // map iteration is label-ascending, so ties keep the smallest
      best_count = count;
      best_label = label;
    }
  }
  return best_label;
}

double Tracker::entropy_median() const {
  if (histories_.empty()) throw EmptyHistoryError("tracker has no objects");
  std::vector<double> entropies;
  entropies.reserve(histories_.size());
  for (int i = 0; i < object_count(); ++i) entropies.push_back(entropy(i));
  std::sort(entropies.begin(), entropies.end());
  const size_t n = entropies.size();
  if (n % 2 == 1) return entropies[n / 2];
  return 0.5 * (entropies[n / 2 - 1] + entropies[n / 2]);
}

std::vector<int> Tracker::stability_labels() const {
  const double m = entropy_median();
  std::vector<int> labels(histories_.size(), 1);
  for (int i = 0; i < object_count(); ++i)
    if (entropy(i) > m) labels[i] = 0;
  return labels;
}

std::string dataset_to_csv(const std::vector<PredictionSample>& samples) {
  std::string out = "mean,var,max,min,label\n";
  char buf[160];
  for (const PredictionSample& s : samples) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%d\n", s.x.mean, s.x.variance,
                  s.x.max, s.x.min, s.y);
    out += buf;
  }
  return out;
}

}  // namespace entrofix
