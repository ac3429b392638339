#include "entrofix/policy.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "entrofix/errors.hpp"

namespace entrofix {

PolicyKind parse_policy(const std::string& text) {
  PolicyKind kind;
  if (text == "baseline") return kind;
  auto parse_tail = [&](const std::string& prefix) -> std::optional<std::string> {
    if (text.rfind(prefix, 0) != 0) return std::nullopt;
    return text.substr(prefix.size());
  };
  try {
    if (const auto tail = parse_tail("sp:n=")) {
      size_t used = 0;
      const int n = std::stoi(*tail, &used);
      if (used != tail->size() || n < 1) throw std::invalid_argument("n");
      kind.family = PolicyKind::Family::scoring;
      kind.n = n;
      return kind;
    }
    if (const auto tail = parse_tail("tp:tau=")) {
      size_t used = 0;
      const double tau = std::stod(*tail, &used);
      if (used != tail->size() || tau < 0.0 || tau >= 1.0) throw std::invalid_argument("tau");
      kind.family = PolicyKind::Family::threshold;
      kind.tau = tau;
      return kind;
    }
  } catch (const std::exception&) {
    throw ParseError("bad policy '" + text + "': expected baseline, sp:n=<int >= 1> or tp:tau=<real in [0,1)>");
  }
  throw ParseError("unknown policy '" + text + "': expected baseline, sp:n=... or tp:tau=...");
}

std::string to_string(const PolicyKind& policy) {
  switch (policy.family) {
    case PolicyKind::Family::baseline:
      return "baseline";
    case PolicyKind::Family::scoring:
      return "sp:n=" + std::to_string(policy.n);
    case PolicyKind::Family::threshold: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "tp:tau=%g", policy.tau);
      return buf;
    }
  }
  return "baseline";
}

std::vector<ClassFix> scoring_select(const Tracker& tracker, int n,
                                     const std::vector<char>& fixed, int t_min) {
  std::vector<ClassFix> out;
  if (tracker.sample_count() < t_min) return out;
  std::vector<int> eligible;
  for (int v = 0; v < tracker.object_count(); ++v)
    if (!fixed[v]) eligible.push_back(v);
  std::stable_sort(eligible.begin(), eligible.end(), [&](int a, int b) {
    const double sa = tracker.entropy_score(a);
    const double sb = tracker.entropy_score(b);
    if (sa != sb) return sa > sb;
    return tracker.object_ids()[a] < tracker.object_ids()[b];
  });
  const int count = std::min<int>(n, static_cast<int>(eligible.size()));
  for (int i = 0; i < count; ++i) {
    const int v = eligible[i];
    out.push_back(ClassFix{tracker.object_ids()[v], tracker.majority_class(v)});
  }
  return out;
}

std::vector<ClassFix> threshold_select(const Tracker& tracker,
                                       const std::vector<PredictionHistory>& histories,
                                       double tau, const std::vector<char>& fixed) {
  std::vector<int> selected;
  for (int v = 0; v < tracker.object_count(); ++v) {
    if (fixed[v] || histories[v].total == 0) continue;
    if (histories[v].mean() > tau) selected.push_back(v);
  }
  std::sort(selected.begin(), selected.end(), [&](int a, int b) {
    return tracker.object_ids()[a] < tracker.object_ids()[b];
  });
  std::vector<ClassFix> out;
  for (const int v : selected)
    out.push_back(ClassFix{tracker.object_ids()[v], tracker.majority_class(v)});
  return out;
}

PolicyObserver::PolicyObserver(const Model& model, PolicyKind kind, PolicyOptions options,
                               std::optional<OnlineForest> forest)
    : kind_(kind),
      options_(options),
      tracker_(model),
      forest_(std::move(forest)),
      histories_(static_cast<size_t>(model.num_groups())),
      fixed_(static_cast<size_t>(model.num_groups()), 0) {
  if (kind_.family == PolicyKind::Family::threshold && !forest_)
    throw std::invalid_argument("the threshold policy needs a stability model");
  if (options_.t_min < 1) throw std::invalid_argument("t_min must be >= 1");
}

void PolicyObserver::on_integer_solution(const Assignment& assignment, double t) {
  (void)t;
  tracker_.record(assignment);
  if (!forest_) return;
  if (options_.online_update) {
    const std::vector<int> labels = tracker_.stability_labels();
    for (int v = 0; v < tracker_.object_count(); ++v)
      forest_->update(tracker_.features(v), labels[v]);
  }
  for (int v = 0; v < tracker_.object_count(); ++v) {
    if (fixed_[v]) continue;
    histories_[v].total += 1;
    histories_[v].ones += forest_->predict(tracker_.features(v));
  }
}

std::vector<ClassFix> PolicyObserver::on_incumbent(const Assignment& assignment, double t) {
  (void)assignment;
  (void)t;
  std::vector<ClassFix> fixes;
  switch (kind_.family) {
    case PolicyKind::Family::baseline:
      return fixes;
    case PolicyKind::Family::scoring:
      fixes = scoring_select(tracker_, kind_.n, fixed_, options_.t_min);
      break;
    case PolicyKind::Family::threshold:
      if (options_.one_shot_threshold && threshold_fired_) return fixes;
      if (tracker_.sample_count() < options_.t_min) return fixes;
      fixes = threshold_select(tracker_, histories_, kind_.tau, fixed_);
      threshold_fired_ = true;
      break;
  }
  for (const ClassFix& fix : fixes) {
    const int v = tracker_.index_of(fix.object_id);
    if (v >= 0) fixed_[v] = 1;
  }
  fixes_emitted_ += static_cast<int>(fixes.size());
  return fixes;
}

}  // namespace entrofix
