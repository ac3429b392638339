#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "entrofix/bnb.hpp"
#include "entrofix/forest.hpp"
#include "entrofix/stats.hpp"

namespace entrofix {

// baseline: never fixes. scoring (sp:n=N): at every incumbent, fixes the N
// unfixed objects with the highest score -H(K_vt). threshold (tp:tau=T): at
// every incumbent, fixes every unfixed object whose mean predicted stability
// exceeds tau strictly.
struct PolicyKind {
  enum class Family { baseline, scoring, threshold };
  Family family = Family::baseline;
  int n = 1;
  double tau = 0.5;
};

// Accepts "baseline", "sp:n=<int>", "tp:tau=<real>". Throws ParseError.
PolicyKind parse_policy(const std::string& text);
std::string to_string(const PolicyKind& policy);

struct PolicyOptions {
  int t_min = 3;              // recorded solutions required before any fix
  bool online_update = true;  // keep training the forest during the run
  bool one_shot_threshold = false;  // threshold fires at the first incumbent only
};

// Counters over one object's predicted-stability sequence.
struct PredictionHistory {
  std::int64_t ones = 0;
  std::int64_t total = 0;

  double mean() const {
    return total == 0 ? 0.0 : static_cast<double>(ones) / static_cast<double>(total);
  }
};

// Unfixed objects with at least t_min recorded solutions, ranked by score
// -H(K_vt) descending (ties by lowest object id); the best n are fixed to
// their majority class. `fixed` is indexed like the tracker's objects.
std::vector<ClassFix> scoring_select(const Tracker& tracker, int n,
                                     const std::vector<char>& fixed, int t_min);

// Every unfixed object whose prediction-history mean exceeds tau strictly,
// fixed to its majority class, ordered by object id.
std::vector<ClassFix> threshold_select(const Tracker& tracker,
                                       const std::vector<PredictionHistory>& histories,
                                       double tau, const std::vector<char>& fixed);

// Search observer implementing the three policies. Records every reported
// solution into the tracker; with a forest attached it optionally keeps
// training it (labels from the current median split) and appends one
// stability prediction per unfixed object per solution.
class PolicyObserver : public SearchObserver {
 public:
  PolicyObserver(const Model& model, PolicyKind kind, PolicyOptions options = {},
                 std::optional<OnlineForest> forest = std::nullopt);

  void on_integer_solution(const Assignment& assignment, double t) override;
  std::vector<ClassFix> on_incumbent(const Assignment& assignment, double t) override;

  const Tracker& tracker() const { return tracker_; }
  const std::vector<PredictionHistory>& prediction_histories() const { return histories_; }
  const OnlineForest* forest() const { return forest_ ? &*forest_ : nullptr; }
  int fixes_emitted() const { return fixes_emitted_; }

 private:
  PolicyKind kind_;
  PolicyOptions options_;
  Tracker tracker_;
  std::optional<OnlineForest> forest_;
  std::vector<PredictionHistory> histories_;
  std::vector<char> fixed_;
  int fixes_emitted_ = 0;
  bool threshold_fired_ = false;
};

}  // namespace entrofix
