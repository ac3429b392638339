#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "entrofix/model.hpp"
#include "entrofix/run_record.hpp"

namespace entrofix {

// Request to pin object `object_id` to class `class_label`, returned by an
// observer at an incumbent and applied globally by the engine.
struct ClassFix {
  int object_id = -1;
  int class_label = -1;
};

// Search callbacks. `t` is the run clock (node count by default). Every
// integer-feasible solution triggers on_integer_solution; improvements
// additionally trigger on_incumbent, whose returned fixes the engine applies
// as global bound changes. Fixes naming unknown or already-fixed objects are
// skipped with a warning on stderr.
class SearchObserver {
 public:
  virtual ~SearchObserver() = default;
  virtual void on_integer_solution(const Assignment& assignment, double t) {
    (void)assignment;
    (void)t;
  }
  virtual std::vector<ClassFix> on_incumbent(const Assignment& assignment, double t) {
    (void)assignment;
    (void)t;
    return {};
  }
};

enum class RunClock { node, wall };

struct SolverConfig {
  std::int64_t node_limit = 20000;
  double wall_limit_s = 0.0;  // 0: no wall limit
  double rel_gap_tol = 0.0;   // early stop once the proven gap is this small
  std::uint64_t seed = 0;
  bool rounding_heuristic = true;
  int heuristic_max_depth = 20;  // deepest node the heuristic runs at
  RunClock clock = RunClock::node;
  bool incumbents_only = false;  // record improving solutions only
};

// Best-first branch and bound: lowest LP bound next, ties by node id;
// branches on the most fractional integer variable (ties by lowest variable
// id) into floor/ceil children. The best assignment returned is the best
// solution of the ORIGINAL model found at any point; fixes never erase it.
// The dual bound in the record applies to the fix-restricted problem only.
RunRecord solve(const Model& model, const SolverConfig& config,
                SearchObserver* observer = nullptr);

// Group-aware rounding: per group the member with the largest value wins
// (ties by lowest class label), remaining integers round to nearest; returns
// the assignment only when it evaluates feasible, with no further repair.
std::optional<Assignment> round_and_repair(const Assignment& lp_solution, const Model& model);

// |best - bound| / max(|best|, 1e-10).
double relative_gap(double best_objective, double dual_bound);

}  // namespace entrofix
