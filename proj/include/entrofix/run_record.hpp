#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "entrofix/model.hpp"

namespace entrofix {

enum class RunStatus { optimal, budget_exhausted, restricted_infeasible, no_solution };

std::string to_string(RunStatus status);

enum class EventKind { solution, incumbent, fix };

struct RunEvent {
  double t = 0.0;  // clock value (node count by default)
  EventKind kind = EventKind::solution;
  double objective = 0.0;  // solution / incumbent
  int object_id = -1;      // fix
  int class_label = -1;    // fix
};

// Classes of one recorded integer-feasible solution, kept for training and
// replay. Production statistics never store these; the tracker is O(1).
struct SolutionSample {
  double t = 0.0;
  double objective = 0.0;
  std::vector<int> classes;  // per group, in group order
};

// Everything observed during one solve: timestamped events, recorded
// solutions, the best original-model assignment, and the final restricted
// dual bound (a bound for the problem after fixes, never for the original).
struct RunRecord {
  std::string instance;
  std::string policy = "baseline";
  std::uint64_t seed = 0;

  std::vector<RunEvent> events;
  std::vector<SolutionSample> solutions;

  std::int64_t nodes_processed = 0;
  double horizon = 0.0;  // clock budget the run was given
  RunStatus status = RunStatus::no_solution;
  bool has_incumbent = false;
  double best_objective = 0.0;
  Assignment best_assignment;
  std::vector<int> best_classes;
  double restricted_dual_bound = -kInf;
  double wall_seconds = 0.0;
  int fix_disagreements = 0;  // fixes whose class differed from the incumbent's

  std::vector<std::pair<double, double>> incumbents() const;   // (t, objective)
  std::vector<std::pair<int, int>> fixes() const;              // (v, k)
  std::vector<RunEvent> fix_events() const;
};

}  // namespace entrofix
