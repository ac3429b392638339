#include "entrofix/run_record.hpp"

namespace entrofix {

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::optimal:
      return "optimal";
    case RunStatus::budget_exhausted:
      return "budget_exhausted";
    case RunStatus::restricted_infeasible:
      return "restricted_infeasible";
    case RunStatus::no_solution:
      return "no_solution";
  }
  return "unknown";
}

std::vector<std::pair<double, double>> RunRecord::incumbents() const {
  std::vector<std::pair<double, double>> out;
  for (const RunEvent& e : events)
    if (e.kind == EventKind::incumbent) out.emplace_back(e.t, e.objective);
  return out;
}

std::vector<std::pair<int, int>> RunRecord::fixes() const {
  std::vector<std::pair<int, int>> out;
  for (const RunEvent& e : events)
    if (e.kind == EventKind::fix) out.emplace_back(e.object_id, e.class_label);
  return out;
}

std::vector<RunEvent> RunRecord::fix_events() const {
  std::vector<RunEvent> out;
  for (const RunEvent& e : events)
    if (e.kind == EventKind::fix) out.push_back(e);
  return out;
}

}  // namespace entrofix
