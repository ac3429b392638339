#include "entrofix/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <queue>
#include <stdexcept>
#include <utility>

#include "entrofix/errors.hpp"
#include "entrofix/simplex.hpp"

namespace entrofix {

namespace {

constexpr double kObjTol = 1e-9;

// One tree node. Bounds are reconstructed lazily: global bounds (tightened by
// fixes) intersected with the branch changes along the chain to the root.
struct TreeNode {
  std::int64_t id = 0;
  int parent = -1;  // index into the node store, -1 for the root
  int branch_var = -1;
  double branch_lo = -kInf;
  double branch_hi = kInf;
  int depth = 0;
  std::shared_ptr<const Basis> warm;  // parent's final basis
};

struct QueueEntry {
  double bound;  // parent LP objective: a valid bound for the subtree
  std::int64_t id;
  int index;
};

struct QueueOrder {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

double relative_gap(double best_objective, double dual_bound) {
  return std::abs(best_objective - dual_bound) / std::max(std::abs(best_objective), 1e-10);
}

std::optional<Assignment> round_and_repair(const Assignment& lp_solution, const Model& model) {
  Assignment x = lp_solution;
  std::vector<char> grouped(model.num_variables(), 0);
  for (const OneHotGroup& group : model.groups) {
    auto members = group.members;
    std::sort(members.begin(), members.end());  // label order, so ties pick the lowest label
    int winner = members.front().second;
    double best = -kInf;
    for (const auto& [label, var] : members) {
      if (x[var] > best) {
        best = x[var];
        winner = var;
      }
    }
    for (const auto& [label, var] : members) {
      x[var] = var == winner ? 1.0 : 0.0;
      grouped[var] = 1;
    }
  }
  for (const Variable& v : model.variables) {
    if (!v.is_integral() || grouped[v.id]) continue;
    double r = std::round(x[v.id]);
    r = std::min(r, std::floor(v.upper + kIntTol));
    r = std::max(r, std::ceil(v.lower - kIntTol));
    x[v.id] = r;
  }
  if (!evaluate(model, x).feasible) return std::nullopt;
  return x;
}

RunRecord solve(const Model& model, const SolverConfig& config, SearchObserver* observer) {
  {
    const std::vector<std::string> problems = validate(model);
    if (!problems.empty()) throw std::invalid_argument("invalid model: " + problems.front());
  }
  if (config.node_limit < 1) throw std::invalid_argument("node_limit must be >= 1");
  if (config.rel_gap_tol < 0) throw std::invalid_argument("rel_gap_tol must be >= 0");

  const auto start_time = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  };

  RunRecord record;
  record.instance = model.name;
  record.seed = config.seed;

  const LinearProgramView lp = make_lp(model);
  SimplexSolver solver(lp);
  SimplexOptions bland_options;
  bland_options.bland_from_start = true;
  SimplexSolver bland_solver(lp, bland_options);

  const int n = model.num_variables();
  std::vector<double> global_lower(n), global_upper(n);
  for (const Variable& v : model.variables) {
    global_lower[v.id] = v.lower;
    global_upper[v.id] = v.upper;
  }

  std::vector<TreeNode> store;
  store.emplace_back();  // root
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueOrder> open;
  open.push(QueueEntry{-kInf, 0, 0});
  std::int64_t next_id = 1;

  bool has_best = false;
  double best_obj = kInf;
  std::vector<char> fixed_groups(static_cast<size_t>(model.num_groups()), 0);
  std::vector<ClassFix> applied_fixes;

  auto apply_fixes = [&](const std::vector<ClassFix>& fixes, const std::vector<int>& classes,
                         double t) {
    for (const ClassFix& fix : fixes) {
      const int gi = model.group_index(fix.object_id);
      if (gi < 0) {
        std::fprintf(stderr, "warning: fix names unknown object %d; skipped\n", fix.object_id);
        continue;
      }
      if (fixed_groups[gi]) {
        std::fprintf(stderr, "warning: object %d is already fixed; skipped\n", fix.object_id);
        continue;
      }
      const OneHotGroup& group = model.groups[gi];
      bool label_known = false;
      for (const auto& [label, var] : group.members) label_known |= label == fix.class_label;
      if (!label_known) {
        std::fprintf(stderr, "warning: object %d has no class %d; skipped\n", fix.object_id,
                     fix.class_label);
        continue;
      }
      for (const auto& [label, var] : group.members) {
        const double pin = label == fix.class_label ? 1.0 : 0.0;
        global_lower[var] = pin;
        global_upper[var] = pin;
      }
      fixed_groups[gi] = 1;
      applied_fixes.push_back(fix);
      record.events.push_back(RunEvent{t, EventKind::fix, 0.0, fix.object_id, fix.class_label});
      if (classes[gi] != fix.class_label) ++record.fix_disagreements;
    }
  };

  // Handles every integer-feasible assignment, from integral node LPs or the
  // rounding heuristic. `obj` is the evaluated original-model objective.
  auto handle_solution = [&](const Assignment& x, double obj, double t) {
    const bool improving = !has_best || obj < best_obj - kObjTol;
    if (config.incumbents_only && !improving) return;
    const std::vector<int> classes = classes_of(model, x);
    record.events.push_back(RunEvent{t, EventKind::solution, obj, -1, -1});
    record.solutions.push_back(SolutionSample{t, obj, classes});
    if (observer) observer->on_integer_solution(x, t);
    if (!improving) return;
    has_best = true;
    best_obj = obj;
    record.has_incumbent = true;
    record.best_objective = obj;
    record.best_assignment = x;
    record.best_classes = classes;
    record.events.push_back(RunEvent{t, EventKind::incumbent, obj, -1, -1});
    if (observer) apply_fixes(observer->on_incumbent(x, t), classes, t);
  };

  bool exhausted = false;
  bool gap_proved = false;
  std::vector<double> node_lower, node_upper;
  while (!open.empty()) {
    if (has_best && open.top().bound >= best_obj - kObjTol) {
      exhausted = true;  // everything left is bound-dominated
      break;
    }
    if (record.nodes_processed >= config.node_limit) break;
    if (config.wall_limit_s > 0 && elapsed() >= config.wall_limit_s) break;
    if (has_best && config.rel_gap_tol > 0 && std::isfinite(open.top().bound) &&
        relative_gap(best_obj, std::min(open.top().bound, best_obj)) <= config.rel_gap_tol) {
      gap_proved = true;
      break;
    }

    const QueueEntry entry = open.top();
    open.pop();
    ++record.nodes_processed;
    const double t =
        config.clock == RunClock::node ? static_cast<double>(record.nodes_processed) : elapsed();
    const int depth = store[entry.index].depth;

    node_lower = global_lower;
    node_upper = global_upper;
    bool contradiction = false;
    for (int i = entry.index; i > 0; i = store[i].parent) {
      const TreeNode& s = store[i];
      node_lower[s.branch_var] = std::max(node_lower[s.branch_var], s.branch_lo);
      node_upper[s.branch_var] = std::min(node_upper[s.branch_var], s.branch_hi);
      if (node_lower[s.branch_var] > node_upper[s.branch_var] + 1e-12) contradiction = true;
    }
    if (contradiction) {
      store[entry.index].warm.reset();
      continue;
    }

    LpResult lpres = solver.solve_with_bounds(node_lower, node_upper,
                                              store[entry.index].warm.get());
    if (lpres.status == LpStatus::iteration_limit)
      lpres = bland_solver.solve_with_bounds(node_lower, node_upper, nullptr);
    store[entry.index].warm.reset();
    if (lpres.status == LpStatus::unbounded)
      throw std::runtime_error("relaxation is unbounded; refusing to search");
    if (lpres.status == LpStatus::infeasible) continue;
    if (lpres.status == LpStatus::iteration_limit) {
      std::fprintf(stderr, "warning: node %lld LP hit the iteration limit; fathomed\n",
                   static_cast<long long>(entry.id));
      continue;
    }

    const double bound = lpres.objective;

    // Most fractional integer variable, ties by lowest id.
    int branch_var = -1;
    double best_dist_half = 2.0;
    for (const Variable& v : model.variables) {
      if (!v.is_integral()) continue;
      const double val = lpres.x[v.id];
      const double frac = val - std::floor(val);
      if (std::min(frac, 1.0 - frac) <= kIntTol) continue;
      const double dist_half = std::abs(frac - 0.5);
      if (dist_half < best_dist_half) {
        best_dist_half = dist_half;
        branch_var = v.id;
      }
    }

    if (branch_var < 0) {
      // Record the integral LP optimum even when it cannot improve the
      // incumbent: non-improving solutions still feed the class histories.
      Assignment x = lpres.x;
      for (const Variable& v : model.variables)
        if (v.is_integral()) x[v.id] = std::round(x[v.id]);
      const EvalResult ev = evaluate(model, x);
      if (!ev.feasible) {
        std::fprintf(stderr, "warning: integral node %lld failed re-evaluation; fathomed\n",
                     static_cast<long long>(entry.id));
        continue;
      }
      handle_solution(x, ev.objective, t);
      continue;  // the node's LP optimum is integral: fathomed
    }

    if (has_best && bound >= best_obj - kObjTol) continue;  // cannot improve; fathom

    if (config.rounding_heuristic && depth <= config.heuristic_max_depth) {
      if (const std::optional<Assignment> rx = round_and_repair(lpres.x, model)) {
        handle_solution(*rx, evaluate(model, *rx).objective, t);
        if (has_best && bound >= best_obj - kObjTol) continue;
      }
    }

    const double val = lpres.x[branch_var];
    auto warm = std::make_shared<const Basis>(std::move(lpres.basis));
    TreeNode down;
    down.id = next_id++;
    down.parent = entry.index;
    down.branch_var = branch_var;
    down.branch_hi = std::floor(val);
    down.depth = depth + 1;
    down.warm = warm;
    TreeNode up;
    up.id = next_id++;
    up.parent = entry.index;
    up.branch_var = branch_var;
    up.branch_lo = std::ceil(val);
    up.depth = depth + 1;
    up.warm = std::move(warm);
    const int down_index = static_cast<int>(store.size());
    store.push_back(std::move(down));
    const int up_index = static_cast<int>(store.size());
    store.push_back(std::move(up));
    open.push(QueueEntry{bound, store[down_index].id, down_index});
    open.push(QueueEntry{bound, store[up_index].id, up_index});
  }
  if (open.empty()) exhausted = true;

  const double open_bound = open.empty() ? kInf : open.top().bound;
  if (!record.has_incumbent) {
    record.status = RunStatus::no_solution;
    record.restricted_dual_bound = exhausted ? kInf : open_bound;
  } else if (exhausted) {
    bool consistent = applied_fixes.empty();
    for (const SolutionSample& s : record.solutions) {
      if (consistent) break;
      bool ok = true;
      for (const ClassFix& fix : applied_fixes)
        if (s.classes[model.group_index(fix.object_id)] != fix.class_label) {
          ok = false;
          break;
        }
      consistent = ok;
    }
    record.status = consistent ? RunStatus::optimal : RunStatus::restricted_infeasible;
    record.restricted_dual_bound = consistent ? best_obj : kInf;
  } else if (gap_proved) {
    record.status = RunStatus::optimal;
    record.restricted_dual_bound = std::min(open_bound, best_obj);
  } else {
    record.status = RunStatus::budget_exhausted;
    record.restricted_dual_bound = std::min(open_bound, best_obj);
  }

  record.wall_seconds = elapsed();
  if (config.clock == RunClock::node) {
    record.horizon = static_cast<double>(config.node_limit);
  } else {
    const double last_t = record.events.empty() ? 0.0 : record.events.back().t;
    record.horizon =
        std::max(config.wall_limit_s > 0 ? config.wall_limit_s : record.wall_seconds, last_t);
  }
  return record;
}

}  // namespace entrofix
