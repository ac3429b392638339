#pragma once

#include <cstdint>
#include <vector>

#include "entrofix/model.hpp"

namespace entrofix {

// LP relaxation in sparse column form. Bounds may be tightened per solve
// (branching, class fixes) without rebuilding the matrix.
struct LinearProgramView {
  int num_rows = 0;
  std::vector<std::vector<std::pair<int, double>>> columns;  // per structural var: (row, coef)
  std::vector<double> objective;
  std::vector<Sense> senses;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  int num_structural() const { return static_cast<int>(columns.size()); }
};

LinearProgramView make_lp(const Model& model);

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

enum class ColStatus : std::uint8_t { basic, at_lower, at_upper };

// Opaque warm-start state: basic column per row plus a status per column
// (structural columns first, then one slack per row).
struct Basis {
  std::vector<int> basic;
  std::vector<ColStatus> status;

  bool empty() const { return basic.empty() && status.empty(); }
};

struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  Assignment x;  // structural values
  double objective = 0.0;
  int iterations = 0;
  Basis basis;
};

struct SimplexOptions {
  int iteration_limit = 0;  // 0: 50 * (rows + cols)
  double feas_tol = 1e-7;
  double dual_tol = 1e-7;
  double pivot_tol = 1e-9;
  int refactor_interval = 100;
  bool bland_from_start = false;  // re-solve escape hatch after a stalled run
};

// Bounded-variable primal simplex over a fixed matrix; per-solve bounds allow
// cheap re-solves along a branch-and-bound tree. Dantzig pricing with a
// Bland fallback once the objective stalls.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearProgramView& lp, SimplexOptions options = {});

  // Solve with the view's own bounds.
  LpResult solve(const Basis* warm_start = nullptr);
  // Solve with substituted structural bounds.
  LpResult solve_with_bounds(const std::vector<double>& lower, const std::vector<double>& upper,
                             const Basis* warm_start = nullptr);

 private:
  enum class Phase { restore, optimize };

  struct RatioResult {
    bool blocked = false;
    bool bound_flip = false;
    bool unbounded = false;
    double step = 0.0;
    int basis_pos = -1;
    ColStatus leaving_status = ColStatus::at_lower;
  };

  void reset_to_slack_basis();
  bool adopt_basis(const Basis& basis);
  bool factorize();
  void compute_basic_values();
  void ftran(int col, std::vector<double>& out) const;
  void btran_costs(const std::vector<double>& basic_costs, std::vector<double>& y) const;
  double reduced_cost(int col, const std::vector<double>& y, double cost) const;
  double value_of(int col) const;
  double infeasibility() const;
  int price(const std::vector<double>& y, Phase phase, bool bland) const;
  RatioResult ratio_test(int entering, int direction, const std::vector<double>& w, Phase phase,
                         bool bland) const;
  void apply_pivot(int entering, int direction, const RatioResult& ratio,
                   const std::vector<double>& w);
  LpResult finish(LpStatus status, int iterations);

  // Problem data (slack columns appended after structural ones).
  int rows_ = 0;
  int structural_ = 0;
  int total_ = 0;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> cost_;
  std::vector<double> rhs_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  SimplexOptions options_;
  int max_iterations_ = 0;

  // Solver state.
  std::vector<double> binv_;  // row-major rows_ x rows_
  std::vector<int> basic_;
  std::vector<ColStatus> status_;
  std::vector<int> basis_pos_;
  std::vector<double> xb_;
  int pivots_since_refactor_ = 0;

  // Workspaces.
  std::vector<double> work_w_;
  std::vector<double> work_y_;
  std::vector<double> work_c1_;
};

// One-shot convenience wrapper around SimplexSolver.
LpResult solve_lp(const LinearProgramView& lp, const Basis* warm_start = nullptr,
                  SimplexOptions options = {});

}  // namespace entrofix
