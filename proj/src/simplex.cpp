#include "entrofix/simplex.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace entrofix {

LinearProgramView make_lp(const Model& model) {
  LinearProgramView lp;
  lp.num_rows = model.num_constraints();
  lp.columns.resize(model.num_variables());
  for (int r = 0; r < model.num_constraints(); ++r)
    for (const auto& [var, coef] : model.constraints[r].terms)
      lp.columns[var].emplace_back(r, coef);
  lp.objective = model.objective;
  lp.senses.reserve(model.num_constraints());
  lp.rhs.reserve(model.num_constraints());
  for (const LinearConstraint& row : model.constraints) {
    lp.senses.push_back(row.sense);
    lp.rhs.push_back(row.rhs);
  }
  lp.lower.reserve(model.num_variables());
  lp.upper.reserve(model.num_variables());
  for (const Variable& v : model.variables) {
    lp.lower.push_back(v.lower);
    lp.upper.push_back(v.upper);
  }
  return lp;
}

SimplexSolver::SimplexSolver(const LinearProgramView& lp, SimplexOptions options)
    : rows_(lp.num_rows),
      structural_(lp.num_structural()),
      total_(lp.num_structural() + lp.num_rows),
      options_(options) {
  cols_.resize(total_);
  cost_.assign(total_, 0.0);
  lower_.assign(total_, 0.0);
  upper_.assign(total_, kInf);
  rhs_ = lp.rhs;

  for (int j = 0; j < structural_; ++j) {
    cols_[j] = lp.columns[j];
    cost_[j] = lp.objective[j];
    lower_[j] = lp.lower[j];
    upper_[j] = lp.upper[j];
  }
  // One logical column per row: <= gets +slack in [0,inf), >= gets -slack in
  // [0,inf), == gets a +slack fixed at 0 (absorbs infeasibility in phase 1).
  for (int i = 0; i < rows_; ++i) {
    const int j = structural_ + i;
    const double sign = lp.senses[i] == Sense::ge ? -1.0 : 1.0;
    cols_[j].emplace_back(i, sign);
    lower_[j] = 0.0;
    upper_[j] = lp.senses[i] == Sense::eq ? 0.0 : kInf;
  }

  max_iterations_ =
      options_.iteration_limit > 0 ? options_.iteration_limit : 50 * (rows_ + total_);

  binv_.assign(static_cast<size_t>(rows_) * rows_, 0.0);
  basic_.assign(rows_, -1);
  status_.assign(total_, ColStatus::at_lower);
  basis_pos_.assign(total_, -1);
  xb_.assign(rows_, 0.0);
  work_w_.assign(rows_, 0.0);
  work_y_.assign(rows_, 0.0);
  work_c1_.assign(rows_, 0.0);
}

void SimplexSolver::reset_to_slack_basis() {
  std::fill(basis_pos_.begin(), basis_pos_.end(), -1);
  for (int j = 0; j < total_; ++j) status_[j] = ColStatus::at_lower;
  for (int i = 0; i < rows_; ++i) {
    const int j = structural_ + i;
    basic_[i] = j;
    basis_pos_[j] = i;
    status_[j] = ColStatus::basic;
  }
  // Slack basis inverse is its own diagonal of +-1.
  std::fill(binv_.begin(), binv_.end(), 0.0);
  for (int i = 0; i < rows_; ++i)
    binv_[static_cast<size_t>(i) * rows_ + i] = cols_[structural_ + i][0].second;
  pivots_since_refactor_ = 0;
}

bool SimplexSolver::adopt_basis(const Basis& basis) {
  if (static_cast<int>(basis.basic.size()) != rows_ ||
      static_cast<int>(basis.status.size()) != total_)
    return false;
  std::fill(basis_pos_.begin(), basis_pos_.end(), -1);
  for (int i = 0; i < rows_; ++i) {
    const int j = basis.basic[i];
    if (j < 0 || j >= total_ || basis_pos_[j] >= 0) return false;
    basic_[i] = j;
    basis_pos_[j] = i;
  }
  for (int j = 0; j < total_; ++j) {
    status_[j] = basis.status[j];
    if (basis_pos_[j] >= 0 && status_[j] != ColStatus::basic) return false;
    if (basis_pos_[j] < 0 && status_[j] == ColStatus::basic) return false;
    if (status_[j] == ColStatus::at_upper && upper_[j] == kInf) status_[j] = ColStatus::at_lower;
  }
  return factorize();
}

bool SimplexSolver::factorize() {
  if (rows_ == 0) return true;
  const int m = rows_;
  std::vector<double> mat(static_cast<size_t>(m) * m, 0.0);
  for (int k = 0; k < m; ++k)
    for (const auto& [row, coef] : cols_[basic_[k]]) mat[static_cast<size_t>(row) * m + k] = coef;

  std::vector<double>& inv = binv_;
  std::fill(inv.begin(), inv.end(), 0.0);
  for (int i = 0; i < m; ++i) inv[static_cast<size_t>(i) * m + i] = 1.0;

  // Gauss-Jordan with partial pivoting, applied to [mat | inv].
  std::vector<int> perm(m);
  for (int i = 0; i < m; ++i) perm[i] = i;
  for (int col = 0; col < m; ++col) {
    int piv = col;
    double best = std::abs(mat[static_cast<size_t>(col) * m + col]);
    for (int r = col + 1; r < m; ++r) {
      const double cand = std::abs(mat[static_cast<size_t>(r) * m + col]);
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (best < 1e-11) return false;  // singular basis
    if (piv != col) {
      for (int c = 0; c < m; ++c) {
        std::swap(mat[static_cast<size_t>(piv) * m + c], mat[static_cast<size_t>(col) * m + c]);
        std::swap(inv[static_cast<size_t>(piv) * m + c], inv[static_cast<size_t>(col) * m + c]);
      }
    }
    const double scale = 1.0 / mat[static_cast<size_t>(col) * m + col];
    for (int c = 0; c < m; ++c) {
      mat[static_cast<size_t>(col) * m + c] *= scale;
      inv[static_cast<size_t>(col) * m + c] *= scale;
    }
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const double factor = mat[static_cast<size_t>(r) * m + col];
      if (factor == 0.0) continue;
      for (int c = 0; c < m; ++c) {
        mat[static_cast<size_t>(r) * m + c] -= factor * mat[static_cast<size_t>(col) * m + c];
        inv[static_cast<size_t>(r) * m + c] -= factor * inv[static_cast<size_t>(col) * m + c];
      }
    }
  }
  pivots_since_refactor_ = 0;
  return true;
}

double SimplexSolver::value_of(int col) const {
  switch (status_[col]) {
    case ColStatus::basic:
      return xb_[basis_pos_[col]];
    case ColStatus::at_lower:
      return lower_[col];
    case ColStatus::at_upper:
      return upper_[col];
  }
  return 0.0;
}

void SimplexSolver::compute_basic_values() {
  std::vector<double> r = rhs_;
  for (int j = 0; j < total_; ++j) {
    if (status_[j] == ColStatus::basic) continue;
    const double v = status_[j] == ColStatus::at_lower ? lower_[j] : upper_[j];
    if (v == 0.0) continue;
    for (const auto& [row, coef] : cols_[j]) r[row] -= coef * v;
  }
  for (int i = 0; i < rows_; ++i) {
    double sum = 0.0;
    const double* row = binv_.data() + static_cast<size_t>(i) * rows_;
    for (int k = 0; k < rows_; ++k) sum += row[k] * r[k];
    xb_[i] = sum;
  }
}

void SimplexSolver::ftran(int col, std::vector<double>& out) const {
  for (int i = 0; i < rows_; ++i) {
    double sum = 0.0;
    const double* row = binv_.data() + static_cast<size_t>(i) * rows_;
    for (const auto& [r, coef] : cols_[col]) sum += coef * row[r];
    out[i] = std::abs(sum) < 1e-11 ? 0.0 : sum;
  }
}

void SimplexSolver::btran_costs(const std::vector<double>& basic_costs,
                                std::vector<double>& y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < rows_; ++i) {
    const double c = basic_costs[i];
    if (c == 0.0) continue;
    const double* row = binv_.data() + static_cast<size_t>(i) * rows_;
    for (int k = 0; k < rows_; ++k) y[k] += c * row[k];
  }
}

double SimplexSolver::reduced_cost(int col, const std::vector<double>& y, double cost) const {
  double d = cost;
  for (const auto& [row, coef] : cols_[col]) d -= y[row] * coef;
  return d;
}

double SimplexSolver::infeasibility() const {
  double worst = 0.0;
  for (int i = 0; i < rows_; ++i) {
    const int j = basic_[i];
    worst = std::max(worst, lower_[j] - xb_[i]);
    if (upper_[j] != kInf) worst = std::max(worst, xb_[i] - upper_[j]);
  }
  return worst;
}

int SimplexSolver::price(const std::vector<double>& y, Phase phase, bool bland) const {
  int best = -1;
  double best_score = options_.dual_tol;
  for (int j = 0; j < total_; ++j) {
    if (status_[j] == ColStatus::basic) continue;
    if (lower_[j] == upper_[j]) continue;  // fixed, never enters
    const double c = phase == Phase::optimize ? cost_[j] : 0.0;
    const double d = reduced_cost(j, y, c);
    double score = 0.0;
    if (status_[j] == ColStatus::at_lower && d < -options_.dual_tol)
      score = -d;
    else if (status_[j] == ColStatus::at_upper && d > options_.dual_tol)
      score = d;
    else
      continue;
    if (bland) return j;  // smallest index wins
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

SimplexSolver::RatioResult SimplexSolver::ratio_test(int entering, int direction,
                                                     const std::vector<double>& w, Phase phase,
                                                     bool bland) const {
  RatioResult result;
  const double ftol = options_.feas_tol;
  double best_t = kInf;
  int best_pos = -1;
  double best_pivot = 0.0;
  ColStatus best_leaving = ColStatus::at_lower;

  for (int i = 0; i < rows_; ++i) {
    const double rate = -direction * w[i];  // d x_basic[i] / dt
    if (std::abs(rate) <= options_.pivot_tol) continue;
    const int j = basic_[i];
    const double x = xb_[i];
    const double lo = lower_[j];
    const double up = upper_[j];

    double t = kInf;
    ColStatus leave_at = ColStatus::at_lower;
    if (phase == Phase::restore) {
      const bool below = x < lo - ftol;
      const bool above = up != kInf && x > up + ftol;
      if (rate > 0.0) {
        if (below) {
          t = (lo - x) / rate;
          leave_at = ColStatus::at_lower;
        } else if (!above) {
          if (up == kInf) continue;
          t = (up - x) / rate;
          leave_at = ColStatus::at_upper;
        } else {
          continue;  // moving further above: slope already priced in
        }
      } else {
        if (above) {
          t = (up - x) / rate;
          leave_at = ColStatus::at_upper;
        } else if (!below) {
          t = (lo - x) / rate;
          leave_at = ColStatus::at_lower;
        } else {
          continue;
        }
      }
    } else {
      if (rate > 0.0) {
        if (up == kInf) continue;
        t = (up - x) / rate;
        leave_at = ColStatus::at_upper;
      } else {
        t = (lo - x) / rate;
        leave_at = ColStatus::at_lower;
      }
    }
    if (t < 0.0) t = 0.0;  // degenerate step within tolerance

    const bool better =
        t < best_t - 1e-12 ||
        (t < best_t + 1e-12 && (bland ? (best_pos < 0 || j < basic_[best_pos])
                                      : std::abs(w[i]) > best_pivot));
    if (better) {
      best_t = t;
      best_pos = i;
      best_pivot = std::abs(w[i]);
      best_leaving = leave_at;
    }
  }

  // The entering variable's own opposite bound can be the tightest limit.
  const double span = upper_[entering] == kInf ? kInf : upper_[entering] - lower_[entering];
  if (span != kInf && span <= best_t) {
    result.blocked = true;
    result.bound_flip = true;
    result.step = span;
    return result;
  }
  if (best_pos < 0) {
    result.unbounded = true;
    return result;
  }
  result.blocked = true;
  result.step = best_t;
  result.basis_pos = best_pos;
  result.leaving_status = best_leaving;
  return result;
}

void SimplexSolver::apply_pivot(int entering, int direction, const RatioResult& ratio,
                                const std::vector<double>& w) {
  const double t = ratio.step;
  if (t != 0.0)
    for (int i = 0; i < rows_; ++i) xb_[i] -= direction * t * w[i];

  if (ratio.bound_flip) {
    status_[entering] =
        status_[entering] == ColStatus::at_lower ? ColStatus::at_upper : ColStatus::at_lower;
    return;
  }

  const int r = ratio.basis_pos;
  const int leaving = basic_[r];
  const double enter_value =
      (status_[entering] == ColStatus::at_lower ? lower_[entering] : upper_[entering]) +
      direction * t;

  // Elementary row update of the inverse.
  const double pivot = w[r];
  double* prow = binv_.data() + static_cast<size_t>(r) * rows_;
  const double inv_pivot = 1.0 / pivot;
  for (int c = 0; c < rows_; ++c) prow[c] *= inv_pivot;
  for (int i = 0; i < rows_; ++i) {
    if (i == r || w[i] == 0.0) continue;
    double* row = binv_.data() + static_cast<size_t>(i) * rows_;
    const double factor = w[i];
    for (int c = 0; c < rows_; ++c) row[c] -= factor * prow[c];
  }

  status_[leaving] = ratio.leaving_status;
  basis_pos_[leaving] = -1;
  basic_[r] = entering;
  basis_pos_[entering] = r;
  status_[entering] = ColStatus::basic;
  xb_[r] = enter_value;
  ++pivots_since_refactor_;
}

LpResult SimplexSolver::finish(LpStatus status, int iterations) {
  LpResult result;
  result.status = status;
  result.iterations = iterations;
  result.x.resize(structural_);
  for (int j = 0; j < structural_; ++j) result.x[j] = value_of(j);
  double obj = 0.0;
  for (int j = 0; j < structural_; ++j) obj += cost_[j] * result.x[j];
  result.objective = obj;
  result.basis.basic = basic_;
  result.basis.status = status_;
  return result;
}

LpResult SimplexSolver::solve(const Basis* warm_start) {
  return solve_with_bounds(
      std::vector<double>(lower_.begin(), lower_.begin() + structural_),
      std::vector<double>(upper_.begin(), upper_.begin() + structural_), warm_start);
}

LpResult SimplexSolver::solve_with_bounds(const std::vector<double>& lower,
                                          const std::vector<double>& upper,
                                          const Basis* warm_start) {
  if (static_cast<int>(lower.size()) != structural_ ||
      static_cast<int>(upper.size()) != structural_)
    throw std::invalid_argument("bound vectors do not match structural count");
  for (int j = 0; j < structural_; ++j) {
    lower_[j] = lower[j];
    upper_[j] = upper[j];
    if (lower_[j] > upper_[j]) return finish(LpStatus::infeasible, 0);
  }

  bool warm_ok = false;
  if (warm_start != nullptr && !warm_start->empty()) warm_ok = adopt_basis(*warm_start);
  if (!warm_ok) reset_to_slack_basis();
  // Nonbasic values may have moved with the bounds; rebuild the basics.
  for (int j = 0; j < total_; ++j)
    if (status_[j] == ColStatus::at_upper && upper_[j] == kInf) status_[j] = ColStatus::at_lower;
  compute_basic_values();

  Phase phase = Phase::restore;
  bool bland = options_.bland_from_start;
  int iterations = 0;
  int stalled = 0;
  double last_objective = kInf;
  bool fresh = true;  // binv was just factorized and xb recomputed

  std::vector<double> basic_costs(rows_, 0.0);

  while (true) {
    if (iterations >= max_iterations_) return finish(LpStatus::iteration_limit, iterations);
    if (pivots_since_refactor_ >= options_.refactor_interval) {
      if (!factorize()) {
        reset_to_slack_basis();
        phase = Phase::restore;
      }
      compute_basic_values();
      fresh = true;
    }

    if (phase == Phase::restore && infeasibility() <= options_.feas_tol) {
      phase = Phase::optimize;
      last_objective = kInf;
      stalled = 0;
    }

    // Objective row for pricing: +-1 on infeasible basics in phase 1, real
    // costs in phase 2.
    if (phase == Phase::restore) {
      for (int i = 0; i < rows_; ++i) {
        const int j = basic_[i];
        if (xb_[i] < lower_[j] - options_.feas_tol)
          basic_costs[i] = -1.0;
        else if (upper_[j] != kInf && xb_[i] > upper_[j] + options_.feas_tol)
          basic_costs[i] = 1.0;
        else
          basic_costs[i] = 0.0;
      }
    } else {
      for (int i = 0; i < rows_; ++i) basic_costs[i] = cost_[basic_[i]];
    }
    btran_costs(basic_costs, work_y_);

    const int entering = price(work_y_, phase, bland);
    if (entering < 0) {
      if (!fresh) {
        // Recompute from a clean factorization before declaring a result.
        if (!factorize()) {
          reset_to_slack_basis();
          phase = Phase::restore;
          compute_basic_values();
          fresh = true;
          continue;
        }
        compute_basic_values();
        fresh = true;
        if (phase == Phase::optimize && infeasibility() > options_.feas_tol)
          phase = Phase::restore;
        continue;
      }
      if (phase == Phase::restore) return finish(LpStatus::infeasible, iterations);
      return finish(LpStatus::optimal, iterations);
    }

    const int direction = status_[entering] == ColStatus::at_lower ? 1 : -1;
    ftran(entering, work_w_);
    const RatioResult ratio = ratio_test(entering, direction, work_w_, phase, bland);
    if (ratio.unbounded) {
      if (phase == Phase::restore) {
        // Infeasibility cannot be unbounded below; numerical trouble.
        if (fresh) return finish(LpStatus::iteration_limit, iterations);
        factorize();
        compute_basic_values();
        fresh = true;
        continue;
      }
      return finish(LpStatus::unbounded, iterations);
    }

    apply_pivot(entering, direction, ratio, work_w_);
    fresh = false;
    ++iterations;

    // Cycle guard: no measurable progress for a long stretch turns on
    // Bland's rule, which terminates.
    const double progress_metric =
        phase == Phase::restore ? infeasibility() : [&] {
          double obj = 0.0;
          for (int j = 0; j < total_; ++j) obj += cost_[j] * value_of(j);
          return obj;
        }();
    if (progress_metric < last_objective - 1e-12) {
      last_objective = progress_metric;
      stalled = 0;
    } else if (++stalled > 2 * total_) {
      bland = true;
    }
  }
}

LpResult solve_lp(const LinearProgramView& lp, const Basis* warm_start, SimplexOptions options) {
  SimplexSolver solver(lp, options);
  return solver.solve(warm_start);
}

}  // namespace entrofix
