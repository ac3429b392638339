#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace entrofix {

// Incumbent objectives over the run clock, against a shared reference.
// Gap is 1 before the first incumbent and constant between incumbents.
struct Trajectory {
  std::vector<std::pair<double, double>> incumbents;  // (t_i, objective), t strictly increasing
  double horizon = 0.0;                               // T >= last t_i
  double reference = 0.0;                             // c_ref

  // Gap points (t_i, p(t_i)) derived from incumbents and reference.
  std::vector<std::pair<double, double>> gap_points() const;
  double min_gap() const;  // 1 when there is no incumbent
};

// Normalized primal gap: 0 if both zero, 1 if signs differ or either is not
// finite, else |c - ref| / max(|c|, |ref|).
double primal_gap(double c_incumbent, double c_ref);

// Step-function integral of the primal gap from 0 to the horizon.
double primal_integral(const Trajectory& trajectory);

// heuristic PI / baseline PI; nullopt when the baseline PI is zero.
std::optional<double> pir(double heuristic_pi, double baseline_pi);

// Earliest t where the piecewise-linear interpolation through (0,1) and the
// gap points reaches gap <= g; nullopt when the run never gets that low.
std::optional<double> time_to_gap(const Trajectory& trajectory, double g);

struct SpeedUp {
  double speed_up = 1.0;
  double gap_at_best = 0.0;
};

// Maximum of baseline-time / heuristic-time over a 100-point gap grid
// spanning [max of the two minimum gaps, 1]; reports the smallest gap
// attaining the maximum. nullopt when no grid gap is reached by both runs.
std::optional<SpeedUp> best_speed_up(const Trajectory& heuristic, const Trajectory& baseline);

// Fraction of fixes (v, k) whose class matches the reference classes
// (indexed by object order); 1.0 by convention when no fixes were emitted.
double action_accuracy(const std::vector<std::pair<int, int>>& fixes,
                       const std::vector<int>& reference_classes,
                       const std::vector<int>& object_ids);

// Linear-interpolation quartile of a sample (q in [0,1]).
double quantile(std::vector<double> values, double q);

}  // namespace entrofix
