#include "entrofix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace entrofix {

double primal_gap(double c_incumbent, double c_ref) {
  if (!std::isfinite(c_incumbent) || !std::isfinite(c_ref)) return 1.0;
  if (c_incumbent == 0.0 && c_ref == 0.0) return 0.0;
  if (c_incumbent * c_ref < 0.0) return 1.0;
  const double denom = std::max(std::abs(c_incumbent), std::abs(c_ref));
  const double gap = std::abs(c_incumbent - c_ref) / denom;
  return std::min(gap, 1.0);
}

std::vector<std::pair<double, double>> Trajectory::gap_points() const {
  std::vector<std::pair<double, double>> points;
  points.reserve(incumbents.size());
  for (const auto& [t, obj] : incumbents) points.emplace_back(t, primal_gap(obj, reference));
  return points;
}

double Trajectory::min_gap() const {
  double g = 1.0;
  for (const auto& [t, obj] : incumbents) g = std::min(g, primal_gap(obj, reference));
  return g;
}

double primal_integral(const Trajectory& trajectory) {
  const auto points = trajectory.gap_points();
  double pi = 0.0;
  double prev_t = 0.0;
  double prev_gap = 1.0;
  for (const auto& [t, gap] : points) {
    pi += prev_gap * (t - prev_t);
    prev_t = t;
    prev_gap = gap;
  }
  pi += prev_gap * (trajectory.horizon - prev_t);
  return pi;
}

std::optional<double> pir(double heuristic_pi, double baseline_pi) {
  if (baseline_pi == 0.0) return std::nullopt;
  return heuristic_pi / baseline_pi;
}

std::optional<double> time_to_gap(const Trajectory& trajectory, double g) {
  if (g >= 1.0) return 0.0;
  double prev_t = 0.0;
  double prev_gap = 1.0;
  for (const auto& [t, gap] : trajectory.gap_points()) {
    if (gap <= g) {
      // Interpolate within the segment (prev_t, prev_gap) -> (t, gap).
      if (prev_gap <= g) return prev_t;
      const double frac = (prev_gap - g) / (prev_gap - gap);
      return prev_t + frac * (t - prev_t);
    }
    prev_t = t;
    prev_gap = gap;
  }
  return std::nullopt;
}

std::optional<SpeedUp> best_speed_up(const Trajectory& heuristic, const Trajectory& baseline) {
  constexpr int kGridSize = 100;
  const double lo = std::max(heuristic.min_gap(), baseline.min_gap());
  std::optional<SpeedUp> best;
  for (int i = 0; i < kGridSize; ++i) {
    const double g = lo + (1.0 - lo) * static_cast<double>(i) / (kGridSize - 1);
    const auto t_heur = time_to_gap(heuristic, g);
    const auto t_base = time_to_gap(baseline, g);
    if (!t_heur || !t_base || *t_heur <= 0.0) continue;
    const double ratio = *t_base / *t_heur;
    // Grid is ascending, so the first g attaining the maximum is the smallest.
    if (!best || ratio > best->speed_up + 1e-12) best = SpeedUp{ratio, g};
  }
  return best;
}

double action_accuracy(const std::vector<std::pair<int, int>>& fixes,
                       const std::vector<int>& reference_classes,
                       const std::vector<int>& object_ids) {
  if (fixes.empty()) return 1.0;
  if (reference_classes.size() != object_ids.size())
    throw std::invalid_argument("reference classes and object ids differ in length");
  int matched = 0;
  for (const auto& [v, k] : fixes) {
    for (size_t i = 0; i < object_ids.size(); ++i) {
      if (object_ids[i] == v) {
        if (reference_classes[i] == k) ++matched;
        break;
      }
    }
  }
  return static_cast<double>(matched) / static_cast<double>(fixes.size());
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = static_cast<size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace entrofix
