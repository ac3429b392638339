#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entrofix/model.hpp"

namespace entrofix {

// One locomotive multiset assignable to a train arc.
struct LapConfig {
  std::string name;
  std::vector<int> type_counts;  // locomotives per type
  int power = 0;                 // additive pulling power
  double cost = 0.0;
};

// {A}, {B}, {AA}, {AB}, {BB}, {AAB} over types A (power 1, cost 1.0) and
// B (power 2, cost 1.8), with additive power and cost.
std::vector<LapConfig> default_configs();

struct LapParams {
  int stations = 4;
  int periods = 42;  // per week, cyclic
  int trains = 60;
  int loco_types = 2;
  std::vector<LapConfig> configs = default_configs();
  int demand_min = 1;
  int demand_max = 4;
  double idle_cost = 0.05;  // per ground arc per locomotive
  // Parking slots per station, period and type; the witness may exceed this
  // locally, in which case that arc's capacity is raised to keep it feasible.
  int parking_capacity = 2;
  double perturbation_rate = 0.1;
  std::uint64_t seed = 7;
};

struct TrainArc {
  int id = -1;
  int origin = 0;
  int dep_period = 0;
  int dest = 0;
  int arr_period = 0;  // > dep_period; train arcs never wrap
  int demand = 1;
  int witness_config = 0;  // config the construction itself used
};

// A generated weekly instance: the model plus the network metadata and the
// construction's own feasible assignment (the feasibility certificate).
struct LapInstance {
  Model model;
  std::vector<TrainArc> arcs;
  Assignment witness;
  double witness_objective = 0.0;
  int week = 1;
  int stations = 0;
  int periods = 0;
  std::vector<int> fleet;  // per type, equal to the construction totals
};

// Routes closed consist walks over the cyclic time-space network until
// `trains` train arcs exist, then emits one-hot config groups per arc,
// per-(node,type) flow conservation rows over integer ground-arc flows, and
// fleet rows tight at the construction totals. Throws ConstructionFailure
// after 10 sub-seed retries.
LapInstance generate(const LapParams& params);

// Week 1 is generate(params); every later week resamples demand on a
// perturbation_rate fraction of arcs and reroutes a perturbation_rate
// fraction of train arcs through fresh intermediate stations, keeping the
// walk structure (and so feasibility) intact.
std::vector<LapInstance> generate_weekly_series(const LapParams& params, int weeks);

// Writes <prefix>.mps, <prefix>.groups.json and <prefix>.meta.json.
void write_instance(const LapInstance& instance, const std::string& prefix);

}  // namespace entrofix
