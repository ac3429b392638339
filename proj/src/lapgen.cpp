#include "entrofix/lapgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "entrofix/errors.hpp"
#include "entrofix/mps_io.hpp"

namespace entrofix {

namespace {

struct Leg {
  int origin = 0;
  int dep = 0;
  int dest = 0;
  int arr = 0;
  int demand = 1;
};

// One consist (a config worth of locomotives) moving along a closed walk:
// home station at period 0, train legs forward in time, ground idling in
// between and across the weekly seam back to home.
struct Walk {
  int config = 0;
  int home = 0;
  std::vector<Leg> legs;
};

int pick_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

// A station different from every entry of `avoid`; -1 if none exists.
int pick_station(std::mt19937_64& rng, int stations, std::vector<int> avoid) {
  std::vector<int> pool;
  for (int s = 0; s < stations; ++s)
    if (std::find(avoid.begin(), avoid.end(), s) == avoid.end()) pool.push_back(s);
  if (pool.empty()) return -1;
  return pool[static_cast<size_t>(rng() % pool.size())];
}

bool build_walk(std::mt19937_64& rng, const LapParams& params, int config, int legs_wanted,
                Walk& out) {
  const int last_period = params.periods - 1;
  for (int attempt = 0; attempt < 20; ++attempt) {
    Walk walk;
    walk.config = config;
    walk.home = pick_int(rng, 0, params.stations - 1);
    int station = walk.home;
    int period = pick_int(rng, 0, params.periods / 4);
    bool ok = true;
    for (int i = 0; i < legs_wanted; ++i) {
      const int remaining_after = legs_wanted - i - 1;
      int gap = pick_int(rng, 0, 1);
      int travel = pick_int(rng, 1, 3);
      if (period + gap + travel + remaining_after > last_period) {
        gap = 0;
        travel = 1;
        if (period + travel + remaining_after > last_period) {
          ok = false;
          break;
        }
      }
      Leg leg;
      leg.origin = station;
      leg.dep = period + gap;
      leg.arr = leg.dep + travel;
      if (i == legs_wanted - 1) {
        leg.dest = walk.home;
        if (leg.dest == station) {
          ok = false;  // the previous leg landed at home; retry the walk
          break;
        }
      } else if (i == legs_wanted - 2) {
        leg.dest = pick_station(rng, params.stations, {station, walk.home});
      } else {
        leg.dest = pick_station(rng, params.stations, {station});
      }
      if (leg.dest < 0) {
        ok = false;
        break;
      }
      const int power = params.configs[static_cast<size_t>(config)].power;
      leg.demand = pick_int(rng, params.demand_min, std::min(params.demand_max, power));
      walk.legs.push_back(leg);
      station = leg.dest;
      period = leg.arr;
    }
    if (ok) {
      out = std::move(walk);
      return true;
    }
  }
  return false;
}

bool build_walks(std::mt19937_64& rng, const LapParams& params, std::vector<Walk>& out) {
  // Consists too weak for the smallest admissible demand can never serve a
  // leg, so only draw from the others. The draw is biased toward consists of
  // the first locomotive type: types beyond the first end up scarce in the
  // fleet, which makes the cheaper multi-type consists genuinely contested
  // instead of freely available.
  std::vector<int> pool;
  for (int k = 0; k < static_cast<int>(params.configs.size()); ++k) {
    const LapConfig& config = params.configs[static_cast<size_t>(k)];
    if (config.power < params.demand_min) continue;
    bool first_type_only = true;
    for (size_t tau = 1; tau < config.type_counts.size(); ++tau)
      if (config.type_counts[tau] > 0) first_type_only = false;
    const int weight = first_type_only ? (config.power >= 2 ? 6 : 2) : 1;
    pool.insert(pool.end(), static_cast<size_t>(weight), k);
  }
  out.clear();
  int placed = 0;
  while (placed < params.trains) {
    const int remaining = params.trains - placed;
    // Longer walks idle less, which keeps the parking capacities tight.
    int legs = std::min(remaining, pick_int(rng, 3, 5));
    if (remaining - legs == 1) legs = legs >= 3 ? legs - 1 : legs + 1;
    const int config = pool[static_cast<size_t>(rng() % pool.size())];
    Walk walk;
    if (!build_walk(rng, params, config, legs, walk)) return false;
    out.push_back(std::move(walk));
    placed += legs;
  }
  return true;
}

void check_params(const LapParams& params) {
  if (params.stations < 3)
    throw std::invalid_argument("need at least 3 stations to close walks without self-loops");
  if (params.periods < 8) throw std::invalid_argument("need at least 8 periods");
  if (params.trains < 1) throw std::invalid_argument("need at least one train");
  if (params.configs.empty()) throw std::invalid_argument("need at least one config");
  if (params.loco_types < 1) throw std::invalid_argument("need at least one locomotive type");
  int max_power = 0;
  for (const LapConfig& c : params.configs) {
    if (static_cast<int>(c.type_counts.size()) != params.loco_types)
      throw std::invalid_argument("config type_counts must match loco_types");
    max_power = std::max(max_power, c.power);
  }
  if (params.demand_min < 1 || params.demand_min > params.demand_max ||
      params.demand_max > max_power)
    throw std::invalid_argument("demand range must lie in [1, max config power]");
  if (params.perturbation_rate < 0 || params.perturbation_rate > 1)
    throw std::invalid_argument("perturbation_rate must lie in [0,1]");
  if (params.parking_capacity < 1) throw std::invalid_argument("need at least one parking slot");
}

LapInstance assemble(const LapParams& params, const std::vector<Walk>& walks, int week) {
  const int S = params.stations;
  const int P = params.periods;
  const int T = params.loco_types;
  const int K = static_cast<int>(params.configs.size());

  LapInstance instance;
  instance.week = week;
  instance.stations = S;
  instance.periods = P;

  instance.fleet.assign(static_cast<size_t>(T), 0);
  for (const Walk& walk : walks)
    for (int tau = 0; tau < T; ++tau)
      instance.fleet[tau] += params.configs[static_cast<size_t>(walk.config)].type_counts[tau];

  for (const Walk& walk : walks)
    for (const Leg& leg : walk.legs) {
      TrainArc arc;
      arc.id = static_cast<int>(instance.arcs.size());
      arc.origin = leg.origin;
      arc.dep_period = leg.dep;
      arc.dest = leg.dest;
      arc.arr_period = leg.arr;
      arc.demand = leg.demand;
      arc.witness_config = walk.config;
      instance.arcs.push_back(arc);
    }

  Model& model = instance.model;
  model.name = "lap_t" + std::to_string(params.trains) + "_s" + std::to_string(params.seed) +
               "_w" + (week < 10 ? "0" : "") + std::to_string(week);

  // Config binaries, one group per arc over the configs strong enough for it.
  std::vector<std::vector<int>> member_var(instance.arcs.size(),
                                           std::vector<int>(static_cast<size_t>(K), -1));
  for (const TrainArc& arc : instance.arcs) {
    OneHotGroup group;
    group.object_id = arc.id;
    LinearConstraint row;
    row.name = "oh_v" + std::to_string(arc.id);
    row.sense = Sense::eq;
    row.rhs = 1.0;
    for (int k = 0; k < K; ++k) {
      if (params.configs[static_cast<size_t>(k)].power < arc.demand) continue;
      Variable var;
      var.id = model.num_variables();
      var.name = "x_v" + std::to_string(arc.id) + "_k" + std::to_string(k);
      var.lower = 0.0;
      var.upper = 1.0;
      var.kind = VarKind::binary;
      member_var[static_cast<size_t>(arc.id)][static_cast<size_t>(k)] = var.id;
      model.variables.push_back(std::move(var));
      model.objective.push_back(params.configs[static_cast<size_t>(k)].cost);
      group.members.emplace_back(k, model.num_variables() - 1);
      row.terms.emplace_back(model.num_variables() - 1, 1.0);
    }
    model.groups.push_back(std::move(group));
    model.constraints.push_back(std::move(row));
  }

  // Witness ground usage per (type, station, period): each walk idles its
  // own consist between legs and across the seam.
  auto flow_index = [&](int tau, int s, int p) { return (tau * S + s) * P + p; };
  std::vector<int> witness_ground(static_cast<size_t>(T * S * P), 0);
  for (const Walk& walk : walks) {
    const std::vector<int>& counts = params.configs[static_cast<size_t>(walk.config)].type_counts;
    auto idle = [&](int s, int from, int to) {
      for (int p = from; p < to; ++p)
        for (int tau = 0; tau < T; ++tau)
          witness_ground[static_cast<size_t>(flow_index(tau, s, p))] += counts[tau];
    };
    int station = walk.home;
    int period = 0;
    for (const Leg& leg : walk.legs) {
      idle(station, period, leg.dep);
      station = leg.dest;
      period = leg.arr;
    }
    idle(station, period, P);
  }

  // Integer ground-arc flows; arc p covers (s,p) -> (s,(p+1) mod P). Parking
  // is scarce: the capacity is the configured slot count, raised where the
  // witness itself needs more so the certificate stays feasible.
  std::vector<int> flow_ids(static_cast<size_t>(T * S * P), -1);
  for (int tau = 0; tau < T; ++tau)
    for (int s = 0; s < S; ++s)
      for (int p = 0; p < P; ++p) {
        Variable var;
        var.id = model.num_variables();
        var.name = "f_t" + std::to_string(tau) + "_s" + std::to_string(s) + "_p" +
                   std::to_string(p);
        var.lower = 0.0;
        var.upper = static_cast<double>(
            std::max(params.parking_capacity,
                     witness_ground[static_cast<size_t>(flow_index(tau, s, p))]));
        var.kind = VarKind::integer;
        flow_ids[static_cast<size_t>(flow_index(tau, s, p))] = var.id;
        model.variables.push_back(std::move(var));
        model.objective.push_back(params.idle_cost);
      }

  // Flow conservation per (node, type): inflow - outflow = 0.
  for (int tau = 0; tau < T; ++tau)
    for (int s = 0; s < S; ++s)
      for (int p = 0; p < P; ++p) {
        LinearConstraint row;
        row.name = "flow_t" + std::to_string(tau) + "_s" + std::to_string(s) + "_p" +
                   std::to_string(p);
        row.sense = Sense::eq;
        row.rhs = 0.0;
        row.terms.emplace_back(flow_ids[static_cast<size_t>(flow_index(tau, s, (p + P - 1) % P))],
                               1.0);
        row.terms.emplace_back(flow_ids[static_cast<size_t>(flow_index(tau, s, p))], -1.0);
        for (const TrainArc& arc : instance.arcs) {
          const bool arrives = arc.dest == s && arc.arr_period == p;
          const bool departs = arc.origin == s && arc.dep_period == p;
          if (!arrives && !departs) continue;
          for (int k = 0; k < K; ++k) {
            const int var = member_var[static_cast<size_t>(arc.id)][static_cast<size_t>(k)];
            if (var < 0) continue;
            const int count = params.configs[static_cast<size_t>(k)].type_counts[tau];
            if (count == 0) continue;
            double coef = 0.0;
            if (arrives) coef += count;
            if (departs) coef -= count;
            if (coef != 0.0) row.terms.emplace_back(var, coef);
          }
        }
        model.constraints.push_back(std::move(row));
      }

  // Fleet rows at the weekly seam, where every locomotive sits on a ground arc.
  for (int tau = 0; tau < T; ++tau) {
    LinearConstraint row;
    row.name = "fleet_t" + std::to_string(tau);
    row.sense = Sense::le;
    row.rhs = static_cast<double>(instance.fleet[static_cast<size_t>(tau)]);
    for (int s = 0; s < S; ++s)
      row.terms.emplace_back(flow_ids[static_cast<size_t>(flow_index(tau, s, P - 1))], 1.0);
    model.constraints.push_back(std::move(row));
  }

  // Witness: each walk's own config on its legs, idling on the ground grid
  // computed above.
  instance.witness.assign(static_cast<size_t>(model.num_variables()), 0.0);
  int next_arc = 0;
  for (const Walk& walk : walks)
    for (const Leg& leg : walk.legs) {
      (void)leg;
      const int var =
          member_var[static_cast<size_t>(next_arc)][static_cast<size_t>(walk.config)];
      instance.witness[static_cast<size_t>(var)] = 1.0;
      ++next_arc;
    }
  for (int tau = 0; tau < T; ++tau)
    for (int s = 0; s < S; ++s)
      for (int p = 0; p < P; ++p) {
        const size_t index = static_cast<size_t>(flow_index(tau, s, p));
        instance.witness[static_cast<size_t>(flow_ids[index])] = witness_ground[index];
      }

  const std::vector<std::string> problems = validate(model);
  if (!problems.empty())
    throw ConstructionFailure("generated model failed validation: " + problems.front());
  const EvalResult witness_eval = evaluate(model, instance.witness);
  if (!witness_eval.feasible)
    throw ConstructionFailure("construction witness is infeasible; generator bug");
  instance.witness_objective = witness_eval.objective;
  return instance;
}

void perturb_walks(std::mt19937_64& rng, const LapParams& params, std::vector<Walk>& walks) {
  const int arcs_to_change =
      static_cast<int>(std::ceil(params.perturbation_rate * params.trains));
  if (arcs_to_change == 0) return;

  // Reroute consecutive leg pairs through a fresh intermediate station.
  struct Candidate {
    int walk;
    int leg;  // reroutes the destination of `leg` = origin of `leg`+1
  };
  std::vector<Candidate> candidates;
  for (int w = 0; w < static_cast<int>(walks.size()); ++w)
    for (int i = 0; i + 1 < static_cast<int>(walks[w].legs.size()); ++i)
      candidates.push_back(Candidate{w, i});
  for (int i = static_cast<int>(candidates.size()) - 1; i > 0; --i)
    std::swap(candidates[static_cast<size_t>(i)],
              candidates[rng() % static_cast<std::uint64_t>(i + 1)]);

  const int pairs_wanted = (arcs_to_change + 1) / 2;
  std::vector<std::vector<char>> used(walks.size());
  for (size_t w = 0; w < walks.size(); ++w) used[w].assign(walks[w].legs.size(), 0);
  int rerouted_arcs = 0;
  int pairs_done = 0;
  for (const Candidate& c : candidates) {
    if (pairs_done >= pairs_wanted) break;
    Walk& walk = walks[static_cast<size_t>(c.walk)];
    if (used[static_cast<size_t>(c.walk)][static_cast<size_t>(c.leg)] ||
        used[static_cast<size_t>(c.walk)][static_cast<size_t>(c.leg + 1)])
      continue;
    Leg& first = walk.legs[static_cast<size_t>(c.leg)];
    Leg& second = walk.legs[static_cast<size_t>(c.leg + 1)];
    const int fresh =
        pick_station(rng, params.stations, {first.dest, first.origin, second.dest});
    if (fresh < 0) continue;
    first.dest = fresh;
    second.origin = fresh;
    used[static_cast<size_t>(c.walk)][static_cast<size_t>(c.leg)] = 1;
    used[static_cast<size_t>(c.walk)][static_cast<size_t>(c.leg + 1)] = 1;
    rerouted_arcs += 2;
    ++pairs_done;
  }

  // Resample demand on untouched arcs.
  struct LegRef {
    int walk;
    int leg;
  };
  std::vector<LegRef> untouched;
  for (int w = 0; w < static_cast<int>(walks.size()); ++w)
    for (int i = 0; i < static_cast<int>(walks[w].legs.size()); ++i)
      if (!used[static_cast<size_t>(w)][static_cast<size_t>(i)])
        untouched.push_back(LegRef{w, i});
  for (int i = static_cast<int>(untouched.size()) - 1; i > 0; --i)
    std::swap(untouched[static_cast<size_t>(i)],
              untouched[rng() % static_cast<std::uint64_t>(i + 1)]);
  const int resamples = std::min<int>(arcs_to_change, static_cast<int>(untouched.size()));
  for (int i = 0; i < resamples; ++i) {
    Walk& walk = walks[static_cast<size_t>(untouched[static_cast<size_t>(i)].walk)];
    Leg& leg = walk.legs[static_cast<size_t>(untouched[static_cast<size_t>(i)].leg)];
    const int power = params.configs[static_cast<size_t>(walk.config)].power;
    leg.demand = pick_int(rng, params.demand_min, std::min(params.demand_max, power));
  }
}

}  // namespace

std::vector<LapConfig> default_configs() {
  // Types: A (power 1, cost 1.0), B (power 2, cost 1.8); additive multisets.
  return {
      {"A", {1, 0}, 1, 1.0},  {"B", {0, 1}, 2, 1.8},   {"AA", {2, 0}, 2, 2.0},
      {"AB", {1, 1}, 3, 2.8}, {"BB", {0, 2}, 4, 3.6},  {"AAB", {2, 1}, 4, 3.8},
  };
}

LapInstance generate(const LapParams& params) {
  return generate_weekly_series(params, 1).front();
}

std::vector<LapInstance> generate_weekly_series(const LapParams& params, int weeks) {
  check_params(params);
  if (weeks < 1) throw std::invalid_argument("weeks must be >= 1");

  for (int attempt = 0; attempt < 10; ++attempt) {
    const std::uint64_t sub_seed =
        params.seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(attempt);
    std::mt19937_64 rng(sub_seed);
    std::vector<Walk> walks;
    if (!build_walks(rng, params, walks)) continue;
    std::vector<LapInstance> series;
    series.push_back(assemble(params, walks, 1));
    for (int week = 2; week <= weeks; ++week) {
      perturb_walks(rng, params, walks);
      series.push_back(assemble(params, walks, week));
    }
    return series;
  }
  throw ConstructionFailure("could not place " + std::to_string(params.trains) +
                            " train arcs on " + std::to_string(params.stations) + "x" +
                            std::to_string(params.periods) + " network after 10 attempts");
}

void write_instance(const LapInstance& instance, const std::string& prefix) {
  write_file(prefix + ".mps", write_mps(instance.model));
  write_file(prefix + ".groups.json", write_groups(instance.model));

  nlohmann::ordered_json meta;
  meta["week"] = instance.week;
  meta["stations"] = instance.stations;
  meta["periods"] = instance.periods;
  meta["fleet"] = instance.fleet;
  meta["witness_objective"] = instance.witness_objective;
  nlohmann::ordered_json arcs = nlohmann::ordered_json::array();
  for (const TrainArc& arc : instance.arcs) {
    nlohmann::ordered_json aj;
    aj["id"] = arc.id;
    aj["origin"] = arc.origin;
    aj["dep"] = arc.dep_period;
    aj["dest"] = arc.dest;
    aj["arr"] = arc.arr_period;
    aj["demand"] = arc.demand;
    aj["witness_config"] = arc.witness_config;
    arcs.push_back(std::move(aj));
  }
  meta["arcs"] = std::move(arcs);
  write_file(prefix + ".meta.json", meta.dump() + "\n");
}

}  // namespace entrofix
