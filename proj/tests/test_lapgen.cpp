#include <doctest.h>

#include <filesystem>
#include <set>
#include <tuple>

#include "entrofix/errors.hpp"
#include "entrofix/lapgen.hpp"
#include "entrofix/mps_io.hpp"

using namespace entrofix;

namespace {

LapParams small_params() {
  LapParams params;
  params.stations = 3;
  params.periods = 12;
  params.trains = 10;
  params.seed = 21;
  return params;
}

}  // namespace

TEST_CASE("generated instances validate and carry a feasible witness") {
  const LapInstance instance = generate(small_params());
  CHECK(validate(instance.model).empty());
  CHECK(instance.arcs.size() == 10);
  CHECK(instance.model.num_groups() == 10);

  const EvalResult eval = evaluate(instance.model, instance.witness);
  CHECK(eval.feasible);
  CHECK(eval.objective == doctest::Approx(instance.witness_objective).epsilon(1e-9));

  // Arc invariants.
  for (const TrainArc& arc : instance.arcs) {
    CHECK(arc.arr_period > arc.dep_period);
    CHECK(arc.origin != arc.dest);
    CHECK(arc.origin < instance.stations);
    CHECK(arc.dest < instance.stations);
  }
}

TEST_CASE("groups exclude configurations weaker than the arc demand") {
  const LapParams params = small_params();
  const LapInstance instance = generate(params);
  for (size_t v = 0; v < instance.arcs.size(); ++v) {
    const OneHotGroup& group = instance.model.groups[v];
    CHECK_FALSE(group.members.empty());
    for (const auto& [label, var] : group.members) {
      CHECK(params.configs[label].power >= instance.arcs[v].demand);
    }
  }
  // Total assignment binaries never exceed trains * |configs|.
  int binaries = 0;
  for (const Variable& v : instance.model.variables)
    if (v.kind == VarKind::binary) ++binaries;
  CHECK(binaries <= params.trains * static_cast<int>(params.configs.size()));
}

TEST_CASE("flow conservation holds exactly for the witness") {
  const LapInstance instance = generate(small_params());
  // Every flow-conservation row is an equality; evaluate() already enforces
  // them within tolerance. Do it in exact integer arithmetic here.
  for (const LinearConstraint& row : instance.model.constraints) {
    if (row.name.rfind("flow_", 0) != 0) continue;
    REQUIRE(row.sense == Sense::eq);
    long long lhs = 0;
    for (const auto& [var, coef] : row.terms) {
      const double value = instance.witness[var];
      REQUIRE(value == static_cast<long long>(value));  // integral witness
      lhs += static_cast<long long>(coef) * static_cast<long long>(value);
    }
    CHECK(lhs == static_cast<long long>(row.rhs));
  }
}

TEST_CASE("the same parameters reproduce byte-identical files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "entrofix_lapgen_test";
  fs::create_directories(dir);
  const LapInstance a = generate(small_params());
  const LapInstance b = generate(small_params());
  write_instance(a, (dir / "a").string());
  write_instance(b, (dir / "b").string());
  CHECK(read_file((dir / "a.mps").string()) == read_file((dir / "b.mps").string()));
  CHECK(read_file((dir / "a.groups.json").string()) ==
        read_file((dir / "b.groups.json").string()));
  CHECK(read_file((dir / "a.meta.json").string()) == read_file((dir / "b.meta.json").string()));

  // The written pair loads back into a valid, witness-feasible model.
  const Model loaded = load_instance((dir / "a").string());
  CHECK(loaded.num_variables() == a.model.num_variables());
  CHECK(evaluate(loaded, a.witness).feasible);
  fs::remove_all(dir);
}

TEST_CASE("weekly series shares most train arcs between consecutive weeks") {
  LapParams params = small_params();
  params.trains = 20;
  params.periods = 16;
  const auto series = generate_weekly_series(params, 5);
  REQUIRE(series.size() == 5);
  for (int w = 0; w < 5; ++w) CHECK(series[w].week == w + 1);

  auto arc_key = [](const TrainArc& arc) {
    return std::tuple(arc.origin, arc.dep_period, arc.dest, arc.arr_period, arc.demand);
  };
  for (size_t w = 1; w < series.size(); ++w) {
    std::multiset<std::tuple<int, int, int, int, int>> prev, cur;
    for (const TrainArc& arc : series[w - 1].arcs) prev.insert(arc_key(arc));
    int shared = 0;
    for (const TrainArc& arc : series[w].arcs) {
      const auto key = arc_key(arc);
      auto it = prev.find(key);
      if (it != prev.end()) {
        prev.erase(it);
        ++shared;
      }
    }
    // rate 0.1 changes about 10% of arcs (reroutes + demand resamples).
    CHECK(shared >= static_cast<int>(0.8 * params.trains));
  }
  // Later weeks stay feasible.
  for (const LapInstance& instance : series)
    CHECK(evaluate(instance.model, instance.witness).feasible);
}

TEST_CASE("zero perturbation keeps every week identical") {
  LapParams params = small_params();
  params.perturbation_rate = 0.0;
  const auto series = generate_weekly_series(params, 3);
  REQUIRE(series.size() == 3);
  // The model name carries the week number; everything after it must match.
  const auto body = [](const Model& model) {
    const std::string mps = write_mps(model);
    return mps.substr(mps.find('\n'));
  };
  const std::string mps = body(series[0].model);
  CHECK(body(series[1].model) == mps);
  CHECK(body(series[2].model) == mps);
}

TEST_CASE("a single week equals generate()") {
  const auto series = generate_weekly_series(small_params(), 1);
  REQUIRE(series.size() == 1);
  CHECK(write_mps(series[0].model) == write_mps(generate(small_params()).model));
}

TEST_CASE("invalid parameters are rejected up front") {
  LapParams params = small_params();
  params.stations = 2;
  CHECK_THROWS_AS(generate(params), std::invalid_argument);
  params = small_params();
  params.periods = 4;
  CHECK_THROWS_AS(generate(params), std::invalid_argument);
  params = small_params();
  params.trains = 0;
  CHECK_THROWS_AS(generate(params), std::invalid_argument);
  params = small_params();
  params.demand_max = 99;  // beyond every config's power
  CHECK_THROWS_AS(generate(params), std::invalid_argument);
  params = small_params();
  params.perturbation_rate = 1.5;
  CHECK_THROWS_AS(generate(params), std::invalid_argument);
}

TEST_CASE("default configuration set matches the documented family") {
  const auto configs = default_configs();
  REQUIRE(configs.size() == 6);
  CHECK(configs[0].name == "A");
  CHECK(configs[0].power == 1);
  CHECK(configs[0].cost == doctest::Approx(1.0));
  CHECK(configs[1].name == "B");
  CHECK(configs[1].power == 2);
  CHECK(configs[1].cost == doctest::Approx(1.8));
  CHECK(configs[5].name == "AAB");
  CHECK(configs[5].power == 4);
  CHECK(configs[5].cost == doctest::Approx(3.8));
  for (const LapConfig& c : configs) CHECK(c.type_counts.size() == 2);
}

TEST_CASE("meta sidecar lists the arcs") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "entrofix_lapgen_meta";
  fs::create_directories(dir);
  const LapInstance instance = generate(small_params());
  write_instance(instance, (dir / "m").string());
  const std::string meta = read_file((dir / "m.meta.json").string());
  CHECK(meta.find("\"week\"") != std::string::npos);
  CHECK(meta.find("\"arcs\"") != std::string::npos);
  CHECK(meta.find("\"witness_objective\"") != std::string::npos);
  fs::remove_all(dir);
}
