#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entrofix/bnb.hpp"
#include "entrofix/errors.hpp"
#include "entrofix/experiment.hpp"
#include "entrofix/forest.hpp"
#include "entrofix/lapgen.hpp"
#include "entrofix/mps_io.hpp"
#include "entrofix/policy.hpp"

namespace {

namespace fs = std::filesystem;
using namespace entrofix;

struct SolverFlags {
  std::int64_t nodes = 20000;
  std::uint64_t seed = 0;
  std::string clock = "node";
  double wall_limit = 0.0;
  double gap = 0.0;
  bool no_heuristic = false;
  int heuristic_depth = 20;
  bool incumbents_only = false;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& flags) {
  cmd->add_option("--nodes", flags.nodes, "node budget")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", flags.seed, "run seed recorded in the log");
  cmd->add_option("--clock", flags.clock, "run clock: node (deterministic) or wall")
      ->check(CLI::IsMember({"node", "wall"}));
  cmd->add_option("--wall-limit", flags.wall_limit, "wall-clock limit in seconds (0: off)");
  cmd->add_option("--gap", flags.gap, "stop once the proven relative gap is this small");
  cmd->add_flag("--no-heuristic", flags.no_heuristic, "disable the rounding heuristic");
  cmd->add_option("--heuristic-depth", flags.heuristic_depth,
                  "deepest node the rounding heuristic runs at");
  cmd->add_flag("--incumbents-only", flags.incumbents_only,
                "record improving solutions only");
}

SolverConfig to_solver_config(const SolverFlags& flags) {
  SolverConfig config;
  config.node_limit = flags.nodes;
  config.seed = flags.seed;
  config.clock = flags.clock == "wall" ? RunClock::wall : RunClock::node;
  config.wall_limit_s = flags.wall_limit;
  config.rel_gap_tol = flags.gap;
  config.rounding_heuristic = !flags.no_heuristic;
  config.heuristic_max_depth = flags.heuristic_depth;
  config.incumbents_only = flags.incumbents_only;
  return config;
}

struct ForestFlags {
  int trees = 10;
  int max_depth = 6;
  int split_trigger = 20;
  int feature_subsample = 2;
  int reservoir = 32;
  std::uint64_t seed = 0;
};

void add_forest_flags(CLI::App* cmd, ForestFlags& flags) {
  cmd->add_option("--trees", flags.trees, "trees in the forest")->check(CLI::PositiveNumber);
  cmd->add_option("--max-depth", flags.max_depth, "maximum tree depth");
  cmd->add_option("--split-trigger", flags.split_trigger,
                  "samples a leaf needs before it may split");
  cmd->add_option("--feature-subsample", flags.feature_subsample,
                  "feature dimensions per tree (of 4)")
      ->check(CLI::Range(1, 4));
  cmd->add_option("--reservoir", flags.reservoir, "threshold candidates kept per leaf");
  cmd->add_option("--forest-seed", flags.seed, "forest rng seed");
}

ForestParams to_forest_params(const ForestFlags& flags) {
  ForestParams params;
  params.trees = flags.trees;
  params.max_depth = flags.max_depth;
  params.split_trigger = flags.split_trigger;
  params.feature_subsample = flags.feature_subsample;
  params.reservoir_capacity = flags.reservoir;
  params.seed = flags.seed;
  return params;
}

struct PolicyFlags {
  int t_min = 3;
  bool no_online_update = false;
  bool one_shot_threshold = false;
};

void add_policy_flags(CLI::App* cmd, PolicyFlags& flags) {
  cmd->add_option("--t-min", flags.t_min,
                  "recorded solutions required before any fix")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-online-update", flags.no_online_update,
                "freeze the stability model during the run");
  cmd->add_flag("--one-shot-threshold", flags.one_shot_threshold,
                "threshold policy fires at the first incumbent only");
}

PolicyOptions to_policy_options(const PolicyFlags& flags) {
  PolicyOptions options;
  options.t_min = flags.t_min;
  options.online_update = !flags.no_online_update;
  options.one_shot_threshold = flags.one_shot_threshold;
  return options;
}

int cmd_gen(const LapParams& params, int weeks, const std::string& out_dir) {
  const std::vector<LapInstance> series = generate_weekly_series(params, weeks);
  fs::create_directories(out_dir);
  for (const LapInstance& instance : series) {
    char name[16];
    std::snprintf(name, sizeof name, "week%02d", instance.week);
    const std::string prefix = (fs::path(out_dir) / name).string();
    write_instance(instance, prefix);
    int binaries = 0;
    for (const Variable& v : instance.model.variables) binaries += v.kind == VarKind::binary;
    std::printf("%s: %d arcs, %d binaries, %d rows, witness objective %.6g\n", prefix.c_str(),
                static_cast<int>(instance.arcs.size()), binaries,
                instance.model.num_constraints(), instance.witness_objective);
  }
  std::printf("wrote %d weekly instances under %s\n", weeks, out_dir.c_str());
  return 0;
}

int cmd_train(const std::string& instance, const SolverFlags& solver_flags,
              const ForestFlags& forest_flags, const std::string& model_out,
              const std::string& dataset_out) {
  const Model model = load_instance(instance);
  const TrainResult result =
      train_on_instance(model, to_solver_config(solver_flags), to_forest_params(forest_flags));
  write_file(model_out, result.forest_json);
  if (!dataset_out.empty()) write_file(dataset_out, dataset_to_csv(result.dataset));
  std::printf("baseline solve: %.3f s (%lld nodes, status %s)\n", result.solve_seconds,
              static_cast<long long>(result.run.nodes_processed),
              to_string(result.run.status).c_str());
  std::printf("forest fit: %.3f s over %zu samples, training accuracy %.4f\n",
              result.fit_seconds, result.dataset.size(), result.accuracy);
  std::printf("training time: %.3f s total; wrote %s\n",
              result.solve_seconds + result.fit_seconds, model_out.c_str());
  return 0;
}

int cmd_solve(const std::string& instance, const std::string& policy_text,
              const std::string& model_path, const SolverFlags& solver_flags,
              const PolicyFlags& policy_flags, const std::string& out_path) {
  const PolicyKind policy = parse_policy(policy_text);
  if (policy.family == PolicyKind::Family::threshold && model_path.empty()) {
    std::fprintf(stderr, "error: policy '%s' needs --model <stability model>\n",
                 policy_text.c_str());
    return 1;
  }
  std::optional<OnlineForest> forest;
  if (!model_path.empty()) forest = OnlineForest::load(read_file(model_path));

  const Model model = load_instance(instance);
  RunRecord record = run_policy(model, policy, to_policy_options(policy_flags), forest,
                                to_solver_config(solver_flags));

  std::ostringstream log;
  write_run_log(record, log, solver_flags.clock == "wall");
  if (out_path.empty()) {
    std::cout << log.str();
  } else {
    write_file(out_path, log.str());
  }
  if (record.has_incumbent)
    std::fprintf(stderr, "status %s, objective %.10g, %lld nodes, %zu fixes\n",
                 to_string(record.status).c_str(), record.best_objective,
                 static_cast<long long>(record.nodes_processed), record.fixes().size());
  else
    std::fprintf(stderr, "status %s, no solution, %lld nodes\n",
                 to_string(record.status).c_str(),
                 static_cast<long long>(record.nodes_processed));
  if (record.status == RunStatus::no_solution) return 2;
  if (record.status == RunStatus::restricted_infeasible) return 3;
  return 0;
}

int cmd_report(const std::string& logs_dir, const std::string& out_dir,
               const std::string& train_instance) {
  const ReportFiles report = report_from_logs(logs_dir, train_instance);
  fs::create_directories(fs::path(out_dir) / "plots");
  write_file((fs::path(out_dir) / "report.csv").string(), report.report_csv);
  write_file((fs::path(out_dir) / "quartiles.csv").string(), report.quartiles_csv);
  for (const auto& [name, tsv] : report.plots)
    write_file((fs::path(out_dir) / "plots" / name).string(), tsv);
  std::printf("wrote report.csv and quartiles.csv under %s\n", out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recurrent MIP toolkit: weekly instances, stability-driven fixing policies, benchmarks"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a weekly instance series");
  LapParams lap_params;
  int weeks = 10;
  std::string gen_out = "instances";
  gen->add_option("--out", gen_out, "output directory")->envname("ENTROFIX_OUT");
  gen->add_option("--weeks", weeks, "weeks to generate")->check(CLI::PositiveNumber);
  gen->add_option("--stations", lap_params.stations, "stations in the network");
  gen->add_option("--periods", lap_params.periods, "periods per week");
  gen->add_option("--trains", lap_params.trains, "train arcs per week");
  gen->add_option("--seed", lap_params.seed, "generator seed");
  gen->add_option("--rate", lap_params.perturbation_rate, "weekly perturbation rate");
  gen->add_option("--demand-min", lap_params.demand_min, "demand lower bound");
  gen->add_option("--demand-max", lap_params.demand_max, "demand upper bound");
  gen->add_option("--idle-cost", lap_params.idle_cost, "cost per idle locomotive period");
  gen->add_option("--parking", lap_params.parking_capacity,
                  "parking slots per station, period and type");

  // train
  auto* train = app.add_subcommand("train", "fit the stability model on one instance");
  std::string train_instance;
  std::string train_model_out = "model.json";
  std::string train_dataset_out;
  SolverFlags train_solver;
  ForestFlags train_forest;
  train->add_option("instance", train_instance, "instance path prefix")->required();
  train->add_option("--out", train_model_out, "model file to write");
  train->add_option("--dataset", train_dataset_out, "also write the training dataset CSV");
  add_solver_flags(train, train_solver);
  add_forest_flags(train, train_forest);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "run one policy on one instance");
  std::string solve_instance;
  std::string solve_policy = "baseline";
  std::string solve_model;
  std::string solve_out;
  SolverFlags solve_solver;
  PolicyFlags solve_policy_flags;
  solve_cmd->add_option("instance", solve_instance, "instance path prefix")->required();
  solve_cmd->add_option("--policy", solve_policy,
                        "baseline, sp:n=<int> or tp:tau=<real in [0,1)>");
  solve_cmd->add_option("--model", solve_model, "stability model file (required for tp)");
  solve_cmd->add_option("--out", solve_out, "run log path (default: stdout)");
  add_solver_flags(solve_cmd, solve_solver);
  add_policy_flags(solve_cmd, solve_policy_flags);

  // bench
  auto* bench = app.add_subcommand("bench", "baseline and policies over an instance set");
  std::vector<std::string> bench_instances;
  std::string bench_config_path;
  std::string bench_out = "bench";
  std::vector<std::string> bench_policies = {"sp:n=1", "sp:n=5", "tp:tau=0.5"};
  int bench_train_index = 0;
  int bench_workers = 0;
  SolverFlags bench_solver;
  ForestFlags bench_forest;
  PolicyFlags bench_policy_flags;
  bench->add_option("instances", bench_instances, "instance path prefixes");
  bench->add_option("--config", bench_config_path, "JSON config mirroring the flags");
  bench->add_option("--out", bench_out, "output directory")->envname("ENTROFIX_OUT");
  bench->add_option("--policies", bench_policies, "policies to run against the baseline")
      ->delimiter(',');
  bench->add_option("--train-index", bench_train_index,
                    "instance index whose baseline run trains the model");
  bench->add_option("--workers", bench_workers, "parallel run slots (0: auto)");
  add_solver_flags(bench, bench_solver);
  add_forest_flags(bench, bench_forest);
  add_policy_flags(bench, bench_policy_flags);

  // report
  auto* report = app.add_subcommand("report", "rebuild the report from run logs");
  std::string report_logs;
  std::string report_out = "bench";
  std::string report_train_instance;
  report->add_option("--logs", report_logs, "directory of .jsonl run logs")->required();
  report->add_option("--out", report_out, "output directory")->envname("ENTROFIX_OUT");
  report->add_option("--train-instance", report_train_instance,
                     "instance to exclude from quartiles (default: first)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(lap_params, weeks, gen_out);
    if (train->parsed())
      return cmd_train(train_instance, train_solver, train_forest, train_model_out,
                       train_dataset_out);
    if (solve_cmd->parsed())
      return cmd_solve(solve_instance, solve_policy, solve_model, solve_solver,
                       solve_policy_flags, solve_out);
    if (bench->parsed()) {
      BenchConfig config;
      if (!bench_config_path.empty()) {
        const nlohmann::json j = nlohmann::json::parse(read_file(bench_config_path));
        if (j.contains("instances"))
          config.instance_prefixes = j["instances"].get<std::vector<std::string>>();
        if (j.contains("policies"))
          config.policies = j["policies"].get<std::vector<std::string>>();
        if (j.contains("out")) config.out_dir = j["out"].get<std::string>();
        if (j.contains("nodes")) bench_solver.nodes = j["nodes"].get<std::int64_t>();
        if (j.contains("seed")) bench_solver.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("clock")) bench_solver.clock = j["clock"].get<std::string>();
        if (j.contains("t_min")) bench_policy_flags.t_min = j["t_min"].get<int>();
        if (j.contains("online_update"))
          bench_policy_flags.no_online_update = !j["online_update"].get<bool>();
        if (j.contains("train_index")) config.train_index = j["train_index"].get<int>();
        if (j.contains("workers")) config.workers = j["workers"].get<int>();
        if (j.contains("forest_seed")) bench_forest.seed = j["forest_seed"].get<std::uint64_t>();
        if (j.contains("trees")) bench_forest.trees = j["trees"].get<int>();
      }
      // Explicit flags override the config file.
      if (!bench_instances.empty()) config.instance_prefixes = bench_instances;
      if (bench->count("--policies") > 0) config.policies = bench_policies;
      if (bench->count("--out") > 0 || config.out_dir.empty()) config.out_dir = bench_out;
      if (bench->count("--train-index") > 0) config.train_index = bench_train_index;
      if (bench->count("--workers") > 0) config.workers = bench_workers;
      config.solver = to_solver_config(bench_solver);
      config.forest = to_forest_params(bench_forest);
      config.policy_options = to_policy_options(bench_policy_flags);
      if (config.instance_prefixes.empty()) {
        std::fprintf(stderr, "error: no instances given (positional or config file)\n");
        return 1;
      }
      const BenchResult result = run_bench(config);
      std::printf("training: solve %.3f s + fit %.3f s, accuracy %.4f\n",
                  result.train_solve_seconds, result.train_fit_seconds, result.train_accuracy);
      std::printf("%d runs in %.1f s; report under %s\n", result.runs, result.total_seconds,
                  config.out_dir.c_str());
      std::fputs(result.quartiles_csv.c_str(), stdout);
      return 0;
    }
    if (report->parsed()) return cmd_report(report_logs, report_out, report_train_instance);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
