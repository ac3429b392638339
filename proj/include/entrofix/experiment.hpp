#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entrofix/bnb.hpp"
#include "entrofix/forest.hpp"
#include "entrofix/mps_io.hpp"
#include "entrofix/policy.hpp"

namespace entrofix {

// Baseline solve with recording, then a forest fitted on the recorded
// solutions (final-history labels, chronological updates).
struct TrainResult {
  RunRecord run;                          // the baseline run that fed training
  std::string forest_json;                // serialized fitted forest
  std::vector<PredictionSample> dataset;  // emitted samples, for audit
  double solve_seconds = 0.0;
  double fit_seconds = 0.0;
  double accuracy = 0.0;  // training-set accuracy of the fitted forest
};

TrainResult train_on_instance(const Model& model, const SolverConfig& solver,
                              const ForestParams& forest_params);

// One policy run on one instance.
RunRecord run_policy(const Model& model, const PolicyKind& policy,
                     const PolicyOptions& options, const std::optional<OnlineForest>& forest,
                     const SolverConfig& solver);

// Everything the report needs from one run log.
struct ReportInput {
  std::string instance;
  std::string policy;
  RunLogView log;
};

struct ReportFiles {
  std::string report_csv;
  std::string quartiles_csv;
  // (file name without directory, tab-separated (t, gap) step points)
  std::vector<std::pair<std::string, std::string>> plots;
};

// Per-run metrics plus per-policy quartiles. The gap reference per instance
// is the best objective over all of that instance's runs; the final relative
// gap and the speed-up compare against the instance's baseline run. Quartiles
// skip `train_instance`, the instance the forest was fitted on.
ReportFiles make_report(std::vector<ReportInput> runs, const std::string& train_instance);

struct BenchConfig {
  std::vector<std::string> instance_prefixes;  // paths without extension
  std::vector<std::string> policies = {"sp:n=1", "sp:n=5", "tp:tau=0.5"};
  SolverConfig solver;
  ForestParams forest;
  PolicyOptions policy_options;
  int train_index = 0;  // instance whose baseline run trains the forest
  int workers = 0;      // 0: hardware concurrency, capped at 8
  std::string out_dir;
};

struct BenchResult {
  std::string report_csv;
  std::string quartiles_csv;
  double train_solve_seconds = 0.0;
  double train_fit_seconds = 0.0;
  double train_accuracy = 0.0;
  double total_seconds = 0.0;
  int runs = 0;
  // Every run record, sorted by (instance, policy); lets callers audit the
  // final assignments without re-parsing logs.
  std::vector<RunRecord> records;
};

// Full experiment: train on one instance, run baseline plus every policy on
// every instance in parallel worker slots, write logs, plots, report.csv,
// quartiles.csv, model.json and dataset.csv under out_dir. Output bytes do
// not depend on the worker count.
BenchResult run_bench(const BenchConfig& config);

// Rebuilds the report from run logs already on disk (logs named
// <instance>.<policy>.jsonl). `train_instance` empty means: use the
// lexicographically first instance.
ReportFiles report_from_logs(const std::string& logs_dir, std::string train_instance = "");

}  // namespace entrofix
