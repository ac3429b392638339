#include "entrofix/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "entrofix/errors.hpp"
#include "entrofix/metrics.hpp"

namespace entrofix {

namespace {

namespace fs = std::filesystem;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string fmt_opt(const std::optional<double>& value) {
  return value ? fmt(*value) : "na";
}

Trajectory trajectory_of(const RunLogView& log, double reference) {
  Trajectory traj;
  traj.incumbents = log.incumbents;
  traj.horizon = log.horizon;
  traj.reference = reference;
  return traj;
}

// baseline first, then lexicographic.
bool policy_before(const std::string& a, const std::string& b) {
  const bool ab = a == "baseline";
  const bool bb = b == "baseline";
  if (ab != bb) return ab;
  return a < b;
}

std::string plot_tsv(const Trajectory& traj) {
  std::string out = "t\tgap\n";
  out += "0\t1\n";
  double last_gap = 1.0;
  for (const auto& [t, gap] : traj.gap_points()) {
    out += fmt(t) + "\t" + fmt(gap) + "\n";
    last_gap = gap;
  }
  out += fmt(traj.horizon) + "\t" + fmt(last_gap) + "\n";
  return out;
}

}  // namespace

TrainResult train_on_instance(const Model& model, const SolverConfig& solver,
                              const ForestParams& forest_params) {
  TrainResult result;
  const auto solve_start = std::chrono::steady_clock::now();
  PolicyObserver observer(model, PolicyKind{});  // baseline: tracker only
  result.run = solve(model, solver, &observer);
  result.run.policy = "baseline";
  result.solve_seconds = seconds_since(solve_start);

  const auto fit_start = std::chrono::steady_clock::now();
  OnlineForest forest(forest_params);
  result.dataset = fit_training_run(forest, model, result.run.solutions);
  result.fit_seconds = seconds_since(fit_start);
  result.accuracy = dataset_accuracy(forest, result.dataset);
  result.forest_json = forest.save();
  return result;
}

RunRecord run_policy(const Model& model, const PolicyKind& policy, const PolicyOptions& options,
                     const std::optional<OnlineForest>& forest, const SolverConfig& solver) {
  PolicyObserver observer(model, policy, options, forest);
  RunRecord record = solve(model, solver, &observer);
  record.policy = to_string(policy);
  return record;
}

ReportFiles make_report(std::vector<ReportInput> runs, const std::string& train_instance) {
  std::sort(runs.begin(), runs.end(), [](const ReportInput& a, const ReportInput& b) {
    if (a.instance != b.instance) return a.instance < b.instance;
    return policy_before(a.policy, b.policy);
  });

  // Per-instance reference (best over all runs) and baseline facts.
  struct InstanceFacts {
    double reference = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> reference_classes;
    bool has_baseline = false;
    double baseline_pi = 0.0;
    bool baseline_has_best = false;
    double baseline_best = 0.0;
    Trajectory baseline_traj;
  };
  std::map<std::string, InstanceFacts> facts;
  for (const ReportInput& run : runs) {
    InstanceFacts& f = facts[run.instance];
    if (run.log.has_best &&
        (std::isnan(f.reference) || run.log.best_objective < f.reference)) {
      f.reference = run.log.best_objective;
      f.reference_classes = run.log.best_classes;
    }
  }
  for (const ReportInput& run : runs) {
    if (run.policy != "baseline") continue;
    InstanceFacts& f = facts[run.instance];
    f.has_baseline = true;
    f.baseline_traj = trajectory_of(run.log, f.reference);
    f.baseline_pi = primal_integral(f.baseline_traj);
    f.baseline_has_best = run.log.has_best;
    f.baseline_best = run.log.best_objective;
  }

  ReportFiles out;
  out.report_csv =
      "instance,policy,seed,pi,pir,best_speed_up,gap_at_best,final_rel_gap,action_accuracy,"
      "nodes,status\n";
  std::map<std::string, std::vector<double>> pir_by_policy;      // excluding train instance
  std::map<std::string, std::vector<double>> acc_by_policy;      // excluding train instance
  std::map<std::string, std::vector<double>> gap_by_policy;      // excluding train instance
  std::map<std::string, std::vector<double>> speedup_by_policy;  // excluding train instance

  for (const ReportInput& run : runs) {
    const InstanceFacts& f = facts.at(run.instance);
    if (!f.has_baseline)
      throw std::runtime_error("no baseline log for instance '" + run.instance + "'");
    const Trajectory traj = trajectory_of(run.log, f.reference);
    const double pi = primal_integral(traj);
    const std::optional<double> ratio = pir(pi, f.baseline_pi);
    const std::optional<SpeedUp> speed = best_speed_up(traj, f.baseline_traj);
    std::optional<double> final_rel_gap;
    if (run.log.has_best && f.baseline_has_best)
      final_rel_gap = (run.log.best_objective - f.baseline_best) /
                      std::max(std::abs(f.baseline_best), 1e-10);
    std::vector<int> object_ids(f.reference_classes.size());
    for (size_t i = 0; i < object_ids.size(); ++i) object_ids[i] = static_cast<int>(i);
    const double accuracy = action_accuracy(run.log.fixes, f.reference_classes, object_ids);

    out.report_csv += run.instance + "," + run.policy + "," + std::to_string(run.log.seed) +
                      "," + fmt(pi) +
                      "," + fmt_opt(ratio) + "," +
                      (speed ? fmt(speed->speed_up) : std::string("na")) + "," +
                      (speed ? fmt(speed->gap_at_best) : std::string("na")) + "," +
                      fmt_opt(final_rel_gap) + "," + fmt(accuracy) + "," +
                      fmt(run.log.nodes) + "," + run.log.status + "\n";

    out.plots.emplace_back(run.instance + "." + run.policy + ".tsv", plot_tsv(traj));

    if (run.instance != train_instance) {
      if (ratio) pir_by_policy[run.policy].push_back(*ratio);
      acc_by_policy[run.policy].push_back(accuracy);
      if (final_rel_gap) gap_by_policy[run.policy].push_back(*final_rel_gap);
      if (speed) speedup_by_policy[run.policy].push_back(speed->speed_up);
    }
  }

  out.quartiles_csv =
      "policy,runs,pir_q1,pir_median,pir_q3,accuracy_mean,final_rel_gap_median,speed_up_median\n";
  std::vector<std::string> policies;
  for (const auto& [policy, values] : acc_by_policy) policies.push_back(policy);
  std::sort(policies.begin(), policies.end(), policy_before);
  for (const std::string& policy : policies) {
    const std::vector<double>& pirs = pir_by_policy[policy];
    const std::vector<double>& accs = acc_by_policy[policy];
    const std::vector<double>& gaps = gap_by_policy[policy];
    const std::vector<double>& speeds = speedup_by_policy[policy];
    double acc_mean = 0.0;
    for (const double a : accs) acc_mean += a;
    if (!accs.empty()) acc_mean /= static_cast<double>(accs.size());
    out.quartiles_csv +=
        policy + "," + std::to_string(accs.size()) + "," +
        (pirs.empty() ? "na" : fmt(quantile(pirs, 0.25))) + "," +
        (pirs.empty() ? "na" : fmt(quantile(pirs, 0.5))) + "," +
        (pirs.empty() ? "na" : fmt(quantile(pirs, 0.75))) + "," + fmt(acc_mean) + "," +
        (gaps.empty() ? "na" : fmt(quantile(gaps, 0.5))) + "," +
        (speeds.empty() ? "na" : fmt(quantile(speeds, 0.5))) + "\n";
  }
  return out;
}

BenchResult run_bench(const BenchConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.instance_prefixes.empty()) throw std::invalid_argument("no instances given");
  if (config.train_index < 0 ||
      config.train_index >= static_cast<int>(config.instance_prefixes.size()))
    throw std::invalid_argument("train_index out of range");
  if (config.out_dir.empty()) throw std::invalid_argument("no output directory given");

  std::vector<PolicyKind> policies;
  for (const std::string& text : config.policies) {
    const PolicyKind kind = parse_policy(text);
    if (kind.family == PolicyKind::Family::baseline) continue;  // implicit anyway
    policies.push_back(kind);
  }

  std::vector<Model> models;
  std::vector<std::string> names;
  for (const std::string& prefix : config.instance_prefixes) {
    models.push_back(load_instance(prefix));
    names.push_back(fs::path(prefix).filename().string());
  }

  fs::create_directories(fs::path(config.out_dir) / "logs");
  fs::create_directories(fs::path(config.out_dir) / "plots");

  BenchResult result;
  TrainResult trained =
      train_on_instance(models[static_cast<size_t>(config.train_index)], config.solver,
                        config.forest);
  result.train_solve_seconds = trained.solve_seconds;
  result.train_fit_seconds = trained.fit_seconds;
  result.train_accuracy = trained.accuracy;
  const OnlineForest trained_forest = OnlineForest::load(trained.forest_json);

  struct Task {
    int instance = 0;
    PolicyKind policy;
    bool is_baseline = false;
  };
  std::vector<Task> tasks;
  for (int i = 0; i < static_cast<int>(models.size()); ++i) {
    if (i != config.train_index)
      tasks.push_back(Task{i, PolicyKind{}, true});  // training baseline is reused
    for (const PolicyKind& policy : policies) tasks.push_back(Task{i, policy, false});
  }

  std::vector<RunRecord> records(tasks.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const size_t index = next.fetch_add(1);
      if (index >= tasks.size() || failed.load()) return;
      const Task& task = tasks[index];
      try {
        const Model& model = models[static_cast<size_t>(task.instance)];
        std::optional<OnlineForest> forest;
        if (task.policy.family == PolicyKind::Family::threshold) forest = trained_forest;
        records[index] =
            run_policy(model, task.is_baseline ? PolicyKind{} : task.policy,
                       config.policy_options, forest, config.solver);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        if (failure.empty()) failure = e.what();
      }
    }
  };
  int worker_count = config.workers > 0
                         ? config.workers
                         : std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
  worker_count = std::min<int>(worker_count, static_cast<int>(tasks.size()));
  std::vector<std::thread> threads;
  for (int i = 0; i < worker_count; ++i) threads.emplace_back(worker);
  for (std::thread& thread : threads) thread.join();
  if (failed.load()) throw std::runtime_error("bench run failed: " + failure);

  // Collect all runs (training baseline included) and write artifacts.
  std::vector<ReportInput> inputs;
  auto emit_log = [&](int instance, const std::string& policy, RunRecord& record) {
    record.instance = names[static_cast<size_t>(instance)];
    record.policy = policy;
    std::ostringstream log;
    write_run_log(record, log, config.solver.clock == RunClock::wall);
    const std::string name = record.instance + "." + policy + ".jsonl";
    write_file((fs::path(config.out_dir) / "logs" / name).string(), log.str());
    inputs.push_back(ReportInput{record.instance, policy, parse_run_log(log.str())});
  };
  emit_log(config.train_index, "baseline", trained.run);
  for (size_t i = 0; i < tasks.size(); ++i)
    emit_log(tasks[i].instance,
             tasks[i].is_baseline ? "baseline" : to_string(tasks[i].policy), records[i]);
  result.runs = static_cast<int>(inputs.size());

  result.records.reserve(records.size() + 1);
  result.records.push_back(std::move(trained.run));
  for (RunRecord& record : records) result.records.push_back(std::move(record));
  std::sort(result.records.begin(), result.records.end(),
            [](const RunRecord& a, const RunRecord& b) {
              if (a.instance != b.instance) return a.instance < b.instance;
              return policy_before(a.policy, b.policy);
            });

  ReportFiles report =
      make_report(std::move(inputs), names[static_cast<size_t>(config.train_index)]);
  write_file((fs::path(config.out_dir) / "report.csv").string(), report.report_csv);
  write_file((fs::path(config.out_dir) / "quartiles.csv").string(), report.quartiles_csv);
  for (const auto& [name, tsv] : report.plots)
    write_file((fs::path(config.out_dir) / "plots" / name).string(), tsv);
  write_file((fs::path(config.out_dir) / "model.json").string(), trained.forest_json);
  write_file((fs::path(config.out_dir) / "dataset.csv").string(),
             dataset_to_csv(trained.dataset));

  result.report_csv = std::move(report.report_csv);
  result.quartiles_csv = std::move(report.quartiles_csv);
  result.total_seconds = seconds_since(start);
  return result;
}

ReportFiles report_from_logs(const std::string& logs_dir, std::string train_instance) {
  std::vector<ReportInput> inputs;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(logs_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& path : files) {
    const std::string stem = path.stem().string();  // <instance>.<policy>
    const size_t dot = stem.find('.');
    if (dot == std::string::npos) continue;
    ReportInput input;
    input.instance = stem.substr(0, dot);
    input.policy = stem.substr(dot + 1);
    input.log = parse_run_log(read_file(path.string()));
    inputs.push_back(std::move(input));
  }
  if (inputs.empty()) throw std::runtime_error("no run logs under '" + logs_dir + "'");
  if (train_instance.empty()) {
    train_instance = inputs.front().instance;
    for (const ReportInput& input : inputs)
      train_instance = std::min(train_instance, input.instance);
  }
  return make_report(std::move(inputs), train_instance);
}

}  // namespace entrofix
