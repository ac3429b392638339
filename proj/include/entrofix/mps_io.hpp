#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "entrofix/model.hpp"
#include "entrofix/run_record.hpp"

namespace entrofix {

// Free-format MPS subset: NAME, OBJSENSE (MIN/MAX), ROWS, COLUMNS with
// INTORG/INTEND markers, RHS, BOUNDS (LO/UP/FX/BV/PL), ENDATA.
// MAXIMIZE inputs are negated so the model always minimizes.
// Throws ParseError with a line number.
Model parse_mps(std::string_view text);

std::string write_mps(const Model& model);

// Sidecar JSON declaring the one-hot groups:
//   {"groups": [{"object": "...", "classes": [{"k": 0, "var": "..."}]}]}
// Object ids are assigned by position. Throws ParseError on unknown
// variables or duplicate membership; the combined model must validate.
std::vector<OneHotGroup> parse_groups(std::string_view text, const Model& model);

std::string write_groups(const Model& model);

// Reads "<prefix>.mps" and "<prefix>.groups.json" into one model.
Model load_instance(const std::string& path_prefix);

// JSON-lines run log: one event per line plus a trailing summary line, with
// deterministic field order. Wall-clock is included only on request since
// node-clock logs must be byte-reproducible. Returns bytes written.
std::size_t write_run_log(const RunRecord& record, std::ostream& out,
                          bool include_wall = false);

// Minimal view of a run log, enough to recompute every report metric.
struct RunLogView {
  std::string status;
  std::uint64_t seed = 0;
  std::vector<std::pair<double, double>> incumbents;  // (t, objective)
  std::vector<std::pair<int, int>> fixes;             // (v, k)
  bool has_best = false;
  double best_objective = 0.0;
  std::vector<int> best_classes;
  double nodes = 0.0;
  double horizon = 0.0;
  double dual_bound = 0.0;
};

RunLogView parse_run_log(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace entrofix
