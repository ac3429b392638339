#include "entrofix/mps_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "entrofix/errors.hpp"

namespace entrofix {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

double parse_number(const std::string& tok, int line_no) {
  try {
    size_t pos = 0;
    const double value = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return value;
  } catch (const std::exception&) {
    throw ParseError("malformed number '" + tok + "'", line_no);
  }
}

std::string fmt_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace

Model parse_mps(std::string_view text) {
  Model model;
  enum class Section { none, name, objsense, rows, columns, rhs, bounds, ranges, done };
  Section section = Section::none;

  std::unordered_map<std::string, int> row_index;  // constraint rows only
  std::string objective_row;
  std::unordered_map<std::string, int> col_index;
  std::unordered_set<std::string> closed_cols;
  std::string current_col;
  bool in_integer_block = false;
  bool negate_objective = false;
  std::vector<bool> bounds_touched;  // lazily sized with variables

  std::istringstream stream{std::string(text)};
  std::string line;
  int line_no = 0;
  bool saw_endata = false;

  auto require_var = [&](const std::string& name, int at_line) -> int {
    auto it = col_index.find(name);
    if (it == col_index.end()) throw ParseError("unknown column '" + name + "'", at_line);
    return it->second;
  };

  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '*') continue;  // comment

    const bool is_header = !std::isspace(static_cast<unsigned char>(line[0]));
    std::vector<std::string> tok = tokenize(line);
    if (tok.empty()) continue;

    if (is_header) {
      const std::string& kw = tok[0];
      if (kw == "NAME") {
        section = Section::name;
        if (tok.size() > 1) model.name = tok[1];
      } else if (kw == "OBJSENSE") {
        section = Section::objsense;
        if (tok.size() > 1) negate_objective = (tok[1] == "MAX" || tok[1] == "MAXIMIZE");
      } else if (kw == "ROWS") {
        section = Section::rows;
      } else if (kw == "COLUMNS") {
        section = Section::columns;
      } else if (kw == "RHS") {
        section = Section::rhs;
      } else if (kw == "BOUNDS") {
        section = Section::bounds;
      } else if (kw == "RANGES") {
        throw ParseError("RANGES section is not supported", line_no);
      } else if (kw == "ENDATA") {
        saw_endata = true;
        section = Section::done;
        break;
      } else {
        throw ParseError("unknown section '" + kw + "'", line_no);
      }
      continue;
    }

    switch (section) {
      case Section::objsense: {
        negate_objective = (tok[0] == "MAX" || tok[0] == "MAXIMIZE");
        break;
      }
      case Section::rows: {
        if (tok.size() != 2) throw ParseError("ROWS entry needs a type and a name", line_no);
        const std::string& type = tok[0];
        const std::string& name = tok[1];
        if (row_index.count(name) || name == objective_row)
          throw ParseError("duplicate row '" + name + "'", line_no);
        if (type == "N") {
          if (!objective_row.empty())
            throw ParseError("second N row '" + name + "' (free rows unsupported)", line_no);
          objective_row = name;
        } else if (type == "L" || type == "G" || type == "E") {
          LinearConstraint row;
          row.name = name;
          row.sense = type == "L" ? Sense::le : type == "G" ? Sense::ge : Sense::eq;
          row_index.emplace(name, static_cast<int>(model.constraints.size()));
          model.constraints.push_back(std::move(row));
        } else {
          throw ParseError("unknown row type '" + type + "'", line_no);
        }
        break;
      }
      case Section::columns: {
        // Marker lines toggle the integer block.
        if (tok.size() >= 3 && tok[1] == "'MARKER'") {
          if (tok[2] == "'INTORG'")
            in_integer_block = true;
          else if (tok[2] == "'INTEND'")
            in_integer_block = false;
          else
            throw ParseError("unknown marker '" + tok[2] + "'", line_no);
          break;
        }
        if (tok.size() < 3 || tok.size() % 2 == 0)
          throw ParseError("COLUMNS entry needs (row, value) pairs", line_no);
        const std::string& col = tok[0];
        auto it = col_index.find(col);
        int var_id;
        if (it == col_index.end()) {
          if (!current_col.empty()) closed_cols.insert(current_col);
          if (closed_cols.count(col))
            throw ParseError("duplicate column '" + col + "'", line_no);
          var_id = static_cast<int>(model.variables.size());
          Variable v;
          v.id = var_id;
          v.name = col;
          if (in_integer_block) {
            v.kind = VarKind::integer;
            v.lower = 0.0;
            v.upper = 1.0;  // MPS default for marked integers, until BOUNDS
          } else {
            v.kind = VarKind::continuous;
            v.lower = 0.0;
            v.upper = kInf;
          }
          model.variables.push_back(std::move(v));
          model.objective.push_back(0.0);
          bounds_touched.push_back(false);
          col_index.emplace(col, var_id);
          current_col = col;
        } else {
          if (col != current_col)
            throw ParseError("duplicate column '" + col + "' (entries must be contiguous)",
                             line_no);
          var_id = it->second;
        }
        for (size_t i = 1; i + 1 < tok.size(); i += 2) {
          const std::string& row = tok[i];
          const double value = parse_number(tok[i + 1], line_no);
          if (row == objective_row) {
            model.objective[var_id] += value;
          } else {
            auto rit = row_index.find(row);
            if (rit == row_index.end())
              throw ParseError("unknown row '" + row + "'", line_no);
            model.constraints[rit->second].terms.emplace_back(var_id, value);
          }
        }
        break;
      }
      case Section::rhs: {
        if (tok.size() < 3 || tok.size() % 2 == 0)
          throw ParseError("RHS entry needs (row, value) pairs", line_no);
        for (size_t i = 1; i + 1 < tok.size(); i += 2) {
          const std::string& row = tok[i];
          const double value = parse_number(tok[i + 1], line_no);
          if (row == objective_row)
            throw ParseError("objective constant via RHS is not supported", line_no);
          auto rit = row_index.find(row);
          if (rit == row_index.end()) throw ParseError("unknown row '" + row + "'", line_no);
          model.constraints[rit->second].rhs = value;
        }
        break;
      }
      case Section::bounds: {
        if (tok.size() < 3) throw ParseError("BOUNDS entry too short", line_no);
        const std::string& type = tok[0];
        const std::string& col = tok[2];
        const int var_id = require_var(col, line_no);
        Variable& v = model.variables[var_id];
        // The first BOUNDS entry for a variable replaces its defaults.
        if (!bounds_touched[var_id]) {
          v.lower = 0.0;
          v.upper = kInf;
          bounds_touched[var_id] = true;
        }
        if (type == "UP") {
          if (tok.size() < 4) throw ParseError("UP bound needs a value", line_no);
          v.upper = parse_number(tok[3], line_no);
        } else if (type == "LO") {
          if (tok.size() < 4) throw ParseError("LO bound needs a value", line_no);
          v.lower = parse_number(tok[3], line_no);
        } else if (type == "FX") {
          if (tok.size() < 4) throw ParseError("FX bound needs a value", line_no);
          v.lower = v.upper = parse_number(tok[3], line_no);
        } else if (type == "BV") {
          v.lower = 0.0;
          v.upper = 1.0;
          v.kind = VarKind::binary;
        } else if (type == "PL") {
          v.upper = kInf;
        } else {
          throw ParseError("unsupported bound type '" + type + "'", line_no);
        }
        break;
      }
      case Section::name:
        break;  // NAME continuation, ignore
      default:
        throw ParseError("data before any section header", line_no);
    }
  }

  if (!saw_endata) throw ParseError("missing ENDATA", line_no);
  if (objective_row.empty()) throw ParseError("no objective (N) row", line_no);

  if (negate_objective)
    for (double& c : model.objective) c = -c;

  // Integral variables inside [0,1] are binaries.
  for (Variable& v : model.variables)
    if (v.kind == VarKind::integer && v.lower >= -kIntTol && v.upper <= 1.0 + kIntTol)
      v.kind = VarKind::binary;

  return model;
}

std::string write_mps(const Model& model) {
  std::string out;
  out += "NAME " + (model.name.empty() ? std::string("model") : model.name) + "\n";
  out += "OBJSENSE\n MIN\n";
  out += "ROWS\n N obj\n";
  for (const LinearConstraint& row : model.constraints) {
    const char* type = row.sense == Sense::le ? "L" : row.sense == Sense::ge ? "G" : "E";
    out += std::string(" ") + type + " " + row.name + "\n";
  }

  // Column-major terms.
  std::vector<std::vector<std::pair<std::string, double>>> column_terms(model.num_variables());
  for (const LinearConstraint& row : model.constraints)
    for (const auto& [var, coef] : row.terms) column_terms[var].emplace_back(row.name, coef);

  out += "COLUMNS\n";
  bool in_integer_block = false;
  int marker_count = 0;
  for (int j = 0; j < model.num_variables(); ++j) {
    const Variable& v = model.variables[j];
    const bool integral = v.is_integral();
    if (integral != in_integer_block) {
      out += " MARKER" + std::to_string(marker_count++) + " 'MARKER' " +
             (integral ? "'INTORG'" : "'INTEND'") + "\n";
      in_integer_block = integral;
    }
    if (model.objective[j] != 0.0)
      out += " " + v.name + " obj " + fmt_double(model.objective[j]) + "\n";
    for (const auto& [row, coef] : column_terms[j])
      out += " " + v.name + " " + row + " " + fmt_double(coef) + "\n";
    if (model.objective[j] == 0.0 && column_terms[j].empty())
      out += " " + v.name + " obj 0\n";  // keep empty columns visible
  }
  if (in_integer_block) out += " MARKER" + std::to_string(marker_count++) + " 'MARKER' 'INTEND'\n";

  out += "RHS\n";
  for (const LinearConstraint& row : model.constraints)
    if (row.rhs != 0.0) out += " rhs " + row.name + " " + fmt_double(row.rhs) + "\n";

  out += "BOUNDS\n";
  for (const Variable& v : model.variables) {
    if (v.kind == VarKind::binary && v.lower == 0.0 && v.upper == 1.0) {
      out += " BV bnd " + v.name + "\n";
    } else if (v.lower == v.upper) {
      out += " FX bnd " + v.name + " " + fmt_double(v.lower) + "\n";
    } else {
      if (v.lower != 0.0) out += " LO bnd " + v.name + " " + fmt_double(v.lower) + "\n";
      if (v.upper != kInf) out += " UP bnd " + v.name + " " + fmt_double(v.upper) + "\n";
      if (v.is_integral() && v.upper == kInf && v.lower == 0.0)
        out += " PL bnd " + v.name + "\n";  // keep integer defaults from kicking in
    }
  }
  out += "ENDATA\n";
  return out;
}

std::vector<OneHotGroup> parse_groups(std::string_view text, const Model& model) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("groups sidecar is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("groups") || !doc["groups"].is_array())
    throw ParseError("groups sidecar must be an object with a 'groups' array");

  std::vector<OneHotGroup> groups;
  std::unordered_set<int> used_vars;
  int next_object_id = 0;
  for (const auto& g : doc["groups"]) {
    OneHotGroup group;
    group.object_id = next_object_id++;
    if (!g.contains("classes") || !g["classes"].is_array())
      throw ParseError("group entry missing 'classes' array");
    for (const auto& c : g["classes"]) {
      if (!c.contains("k") || !c.contains("var"))
        throw ParseError("class entry needs 'k' and 'var'");
      const int label = c["k"].get<int>();
      const std::string var_name = c["var"].get<std::string>();
      const int var_id = model.variable_index(var_name);
      if (var_id < 0)
        throw ParseError("unknown variable '" + var_name + "' in groups sidecar");
      if (!used_vars.insert(var_id).second)
        throw ParseError("duplicate membership: variable '" + var_name +
                         "' appears in two groups");
      group.members.emplace_back(label, var_id);
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

std::string write_groups(const Model& model) {
  nlohmann::ordered_json doc;
  doc["groups"] = nlohmann::ordered_json::array();
  for (const OneHotGroup& group : model.groups) {
    nlohmann::ordered_json g;
    g["object"] = "v" + std::to_string(group.object_id);
    g["classes"] = nlohmann::ordered_json::array();
    for (const auto& [label, var] : group.members) {
      nlohmann::ordered_json c;
      c["k"] = label;
      c["var"] = model.variables[var].name;
      g["classes"].push_back(std::move(c));
    }
    doc["groups"].push_back(std::move(g));
  }
  return doc.dump(1) + "\n";
}

Model load_instance(const std::string& path_prefix) {
  Model model = parse_mps(read_file(path_prefix + ".mps"));
  model.groups = parse_groups(read_file(path_prefix + ".groups.json"), model);
  const auto violations = validate(model);
  if (!violations.empty())
    throw ParseError("instance '" + path_prefix + "' is invalid: " + violations.front());
  return model;
}

namespace {

// Numbers in logs go through one formatter so reruns byte-match.
nlohmann::ordered_json log_number(double value) {
  if (value == std::floor(value) && std::abs(value) < 1e15)
    return static_cast<std::int64_t>(value);
  return value;
}

}  // namespace

std::size_t write_run_log(const RunRecord& record, std::ostream& out, bool include_wall) {
  std::size_t bytes = 0;
  auto emit = [&](const nlohmann::ordered_json& j) {
    const std::string line = j.dump();
    out << line << '\n';
    bytes += line.size() + 1;
  };

  std::size_t solution_index = 0;
  for (const RunEvent& e : record.events) {
    nlohmann::ordered_json j;
    j["t"] = log_number(e.t);
    switch (e.kind) {
      case EventKind::solution:
        j["type"] = "solution";
        j["obj"] = e.objective;
        if (solution_index < record.solutions.size())
          j["classes"] = record.solutions[solution_index++].classes;
        break;
      case EventKind::incumbent:
        j["type"] = "incumbent";
        j["obj"] = e.objective;
        break;
      case EventKind::fix:
        j["type"] = "fix";
        j["v"] = e.object_id;
        j["k"] = e.class_label;
        break;
    }
    emit(j);
  }

  nlohmann::ordered_json summary;
  summary["t"] = log_number(static_cast<double>(record.nodes_processed));
  summary["type"] = "summary";
  summary["instance"] = record.instance;
  summary["policy"] = record.policy;
  summary["seed"] = record.seed;
  summary["status"] = to_string(record.status);
  if (record.has_incumbent) {
    summary["obj"] = record.best_objective;
    summary["classes"] = record.best_classes;
  } else {
    summary["obj"] = nullptr;
  }
  summary["dual_bound"] =
      std::isfinite(record.restricted_dual_bound) ? nlohmann::ordered_json(record.restricted_dual_bound)
                                                  : nlohmann::ordered_json(nullptr);
  summary["nodes"] = record.nodes_processed;
  summary["horizon"] = log_number(record.horizon);
  summary["fixes"] = record.fixes().size();
  summary["fix_disagreements"] = record.fix_disagreements;
  if (include_wall) summary["wall_s"] = record.wall_seconds;
  emit(summary);
  return bytes;
}

RunLogView parse_run_log(std::string_view text) {
  RunLogView view;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "incumbent") {
      view.incumbents.emplace_back(j.at("t").get<double>(), j.at("obj").get<double>());
    } else if (type == "fix") {
      view.fixes.emplace_back(j.at("v").get<int>(), j.at("k").get<int>());
    } else if (type == "summary") {
      view.status = j.at("status").get<std::string>();
      view.seed = j.at("seed").get<std::uint64_t>();
      view.nodes = j.at("nodes").get<double>();
      view.horizon = j.at("horizon").get<double>();
      if (!j.at("obj").is_null()) {
        view.has_best = true;
        view.best_objective = j.at("obj").get<double>();
        view.best_classes = j.at("classes").get<std::vector<int>>();
      }
      if (!j.at("dual_bound").is_null()) view.dual_bound = j.at("dual_bound").get<double>();
    }
  }
  return view;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace entrofix
