#include "entrofix/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "entrofix/errors.hpp"

namespace entrofix {

int Model::group_index(int object_id) const {
  for (int i = 0; i < num_groups(); ++i)
    if (groups[i].object_id == object_id) return i;
  return -1;
}

int Model::variable_index(const std::string& name) const {
  for (int i = 0; i < num_variables(); ++i)
    if (variables[i].name == name) return i;
  return -1;
}

namespace {

bool is_one_hot_row(const LinearConstraint& row, const OneHotGroup& group) {
  if (row.sense != Sense::eq || std::abs(row.rhs - 1.0) > 1e-12) return false;
  if (row.terms.size() != group.members.size()) return false;
  std::set<int> row_vars;
  for (const auto& [var, coef] : row.terms) {
    if (std::abs(coef - 1.0) > 1e-12) return false;
    row_vars.insert(var);
  }
  for (const auto& [label, var] : group.members)
    if (!row_vars.count(var)) return false;
  return true;
}

}  // namespace

std::vector<std::string> validate(const Model& model) {
  std::vector<std::string> violations;
  const int n = model.num_variables();

  if (static_cast<int>(model.objective.size()) != n)
    violations.push_back("objective length does not match variable count");

  for (int i = 0; i < n; ++i) {
    const Variable& v = model.variables[i];
    if (v.id != i)
      violations.push_back("variable '" + v.name + "' has id " + std::to_string(v.id) +
                           " but position " + std::to_string(i));
    if (!(v.lower <= v.upper))
      violations.push_back("variable '" + v.name + "' has lower > upper");
    if (v.kind == VarKind::binary && (v.lower < -kIntTol || v.upper > 1.0 + kIntTol))
      violations.push_back("binary variable '" + v.name + "' has bounds outside [0,1]");
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower == kInf || v.upper == -kInf)
      violations.push_back("variable '" + v.name + "' has invalid bounds");
  }

  for (const LinearConstraint& row : model.constraints) {
    std::set<int> seen;
    for (const auto& [var, coef] : row.terms) {
      if (var < 0 || var >= n) {
        violations.push_back("constraint '" + row.name + "' references unknown variable id " +
                             std::to_string(var));
        continue;
      }
      if (!std::isfinite(coef))
        violations.push_back("constraint '" + row.name + "' has non-finite coefficient");
      if (!seen.insert(var).second)
        violations.push_back("constraint '" + row.name + "' repeats variable '" +
                             model.variables[var].name + "'");
    }
    if (!std::isfinite(row.rhs))
      violations.push_back("constraint '" + row.name + "' has non-finite rhs");
  }

  std::unordered_map<int, int> member_of;  // variable id -> object id
  std::set<int> object_ids;
  for (const OneHotGroup& group : model.groups) {
    const std::string tag = "group v=" + std::to_string(group.object_id);
    if (!object_ids.insert(group.object_id).second)
      violations.push_back(tag + " declared twice");
    if (group.class_count() < 2) violations.push_back(tag + " has fewer than 2 members");
    std::set<int> labels;
    for (const auto& [label, var] : group.members) {
      if (!labels.insert(label).second)
        violations.push_back(tag + " repeats class label " + std::to_string(label));
      if (var < 0 || var >= n) {
        violations.push_back(tag + " references unknown variable id " + std::to_string(var));
        continue;
      }
      if (model.variables[var].kind != VarKind::binary)
        violations.push_back(tag + " has non-binary group member '" +
                             model.variables[var].name + "'");
      auto [it, inserted] = member_of.emplace(var, group.object_id);
      if (!inserted)
        violations.push_back("variable '" + model.variables[var].name +
                             "' belongs to more than one group");
    }

    bool has_row = false;
    for (const LinearConstraint& row : model.constraints) {
      if (is_one_hot_row(row, group)) {
        has_row = true;
        break;
      }
    }
    if (!has_row) violations.push_back(tag + " has no one-hot constraint");
  }

  return violations;
}

std::optional<int> class_of(const Assignment& assignment, const OneHotGroup& group,
                            double tol) {
  std::optional<int> found;
  for (const auto& [label, var] : group.members) {
    if (var < 0 || var >= static_cast<int>(assignment.size())) return std::nullopt;
    if (assignment[var] >= 1.0 - tol) {
      if (found) return std::nullopt;  // two members at 1
      found = label;
    }
  }
  return found;
}

int class_of_or_throw(const Assignment& assignment, const OneHotGroup& group, double tol) {
  std::optional<int> k = class_of(assignment, group, tol);
  if (!k)
    throw NotOneHotError("assignment is not one-hot on group v=" +
                         std::to_string(group.object_id));
  return *k;
}

std::vector<int> classes_of(const Model& model, const Assignment& assignment, double tol) {
  std::vector<int> classes;
  classes.reserve(model.groups.size());
  for (const OneHotGroup& group : model.groups)
    classes.push_back(class_of_or_throw(assignment, group, tol));
  return classes;
}

std::optional<int> fixed_class(const Model& model, const OneHotGroup& group) {
  for (const auto& [label, var] : group.members)
    if (model.variables[var].lower >= 1.0 - kIntTol) return label;
  return std::nullopt;
}

Model fix_class(const Model& model, int object_id, int class_label) {
  const int gi = model.group_index(object_id);
  if (gi < 0)
    throw std::out_of_range("no group with object id " + std::to_string(object_id));
  const OneHotGroup& group = model.groups[gi];

  bool has_label = false;
  for (const auto& [label, var] : group.members) has_label |= label == class_label;
  if (!has_label)
    throw std::out_of_range("group v=" + std::to_string(object_id) + " has no class " +
                            std::to_string(class_label));

  if (std::optional<int> already = fixed_class(model, group)) {
    if (*already != class_label)
      throw ConflictingFixError("group v=" + std::to_string(object_id) + " already fixed to " +
                                std::to_string(*already));
    return model;  // idempotent
  }

  Model fixed = model;
  for (const auto& [label, var] : group.members) {
    if (label == class_label) {
      fixed.variables[var].lower = 1.0;
      fixed.variables[var].upper = 1.0;
    } else {
      fixed.variables[var].lower = 0.0;
      fixed.variables[var].upper = 0.0;
    }
  }
  return fixed;
}

EvalResult evaluate(const Model& model, const Assignment& assignment, double tol) {
  EvalResult result;
  const int n = model.num_variables();
  if (static_cast<int>(assignment.size()) != n) return result;  // infeasible, objective 0

  for (int i = 0; i < n; ++i) result.objective += model.objective[i] * assignment[i];

  result.feasible = true;
  for (int i = 0; i < n; ++i) {
    const Variable& v = model.variables[i];
    const double x = assignment[i];
    if (x < v.lower - tol || x > v.upper + tol) result.feasible = false;
    if (v.is_integral() && std::abs(x - std::round(x)) > tol) result.feasible = false;
  }
  for (const LinearConstraint& row : model.constraints) {
    double lhs = 0.0;
    for (const auto& [var, coef] : row.terms) lhs += coef * assignment[var];
    switch (row.sense) {
      case Sense::le:
        if (lhs > row.rhs + tol) result.feasible = false;
        break;
      case Sense::ge:
        if (lhs < row.rhs - tol) result.feasible = false;
        break;
      case Sense::eq:
        if (std::abs(lhs - row.rhs) > tol) result.feasible = false;
        break;
    }
  }
  return result;
}

}  // namespace entrofix
