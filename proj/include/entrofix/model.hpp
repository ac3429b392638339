#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace entrofix {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-6;
constexpr double kIntTol = 1e-6;

enum class VarKind { binary, integer, continuous };

enum class Sense { le, eq, ge };

struct Variable {
  int id = -1;
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarKind kind = VarKind::continuous;

  bool is_integral() const { return kind != VarKind::continuous; }
};

struct LinearConstraint {
  std::string name;
  std::vector<std::pair<int, double>> terms;  // (variable id, coefficient)
  Sense sense = Sense::le;
  double rhs = 0.0;
};

// One class choice per object: binaries over the class labels of object `v`,
// tied together by a sum-to-one row in the model.
struct OneHotGroup {
  int object_id = -1;
  std::vector<std::pair<int, int>> members;  // (class label, variable id), ordered

  int class_count() const { return static_cast<int>(members.size()); }
};

// values[i] is the value of variable id i.
using Assignment = std::vector<double>;

struct EvalResult {
  double objective = 0.0;
  bool feasible = false;
};

// Minimization MIP with one-hot class groups. Immutable once validated;
// fix_class returns a modified copy.
struct Model {
  std::string name;
  std::vector<double> objective;  // dense, indexed by variable id
  std::vector<Variable> variables;
  std::vector<LinearConstraint> constraints;
  std::vector<OneHotGroup> groups;

  int num_variables() const { return static_cast<int>(variables.size()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }
  int num_groups() const { return static_cast<int>(groups.size()); }

  // Index into `groups` for an object id, -1 if absent.
  int group_index(int object_id) const;
  int variable_index(const std::string& name) const;
};

// Returns every invariant violation; empty means the model is well-formed.
std::vector<std::string> validate(const Model& model);

// The unique class k with x_v^k >= 1 - tol, nullopt when the group is not
// one-hot under the assignment.
std::optional<int> class_of(const Assignment& assignment, const OneHotGroup& group,
                            double tol = kIntTol);

// Like class_of but throws NotOneHotError instead of returning nullopt.
int class_of_or_throw(const Assignment& assignment, const OneHotGroup& group,
                      double tol = kIntTol);

// Classes for all groups, in group order. Throws NotOneHotError.
std::vector<int> classes_of(const Model& model, const Assignment& assignment,
                            double tol = kIntTol);

// Pin object v to class k: bounds of the chosen binary become [1,1] and all
// sibling binaries [0,0]. Fixing an already-fixed group to the same class is
// a no-op; a different class throws ConflictingFixError.
Model fix_class(const Model& model, int object_id, int class_label);

// Class the group is currently fixed to by its bounds, nullopt if unfixed.
std::optional<int> fixed_class(const Model& model, const OneHotGroup& group);

// objective = c.x; feasible iff all rows, bounds and integrality hold within tol.
EvalResult evaluate(const Model& model, const Assignment& assignment,
                    double tol = kFeasTol);

}  // namespace entrofix
