#include <doctest.h>

#include <sstream>

#include "entrofix/errors.hpp"
#include "entrofix/mps_io.hpp"
#include "entrofix/run_record.hpp"
#include "oracles.hpp"

using namespace entrofix;

namespace {

const char* kSmallMps = R"(NAME small
ROWS
 N obj
 L cap
 E pick
COLUMNS
 MARKER0 'MARKER' 'INTORG'
 x0 obj 1
 x0 cap 2
 x0 pick 1
 x1 obj 3
 x1 cap 1
 x1 pick 1
 MARKER1 'MARKER' 'INTEND'
 y obj 0.5
 y cap 1
RHS
 rhs cap 4
 rhs pick 1
BOUNDS
 BV bnd x0
 BV bnd x1
 UP bnd y 10
ENDATA
)";

}  // namespace

TEST_CASE("parse_mps reads rows, columns, rhs and bounds") {
  const Model model = parse_mps(kSmallMps);
  CHECK(model.name == "small");
  CHECK(model.num_variables() == 3);
  CHECK(model.num_constraints() == 2);
  CHECK(model.variables[0].kind == VarKind::binary);
  CHECK(model.variables[1].kind == VarKind::binary);
  CHECK(model.variables[2].kind == VarKind::continuous);
  CHECK(model.variables[2].upper == 10.0);
  CHECK(model.objective == std::vector<double>{1.0, 3.0, 0.5});
  CHECK(model.constraints[0].sense == Sense::le);
  CHECK(model.constraints[0].rhs == 4.0);
  CHECK(model.constraints[1].sense == Sense::eq);
  CHECK(model.constraints[1].rhs == 1.0);
}

TEST_CASE("parse_mps failure modes") {
  CHECK_THROWS_AS(parse_mps("NAME x\nROWS\n N obj\n"), ParseError);  // no ENDATA
  CHECK_THROWS_AS(parse_mps("NAME x\nROWS\n L r\nCOLUMNS\nRHS\nENDATA\n"),
                  ParseError);  // no N row
  CHECK_THROWS_AS(parse_mps("NAME x\nROWS\n N obj\nCOLUMNS\n x0 nope 1\nRHS\nENDATA\n"),
                  ParseError);  // unknown row
  CHECK_THROWS_AS(parse_mps("NAME x\nRANGES\nENDATA\n"), ParseError);
  // Maximization is folded into the minimization objective.
  const Model flipped = parse_mps(
      "NAME x\nOBJSENSE\n MAX\nROWS\n N obj\nCOLUMNS\n x0 obj 2\nRHS\nBOUNDS\n UP bnd x0 1\nENDATA\n");
  CHECK(flipped.objective == std::vector<double>{-2.0});
}

TEST_CASE("write_mps / parse_mps round-trips a grouped model exactly") {
  testing::ModelBuilder b;
  b.var("x_v0_k0", 0, 1, VarKind::binary, 1.25);
  b.var("x_v0_k1", 0, 1, VarKind::binary, -2.5);
  b.var("f0", 0, 7, VarKind::integer, 0.05);
  b.var("z", -1.5, kInf, VarKind::continuous, 0.0);
  b.group(0, {"x_v0_k0", "x_v0_k1"});
  b.row("r0", {{"x_v0_k0", 3.0}, {"f0", -1.0}}, Sense::ge, -0.75);
  const Model model = b.build();

  const Model back = parse_mps(write_mps(model));
  REQUIRE(back.num_variables() == model.num_variables());
  REQUIRE(back.num_constraints() == model.num_constraints());
  CHECK(back.objective == model.objective);
  for (int j = 0; j < model.num_variables(); ++j) {
    CHECK(back.variables[j].name == model.variables[j].name);
    CHECK(back.variables[j].kind == model.variables[j].kind);
    CHECK(back.variables[j].lower == model.variables[j].lower);
    CHECK(back.variables[j].upper == model.variables[j].upper);
  }
  for (int i = 0; i < model.num_constraints(); ++i) {
    CHECK(back.constraints[i].sense == model.constraints[i].sense);
    CHECK(back.constraints[i].rhs == model.constraints[i].rhs);
    CHECK(back.constraints[i].terms == model.constraints[i].terms);
  }

  // Sidecar round-trip restores the same memberships.
  const auto groups = parse_groups(write_groups(model), back);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].members == model.groups[0].members);
}

TEST_CASE("parse_groups rejects unknown variables and shared members") {
  const Model model = parse_mps(kSmallMps);
  CHECK_THROWS_AS(
      parse_groups(R"({"groups":[{"classes":[{"k":0,"var":"ghost"}]}]})", model),
      ParseError);
  CHECK_THROWS_AS(parse_groups(R"({"groups":[
        {"classes":[{"k":0,"var":"x0"}]},
        {"classes":[{"k":0,"var":"x0"}]}]})",
                               model),
                  ParseError);
  CHECK_THROWS_AS(parse_groups("[]", model), ParseError);
  const auto groups =
      parse_groups(R"({"groups":[{"classes":[{"k":0,"var":"x0"},{"k":1,"var":"x1"}]}]})", model);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].members == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
}

TEST_CASE("run logs serialize one event per line plus a summary") {
  RunRecord record;
  record.instance = "small";
  record.policy = "baseline";
  record.seed = 11;
  record.nodes_processed = 9;
  record.horizon = 20;
  record.status = RunStatus::optimal;
  record.has_incumbent = true;
  record.best_objective = -3.5;
  record.best_classes = {1, 0};
  record.restricted_dual_bound = -3.5;
  record.events.push_back({2, EventKind::solution, -2.0, -1, -1});
  record.solutions.push_back({2, -2.0, {0, 0}});
  record.events.push_back({2, EventKind::incumbent, -2.0, -1, -1});
  record.events.push_back({2, EventKind::fix, 0.0, 0, 1});
  record.events.push_back({5, EventKind::solution, -3.5, -1, -1});
  record.solutions.push_back({5, -3.5, {1, 0}});
  record.events.push_back({5, EventKind::incumbent, -3.5, -1, -1});

  std::ostringstream out;
  const std::size_t bytes = write_run_log(record, out);
  const std::string text = out.str();
  CHECK(bytes == text.size());
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);  // 5 events + summary
  CHECK(text.find("\"wall_s\"") == std::string::npos);     // node clock: no wall field

  const RunLogView view = parse_run_log(text);
  CHECK(view.status == "optimal");
  CHECK(view.seed == 11);
  CHECK(view.nodes == 9.0);
  CHECK(view.horizon == 20.0);
  CHECK(view.incumbents == std::vector<std::pair<double, double>>{{2, -2.0}, {5, -3.5}});
  CHECK(view.fixes == std::vector<std::pair<int, int>>{{0, 1}});
  CHECK(view.has_best);
  CHECK(view.best_objective == -3.5);
  CHECK(view.best_classes == std::vector<int>{1, 0});
  CHECK(view.dual_bound == -3.5);

  // Re-serialization is byte-identical.
  std::ostringstream again;
  write_run_log(record, again);
  CHECK(again.str() == text);
}

TEST_CASE("empty run log carries the no_solution status") {
  RunRecord record;
  record.instance = "small";
  record.seed = 0;
  record.nodes_processed = 1;
  record.horizon = 1;
  record.status = RunStatus::no_solution;
  std::ostringstream out;
  write_run_log(record, out);
  const RunLogView view = parse_run_log(out.str());
  CHECK(view.status == "no_solution");
  CHECK_FALSE(view.has_best);
  CHECK(view.incumbents.empty());
}
