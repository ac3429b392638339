#include <doctest.h>

#include <random>

#include "entrofix/simplex.hpp"
#include "oracles.hpp"

using namespace entrofix;

namespace {

LinearProgramView box_lp(std::vector<double> objective, std::vector<double> lower,
                         std::vector<double> upper) {
  LinearProgramView lp;
  lp.columns.resize(objective.size());
  lp.objective = std::move(objective);
  lp.lower = std::move(lower);
  lp.upper = std::move(upper);
  return lp;
}

void add_row(LinearProgramView& lp, const std::vector<std::pair<int, double>>& terms, Sense sense,
             double rhs) {
  const int row = lp.num_rows++;
  for (const auto& [var, coef] : terms) lp.columns[var].emplace_back(row, coef);
  lp.senses.push_back(sense);
  lp.rhs.push_back(rhs);
}

}  // namespace

TEST_CASE("bound-attained optimum without rows") {
  LinearProgramView lp = box_lp({-1.0}, {0.0}, {1.0});
  const LpResult result = solve_lp(lp);
  REQUIRE(result.status == LpStatus::optimal);
  CHECK(result.objective == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(result.x[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("contradictory rows are infeasible") {
  LinearProgramView lp = box_lp({0.0}, {0.0}, {5.0});
  add_row(lp, {{0, 1.0}}, Sense::ge, 2.0);
  add_row(lp, {{0, 1.0}}, Sense::le, 1.0);
  CHECK(solve_lp(lp).status == LpStatus::infeasible);
}

TEST_CASE("two-variable knapsack relaxation") {
  LinearProgramView lp = box_lp({-1.0, -1.0}, {0.0, 0.0}, {1.0, 1.0});
  add_row(lp, {{0, 1.0}, {1, 1.0}}, Sense::le, 1.5);
  const LpResult result = solve_lp(lp);
  REQUIRE(result.status == LpStatus::optimal);
  CHECK(result.objective == doctest::Approx(-1.5).epsilon(1e-9));
}

TEST_CASE("unbounded ray is reported") {
  LinearProgramView lp = box_lp({-1.0}, {0.0}, {kInf});
  CHECK(solve_lp(lp).status == LpStatus::unbounded);
}

TEST_CASE("equality rows force the feasible segment") {
  LinearProgramView lp = box_lp({1.0, 2.0}, {0.0, 0.0}, {4.0, 4.0});
  add_row(lp, {{0, 1.0}, {1, 1.0}}, Sense::eq, 3.0);
  const LpResult result = solve_lp(lp);
  REQUIRE(result.status == LpStatus::optimal);
  CHECK(result.objective == doctest::Approx(3.0).epsilon(1e-9));  // x=(3,0)
  CHECK(result.x[0] == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("random LPs match the vertex-enumeration oracle") {
  std::mt19937_64 rng(7771);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const LinearProgramView lp = testing::random_lp(rng);
    const testing::LpOracleResult expect = testing::enumerate_lp_vertices(lp);
    const LpResult got = solve_lp(lp);
    CAPTURE(trial);
    if (expect.feasible) {
      REQUIRE(got.status == LpStatus::optimal);
      CHECK(got.objective == doctest::Approx(expect.objective).epsilon(1e-6));
      ++solved;
    } else {
      REQUIRE(got.status == LpStatus::infeasible);
    }
  }
  CHECK(solved > 50);  // the generator must not degenerate into infeasible-only
}

TEST_CASE("warm-started re-solve equals a cold solve after a bound change") {
  std::mt19937_64 rng(4242);
  int warm_used = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const LinearProgramView lp = testing::random_lp(rng);
    SimplexSolver solver(lp);
    const LpResult first = solver.solve();
    if (first.status != LpStatus::optimal) continue;

    // Tighten one variable's box around the midpoint and re-solve warm.
    std::vector<double> lower = lp.lower;
    std::vector<double> upper = lp.upper;
    std::uniform_int_distribution<int> pick(0, lp.num_structural() - 1);
    const int var = pick(rng);
    const double mid = 0.5 * (lower[var] + upper[var]);
    if (trial % 2 == 0)
      upper[var] = mid;
    else
      lower[var] = mid;

    const LpResult warm = solver.solve_with_bounds(lower, upper, &first.basis);
    SimplexSolver cold_solver(lp);
    const LpResult cold = cold_solver.solve_with_bounds(lower, upper);
    CAPTURE(trial);
    REQUIRE(warm.status == cold.status);
    if (warm.status == LpStatus::optimal) {
      CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-8));
      ++warm_used;
    }
  }
  CHECK(warm_used > 20);
}

TEST_CASE("make_lp mirrors the model") {
  testing::ModelBuilder b;
  b.var("x0", 0, 1, VarKind::binary, -1.0);
  b.var("x1", 0, 1, VarKind::binary, -1.0);
  b.row("cap", {{"x0", 1.0}, {"x1", 1.0}}, Sense::le, 1.5);
  const Model model = b.build();
  const LinearProgramView lp = make_lp(model);
  CHECK(lp.num_structural() == 2);
  CHECK(lp.num_rows == 1);
  const LpResult result = solve_lp(lp);
  REQUIRE(result.status == LpStatus::optimal);
  CHECK(result.objective == doctest::Approx(-1.5).epsilon(1e-9));
}
