#include <random>

#include "doctest.h"
#include "oracles/tableau_lp.hpp"
#include "scopf/error.hpp"
#include "scopf/lp_solver.hpp"

using namespace scopf;

namespace {

Model small_lp() {
  Model m("small");
  auto x = m.add_variable("x", 0, 1);
  auto y = m.add_variable("y", 0, 1);
  m.add_constraint(LinExpr(x) + LinExpr(y), RowSense::le, 1);
  m.add_objective(3.0 * LinExpr(x) + 2.0 * LinExpr(y));
  return m;
}

Model random_lp(std::mt19937_64& rng, bool allow_free) {
  std::uniform_int_distribution<int> nvar(2, 8), nrow(1, 6), pick(0, 9);
  std::uniform_real_distribution<double> coef(-5, 5), width(0.5, 6);
  Model m("random");
  const int n = nvar(rng), rows = nrow(rng);
  std::vector<VarRef> v;
  for (int j = 0; j < n; ++j) {
    const int kind = pick(rng);
    double lo = coef(rng), hi = lo + width(rng);
    if (allow_free && kind == 0) lo = -kInf;
    if (allow_free && kind == 1) hi = kInf;
    if (allow_free && kind == 2) lo = -kInf, hi = kInf;
    v.push_back(m.add_variable("v" + std::to_string(j), lo, hi));
  }
  for (int i = 0; i < rows; ++i) {
    LinExpr e;
    for (int j = 0; j < n; ++j)
      if (pick(rng) < 7) e.add(v[j], std::round(coef(rng) * 4) / 4);
    const int s = pick(rng) % 3;
    m.add_constraint(e, s == 0 ? RowSense::le : s == 1 ? RowSense::ge : RowSense::eq, coef(rng));
  }
  LinExpr obj;
  for (int j = 0; j < n; ++j) obj.add(v[j], coef(rng));
  m.add_objective(obj);
  m.set_objective_sense(pick(rng) % 2 ? ObjSense::maximize : ObjSense::minimize);
  return m;
}

}  // namespace

TEST_CASE("lp: small maximization picks the better column") {
  auto r = solve_lp(small_lp(), SolveOptions{});
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.objective == doctest::Approx(3.0));
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(0.0));
}

TEST_CASE("lp: contradictory bound and row is infeasible") {
  Model m;
  auto x = m.add_variable("x", 0, kInf);
  m.add_constraint(LinExpr(x), RowSense::le, -1);
  m.add_objective(LinExpr(x));
  CHECK(solve_lp(m, SolveOptions{}).status == LpStatus::infeasible);
}

TEST_CASE("lp: unbounded ray is detected") {
  Model m;
  auto x = m.add_variable("x", 0, kInf);
  auto y = m.add_variable("y", 0, kInf);
  m.add_constraint(LinExpr(x) - LinExpr(y), RowSense::le, 1);
  m.add_objective(LinExpr(x));
  CHECK(solve_lp(m, SolveOptions{}).status == LpStatus::unbounded);
}

TEST_CASE("lp: free variables and equality rows") {
  Model m;
  auto x = m.add_variable("x", -kInf, kInf);
  auto y = m.add_variable("y", -kInf, kInf);
  m.add_constraint(LinExpr(x) + LinExpr(y), RowSense::eq, 2);
  m.add_constraint(LinExpr(x) - LinExpr(y), RowSense::le, 1);
  m.add_objective(LinExpr(x) + 2.0 * LinExpr(y));
  m.set_objective_sense(ObjSense::minimize);
  auto r = solve_lp(m, SolveOptions{});
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.x[0] == doctest::Approx(1.5));
  CHECK(r.x[1] == doctest::Approx(0.5));
}

TEST_CASE("lp: random dense models agree with the tableau reference") {
  std::mt19937_64 rng(20240611);
  int optimal = 0;
  for (int k = 0; k < 50; ++k) {
    Model m = random_lp(rng, k % 2 == 1);
    auto ref = oracle::solve_tableau(m);
    auto got = solve_lp(m, SolveOptions{});
    CAPTURE(k);
    if (ref.status == oracle::TableauStatus::optimal) {
      ++optimal;
      REQUIRE(got.status == LpStatus::optimal);
      CHECK(std::abs(got.objective - ref.objective) <= 1e-7 * std::max(1.0, std::abs(ref.objective)));
      CHECK(m.max_violation(got.x) <= 1e-7);
    } else if (ref.status == oracle::TableauStatus::infeasible) {
      CHECK(got.status == LpStatus::infeasible);
    } else {
      CHECK(got.status == LpStatus::unbounded);
    }
  }
  CHECK(optimal >= 10);
}

TEST_CASE("lp: warm start after a bound change reaches the same optimum as a cold start") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 30; ++k) {
    Model m = random_lp(rng, false);
    SimplexSolver solver(m);
    Deadline d(10);
    auto first = solver.solve(SolveOptions{}, d);
    if (first.status != LpStatus::optimal) continue;
    const double lo = m.variable(0).lo, hi = m.variable(0).hi;
    solver.set_column_bounds(0, lo, 0.5 * (lo + hi));
    auto warm = solver.solve(SolveOptions{}, d, first.basis.get());
    SimplexSolver cold(m);
    cold.set_column_bounds(0, lo, 0.5 * (lo + hi));
    auto ref = cold.solve(SolveOptions{}, d);
    REQUIRE(warm.status == ref.status);
    if (ref.status == LpStatus::optimal) CHECK(warm.objective == doctest::Approx(ref.objective).epsilon(1e-9));
  }
}

TEST_CASE("solve options reject out-of-range tolerances") {
  SolveOptions o;
  o.time_limit = 0;
  CHECK_THROWS_AS(o.validate(), ContractError);
  o = {};
  o.feas_tol = 0.1;
  CHECK_THROWS_AS(o.validate(), ContractError);
  o = {};
  o.mip_gap = 0;
  CHECK_THROWS_AS(o.validate(), ContractError);
}
