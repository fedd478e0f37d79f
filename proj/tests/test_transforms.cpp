#include <random>

#include "doctest.h"
#include "oracles/formulation_oracles.hpp"
#include "oracles/tableau_lp.hpp"
#include "scopf/error.hpp"
#include "scopf/lp_solver.hpp"
#include "scopf/milp_solver.hpp"
#include "scopf/transforms.hpp"

using namespace scopf;

namespace {

// Feasible interval of the first variable of `m` given fixed values of the others.
std::pair<double, double> range_of(Model m, std::size_t col, const std::vector<std::optional<double>>& fixed) {
  std::vector<double> c(m.num_variables(), 0.0);
  Model lo_model = m, hi_model = m;
  lo_model.add_objective(LinExpr(m.ref(col), -1.0));
  hi_model.add_objective(LinExpr(m.ref(col), 1.0));
  auto lo = oracle::solve_tableau(lo_model, fixed);
  auto hi = oracle::solve_tableau(hi_model, fixed);
  REQUIRE(lo.status == oracle::TableauStatus::optimal);
  REQUIRE(hi.status == oracle::TableauStatus::optimal);
  return {lo.x[col], hi.x[col]};
}

// Startup cost implied by a commitment pattern, computed directly from the
// downtime preceding each start.
double simulate_startup_cost(const std::vector<int>& u, bool initial_on, double off_since,
                             const std::vector<double>& start_times,
                             const std::vector<StartupCategory>& cats) {
  double cost = 0.0;
  double last_stop = initial_on ? 0.0 : off_since;
  int prev = initial_on ? 1 : 0;
  for (std::size_t t = 0; t < u.size(); ++t) {
    if (u[t] == 0 && prev == 1) last_stop = start_times[t];
    if (u[t] == 1 && prev == 0) {
      const double down = start_times[t] - last_stop;
      for (const auto& c : cats)
        if (down >= c.downtime_lo - 1e-9 && down < c.downtime_hi - 1e-9) {
          cost += c.cost;
          break;
        }
    }
    prev = u[t];
  }
  return cost;
}

struct CommitmentModel {
  Model model{"commit"};
  CommitmentVars vars;
  CliqueStartup clique;
};

CommitmentModel commitment_model(const std::vector<int>& pattern, bool initial_on, double off_since,
                                 const std::vector<double>& start_times,
                                 const std::vector<StartupCategory>& cats, double min_downtime = 0.0) {
  CommitmentModel cm;
  Model& m = cm.model;
  for (std::size_t t = 0; t < pattern.size(); ++t) {
    const std::string tag = std::to_string(t);
    cm.vars.on.push_back(m.add_variable("u" + tag, pattern[t], pattern[t], Integrality::binary));
    cm.vars.start.push_back(m.add_variable("su" + tag, 0, 1, Integrality::binary));
    cm.vars.stop.push_back(m.add_variable("sd" + tag, 0, 1, Integrality::binary));
    LinExpr logic = LinExpr(cm.vars.on[t]) - LinExpr(cm.vars.start[t]) + LinExpr(cm.vars.stop[t]);
    if (t > 0) logic.add(cm.vars.on[t - 1], -1.0);
    m.add_constraint(logic, RowSense::eq, t > 0 ? 0.0 : (initial_on ? 1.0 : 0.0));
    m.add_constraint(LinExpr(cm.vars.start[t]) + LinExpr(cm.vars.stop[t]), RowSense::le, 1);
  }
  std::optional<double> off;
  if (!initial_on) off = off_since;
  cm.clique = clique_startup(m, cats, min_downtime, start_times, off, cm.vars.stop, cm.vars.start);
  m.freeze();
  return cm;
}

}  // namespace

TEST_CASE("onoff: bounds collapse to zero when off and open to [p_min, p_max] when on") {
  Model m;
  auto p = m.add_variable("p", 0, 10);
  auto u = m.add_variable("u", 0, 1, Integrality::binary);
  const std::size_t before = m.num_variables();
  onoff_to_bounds(m, p, u, 2, 10);
  CHECK(m.num_variables() == before);
  auto off = range_of(m, 0, {std::nullopt, 0.0});
  CHECK(off.first == doctest::Approx(0.0));
  CHECK(off.second == doctest::Approx(0.0));
  auto on = range_of(m, 0, {std::nullopt, 1.0});
  CHECK(on.first == doctest::Approx(2.0));
  CHECK(on.second == doctest::Approx(10.0));
  auto c = m.add_variable("c", 0, 1);
  CHECK_THROWS_AS(onoff_to_bounds(m, p, c, 0, 1), ContractError);
}

TEST_CASE("onoff: bounds form equals the bilinear form on random small instances") {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 20; ++k) {
    auto pr = oracle::random_onoff_problem(rng, 4);
    Model m = oracle::build_bounds_form(pr);
    SolveOptions o;
    o.mip_gap = 1e-9;
    auto r = solve_milp(m, o);
    REQUIRE(r.status == MilpStatus::optimal);
    CHECK(std::abs(r.objective - oracle::bilinear_form_optimum(pr)) <= 1e-6);
  }
}

TEST_CASE("mccormick: hand-evaluated envelope intervals") {
  for (auto [b, x, y, lo, hi] : {std::tuple{Bounds2D{0, 2, 0, 3}, 1.0, 1.0, 0.0, 2.0},
                                 std::tuple{Bounds2D{0, 1, 0, 1}, 0.5, 0.5, 0.0, 0.5}}) {
    Model m;
    auto w = m.add_variable("w", -100, 100);
    auto xv = m.add_variable("x", b.x_lo, b.x_hi);
    auto yv = m.add_variable("y", b.y_lo, b.y_hi);
    CHECK(mccormick_bilinear(m, w, xv, yv, b).size() == 4);
    auto r = range_of(m, 0, {std::nullopt, x, y});
    CHECK(r.first == doctest::Approx(lo));
    CHECK(r.second == doctest::Approx(hi));
    CHECK((lo <= x * y && x * y <= hi));
  }
  Model m;
  auto w = m.add_variable("w", -1, 1);
  CHECK_THROWS_AS(mccormick_bilinear(m, w, w, w, Bounds2D{0, kInf, 0, 1}), ContractError);
}

TEST_CASE("mccormick and square envelopes contain the true products everywhere") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 3), t(0, 1);
  for (int box = 0; box < 5; ++box) {
    double xl = u(rng), xh = xl + 3 * t(rng), yl = u(rng), yh = yl + 3 * t(rng);
    Model m;
    auto w = m.add_variable("w", -100, 100);
    auto s = m.add_variable("s", -100, 100);
    auto x = m.add_variable("x", xl, xh);
    auto y = m.add_variable("y", yl, yh);
    mccormick_bilinear(m, w, x, y, {xl, xh, yl, yh});
    envelope_square(m, s, x, xl, xh);
    for (int k = 0; k < 10000; ++k) {
      const double xv = xl + (xh - xl) * t(rng), yv = yl + (yh - yl) * t(rng);
      std::vector<double> pt{xv * yv, xv * xv, xv, yv};
      REQUIRE(m.max_violation(pt) <= 1e-12);
    }
  }
}

TEST_CASE("square envelope: hand-evaluated intervals") {
  for (auto [lo, hi, x, wlo, whi] : {std::tuple{-1.0, 1.0, 0.0, -1.0, 1.0}, std::tuple{0.0, 2.0, 1.0, 0.0, 2.0}}) {
    Model m;
    auto w = m.add_variable("w", -100, 100);
    auto xv = m.add_variable("x", lo, hi);
    CHECK(envelope_square(m, w, xv, lo, hi).size() == 3);
    auto r = range_of(m, 0, {std::nullopt, x});
    CHECK(r.first == doctest::Approx(wlo));
    CHECK(r.second == doctest::Approx(whi));
  }
}

TEST_CASE("soc squaring: hand examples and sign agreement") {
  Model m;
  auto x = m.add_variable("x", -5, 5);
  auto y = m.add_variable("y", -5, 5);
  auto z = m.add_variable("z", -5, 5);
  auto eval = [&](const QuadraticRow& q, double xv, double yv, double zv) {
    std::vector<double> val{xv, yv, zv};
    double s = -q.rhs;
    for (const auto& sq : q.squares) s += sq.coef * val[sq.var.index] * val[sq.var.index];
    for (const auto& b : q.bilinears) s += b.coef * val[b.x.index] * val[b.y.index];
    for (const auto& t : q.linear.terms()) s += t.coef * val[t.var.index];
    return s;
  };
  CHECK(eval(soc_to_quadratic(1, 1, 1, 0, x, y, z), 1, 1, 2) == doctest::Approx(0.0));
  CHECK(eval(soc_to_quadratic(3, 4, 5, 0, x, y, z), 1, 1, 7.0 / 5.0) == doctest::Approx(0.0));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  int checked = 0;
  for (int k = 0; k < 2000; ++k) {
    const double A = u(rng), B = u(rng), C = u(rng), D = u(rng);
    const double xv = u(rng), yv = u(rng), zv = u(rng);
    if (C * zv + D < 0) continue;
    const double lhs = std::abs(A * xv + B * yv) - (C * zv + D);
    const double q = eval(soc_to_quadratic(A, B, C, D, x, y, z), xv, yv, zv);
    if (std::abs(lhs) < 1e-9) continue;
    CHECK((lhs > 0) == (q > 0));
    ++checked;
  }
  CHECK(checked > 500);
}

TEST_CASE("relax_quadratic_row: counts and soundness") {
  Model m;
  auto x = m.add_variable("x", 0, 1);
  auto z = m.add_variable("z", 0, 1);
  QuadraticRow q;
  q.squares = {{x, 1.0}, {z, -1.0}};
  auto r = relax_quadratic_row(m, q);
  CHECK(r.aux.size() == 2);
  CHECK(r.rows.size() == 7);

  Model unb;
  auto a = unb.add_variable("a", 0, kInf);
  QuadraticRow qa;
  qa.squares = {{a, 1.0}};
  CHECK_THROWS_AS(relax_quadratic_row(unb, qa), ContractError);

  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    auto pr = oracle::random_soc_problem(rng);
    Model relaxed = oracle::build_relaxed_soc(pr);
    std::uniform_real_distribution<double> t(0, 1);
    // every original feasible point extends to the relaxed system
    for (int s = 0; s < 500; ++s) {
      const double xv = pr.lo[0] + (pr.hi[0] - pr.lo[0]) * t(rng);
      const double yv = pr.lo[1] + (pr.hi[1] - pr.lo[1]) * t(rng);
      const double zv = pr.lo[2] + (pr.hi[2] - pr.lo[2]) * t(rng);
      if (std::abs(pr.A * xv + pr.B * yv) > pr.C * zv + pr.D) continue;
      std::vector<double> pt{xv, yv, zv, xv * xv, yv * yv, zv * zv, xv * yv};
      REQUIRE(relaxed.num_variables() == pt.size());
      CHECK(relaxed.max_violation(pt) <= 1e-9);
    }
    auto lp = solve_lp(relaxed, SolveOptions{});
    REQUIRE(lp.status == LpStatus::optimal);
    CHECK(lp.objective >= oracle::soc_grid_optimum(pr, 31) - 1e-9);
  }
}

TEST_CASE("minmax: fixed operands pin the extremum") {
  Model m;
  auto a = m.add_variable("a", 3, 3);
  auto b = m.add_variable("b", 7, 7);
  auto y = m.add_variable("y", -100, 100);
  std::vector<VarRef> xs{a, b};
  auto res = minmax_to_mip(m, y, xs, Extremum::max);
  CHECK(res.selectors.size() == 2);
  Model lo = m, hi = m;
  lo.add_objective(LinExpr(y, -1.0));
  hi.add_objective(LinExpr(y, 1.0));
  CHECK(solve_milp(lo, SolveOptions{}).x[2] == doctest::Approx(7.0));
  CHECK(solve_milp(hi, SolveOptions{}).x[2] == doctest::Approx(7.0));
  CHECK_THROWS_AS(minmax_to_mip(m, y, xs, Extremum::max, 1.0), ContractError);
}

TEST_CASE("minmax: single operand and random fixed lists") {
  Model one;
  auto x = one.add_variable("x", -2, 5);
  auto y = one.add_variable("y", -10, 10);
  std::vector<VarRef> xs{x};
  minmax_to_mip(one, y, xs, Extremum::min);
  one.add_objective(LinExpr(y) - LinExpr(x, 0.5));
  auto r = solve_milp(one, SolveOptions{});
  CHECK(r.x[1] == doctest::Approx(r.x[0]));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 0; k < 10; ++k) {
    for (Extremum kind : {Extremum::max, Extremum::min}) {
      Model m;
      std::vector<VarRef> v;
      double truth = kind == Extremum::max ? -kInf : kInf;
      for (int i = 0; i < 5; ++i) {
        const double val = u(rng);
        v.push_back(m.add_variable("x" + std::to_string(i), val, val));
        truth = kind == Extremum::max ? std::max(truth, val) : std::min(truth, val);
      }
      auto yy = m.add_variable("y", -10, 10);
      minmax_to_mip(m, yy, v, kind);
      m.add_objective(LinExpr(yy, k % 2 ? 1.0 : -1.0));
      auto res = solve_milp(m, SolveOptions{});
      REQUIRE(res.has_solution());
      CHECK(res.x[yy.index] == doctest::Approx(truth).epsilon(1e-9));
    }
  }
}

TEST_CASE("clique startup: hot start after two hours down") {
  const std::vector<StartupCategory> cats{{1, 3, 10}, {3, kInf, 50}};
  const std::vector<double> st{0, 1, 2, 3};
  auto cm = commitment_model({0, 0, 1, 1}, true, 0, st, cats, 1.0);
  auto r = solve_milp(cm.model, SolveOptions{});
  REQUIRE(r.status == MilpStatus::optimal);
  CHECK(r.x[cm.clique.delta[2][0].index] == doctest::Approx(1.0));
  CHECK(r.x[cm.clique.delta[2][1].index] == doctest::Approx(0.0));
  CHECK(-r.objective == doctest::Approx(10.0));
}

TEST_CASE("clique startup: cold start after a long initial outage") {
  const std::vector<StartupCategory> cats{{1, 3, 10}, {3, kInf, 50}};
  auto cm = commitment_model({1, 1, 1}, false, -10, {0, 1, 2}, cats, 1.0);
  auto r = solve_milp(cm.model, SolveOptions{});
  REQUIRE(r.status == MilpStatus::optimal);
  CHECK(r.x[cm.clique.delta[0][1].index] == doctest::Approx(1.0));
  CHECK(-r.objective == doctest::Approx(50.0));
}

TEST_CASE("clique startup: no start costs nothing") {
  const std::vector<StartupCategory> cats{{1, 3, 10}, {3, kInf, 50}};
  auto cm = commitment_model({1, 1, 1}, true, 0, {0, 1, 2}, cats, 1.0);
  auto r = solve_milp(cm.model, SolveOptions{});
  CHECK(r.objective == doctest::Approx(0.0));
  for (const auto& row : cm.clique.delta)
    for (auto d : row) CHECK(r.x[d.index] == 0.0);
}

TEST_CASE("clique startup: optimum equals the simulated cost for random patterns") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 60; ++k) {
    const int T = 2 + k % 5;
    std::vector<double> st{0.0};
    for (int t = 1; t < T; ++t) st.push_back(st.back() + (u(rng) < 0.5 ? 1.0 : 0.5));
    std::vector<int> pattern(T);
    for (int& p : pattern) p = u(rng) < 0.5;
    const bool initial_on = u(rng) < 0.5;
    const double off_since = -4.0 * u(rng);
    const std::vector<StartupCategory> cats{{0, 1, 5}, {1, 2.5, 20}, {2.5, kInf, 60}};
    auto cm = commitment_model(pattern, initial_on, off_since, st, cats);
    auto r = solve_milp(cm.model, SolveOptions{});
    REQUIRE(r.status == MilpStatus::optimal);
    CAPTURE(k);
    CHECK(-r.objective == doctest::Approx(simulate_startup_cost(pattern, initial_on, off_since, st, cats)));
  }
}

TEST_CASE("clique startup: categories must cover the downtime range") {
  Model m;
  std::vector<VarRef> stop{m.add_variable("sd", 0, 1, Integrality::binary)};
  std::vector<VarRef> start{m.add_variable("su", 0, 1, Integrality::binary)};
  const std::vector<StartupCategory> gap{{0, 1, 5}, {2, kInf, 9}};
  CHECK_THROWS_AS(clique_startup(m, gap, 0.0, std::vector<double>{0.0}, std::nullopt, stop, start),
                  ContractError);
  const std::vector<StartupCategory> late{{2, kInf, 9}};
  CHECK_THROWS_AS(clique_startup(m, late, 1.0, std::vector<double>{0.0}, std::nullopt, stop, start),
                  ContractError);
}

TEST_CASE("split_long_expression: counts and unchanged optimum") {
  Model m;
  LinExpr e;
  for (int i = 0; i < 100; ++i) e.add(m.add_variable("x" + std::to_string(i), 0, 1), 1.0 + i % 3);
  auto s = split_long_expression(m, e, 50);
  CHECK(s.partials.size() == 2);
  CHECK(s.rows.size() == 3);
  for (auto r : s.rows) CHECK(m.constraints()[r].terms.size() <= 51);
  REQUIRE(s.value.has_value());

  Model small;
  LinExpr e3;
  for (int i = 0; i < 3; ++i) e3.add(small.add_variable("y" + std::to_string(i), 0, 1), 1.0);
  auto none = split_long_expression(small, e3, 50);
  CHECK_FALSE(none.value.has_value());
  CHECK(small.num_constraints() == 0);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 5; ++k) {
    Model a("plain"), b("split");
    LinExpr ea, eb, oa, ob;
    for (int i = 0; i < 130; ++i) {
      const double c = u(rng), w = u(rng);
      auto va = a.add_variable("v", 0, 1);
      auto vb = b.add_variable("v", 0, 1);
      ea.add(va, c);
      eb.add(vb, c);
      oa.add(va, w);
      ob.add(vb, w);
    }
    a.add_constraint(ea, RowSense::le, 0.5);
    auto sp = split_long_expression(b, eb, 20);
    b.add_constraint(LinExpr(*sp.value), RowSense::le, 0.5);
    a.add_objective(oa);
    b.add_objective(ob);
    auto ra = solve_lp(a, SolveOptions{});
    auto rb = solve_lp(b, SolveOptions{});
    REQUIRE(ra.status == LpStatus::optimal);
    REQUIRE(rb.status == LpStatus::optimal);
    CHECK(std::abs(ra.objective - rb.objective) <= 1e-9);
  }
}

TEST_CASE("penalized slack: restores feasibility at the penalty price") {
  Model m;
  auto x = m.add_variable("x", -kInf, kInf);
  auto r1 = m.add_constraint(LinExpr(x), RowSense::le, 1);
  m.add_constraint(LinExpr(x), RowSense::ge, 2);
  auto s = add_penalized_slack(m, r1, 7.0);
  CHECK_FALSE(s.lower.has_value());
  auto res = solve_lp(m, SolveOptions{});
  REQUIRE(res.status == LpStatus::optimal);
  CHECK(res.x[s.slack.index] == doctest::Approx(1.0));
  CHECK(res.objective == doctest::Approx(-7.0));
  CHECK_THROWS_AS(add_penalized_slack(m, r1, 0.0), ContractError);
}

TEST_CASE("penalized slack: idle on feasible rows and one nonzero per slack column") {
  Model m;
  auto x = m.add_variable("x", 0, 10);
  auto le = m.add_constraint(LinExpr(x), RowSense::le, 4);
  auto eq = m.add_constraint(LinExpr(x, 2.0), RowSense::eq, 6);
  auto s1 = add_penalized_slack(m, le, 100.0);
  auto s2 = add_penalized_slack(m, eq, 100.0);
  REQUIRE(s2.lower.has_value());
  m.add_objective(LinExpr(x, 5.0));
  auto res = solve_lp(m, SolveOptions{});
  REQUIRE(res.status == LpStatus::optimal);
  CHECK(res.x[s1.slack.index] == doctest::Approx(0.0));
  CHECK(res.x[s2.slack.index] == doctest::Approx(0.0));
  std::vector<int> count(m.num_variables(), 0);
  for (const auto& t : m.triplets()) ++count[t.col];
  CHECK(count[s1.slack.index] == 1);
  CHECK(count[s2.slack.index] == 1);
  CHECK(count[s2.lower->index] == 1);
}
