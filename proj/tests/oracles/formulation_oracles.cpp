#include "oracles/formulation_oracles.hpp"

#include <cmath>
#include <limits>

#include "oracles/tableau_lp.hpp"

namespace oracle {

using scopf::Integrality;
using scopf::LinExpr;
using scopf::Model;
using scopf::RowSense;
using scopf::VarRef;

OnOffProblem random_onoff_problem(std::mt19937_64& rng, int max_binaries) {
  std::uniform_real_distribution<double> u(0, 1);
  OnOffProblem p;
  std::uniform_int_distribution<int> ndev(1, std::max(1, std::min(3, max_binaries)));
  p.devices = ndev(rng);
  std::uniform_int_distribution<int> nper(1, std::max(1, std::min(3, max_binaries / p.devices)));
  p.periods = nper(rng);
  for (int j = 0; j < p.devices; ++j) {
    const double pmax = 1 + 4 * u(rng);
    p.p_max.push_back(pmax);
    p.p_min.push_back(pmax * 0.6 * u(rng));
    p.price.push_back(1 + 9 * u(rng));
    p.fixed_cost.push_back(8 * u(rng));
  }
  for (int t = 0; t < p.periods; ++t) p.demand.push_back(0.5 + 6 * u(rng));
  p.ramp = 0.5 + 3 * u(rng);
  return p;
}

namespace {

// Shared skeleton: balance rows, ramp rows and objective over per-(j,t) power
// expressions supplied by the caller.
void add_common_rows(Model& m, const OnOffProblem& pr, const std::vector<std::vector<LinExpr>>& power) {
  for (int t = 0; t < pr.periods; ++t) {
    VarRef shortfall = m.add_variable("short" + std::to_string(t), 0, scopf::kInf);
    VarRef surplus = m.add_variable("surplus" + std::to_string(t), 0, scopf::kInf);
    LinExpr bal = LinExpr(shortfall) - LinExpr(surplus);
    for (int j = 0; j < pr.devices; ++j) bal += power[j][t];
    m.add_constraint(bal, RowSense::eq, pr.demand[t]);
    m.add_objective(-pr.shortfall_penalty * LinExpr(shortfall) - pr.surplus_penalty * LinExpr(surplus));
  }
  for (int j = 0; j < pr.devices; ++j) {
    for (int t = 1; t < pr.periods; ++t) {
      LinExpr diff = power[j][t] - power[j][t - 1];
      m.add_constraint(diff, RowSense::le, pr.ramp + pr.p_min[j]);
      m.add_constraint(diff, RowSense::ge, -pr.ramp - pr.p_min[j]);
    }
    for (int t = 0; t < pr.periods; ++t) m.add_objective(-pr.price[j] * power[j][t]);
  }
}

}  // namespace

Model build_bounds_form(const OnOffProblem& pr) {
  Model m("bounds_form");
  std::vector<std::vector<LinExpr>> power(pr.devices);
  for (int j = 0; j < pr.devices; ++j)
    for (int t = 0; t < pr.periods; ++t) {
      const std::string tag = std::to_string(j) + "_" + std::to_string(t);
      VarRef p = m.add_variable("p" + tag, 0, pr.p_max[j]);
      VarRef u = m.add_variable("u" + tag, 0, 1, Integrality::binary);
      scopf::onoff_to_bounds(m, p, u, pr.p_min[j], pr.p_max[j]);
      m.add_objective(-pr.fixed_cost[j] * LinExpr(u));
      power[j].push_back(LinExpr(p));
    }
  add_common_rows(m, pr, power);
  m.freeze();
  return m;
}

double bilinear_form_optimum(const OnOffProblem& pr) {
  const int nb = pr.devices * pr.periods;
  double best = -std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << nb); ++mask) {
    Model m("bilinear_form");
    std::vector<std::vector<LinExpr>> power(pr.devices);
    double fixed = 0.0;
    for (int j = 0; j < pr.devices; ++j)
      for (int t = 0; t < pr.periods; ++t) {
        const double u = (mask >> (j * pr.periods + t)) & 1;
        VarRef pt = m.add_variable("pt", pr.p_min[j], pr.p_max[j]);
        power[j].push_back(LinExpr(pt, u));
        fixed += pr.fixed_cost[j] * u;
      }
    add_common_rows(m, pr, power);
    auto r = solve_tableau(m);
    if (r.status != TableauStatus::optimal) continue;
    best = std::max(best, r.objective - fixed);
  }
  return best;
}

SocProblem random_soc_problem(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  SocProblem p;
  p.A = 2 * u(rng);
  p.B = 2 * u(rng);
  p.C = 0.2 + std::abs(u(rng));
  p.D = 0.5 + std::abs(u(rng));
  for (int k = 0; k < 3; ++k) {
    p.lo[k] = -1 + 0.5 * u(rng);
    p.hi[k] = 1 + 0.5 * u(rng);
    p.c[k] = u(rng);
  }
  // z must keep C z + D >= 0 for the squared form to be equivalent.
  p.lo[2] = std::max(p.lo[2], -p.D / p.C);
  return p;
}

double soc_grid_optimum(const SocProblem& p, int steps) {
  double best = -std::numeric_limits<double>::infinity();
  auto at = [&](int k, int i) { return p.lo[k] + (p.hi[k] - p.lo[k]) * i / (steps - 1); };
  for (int a = 0; a < steps; ++a)
    for (int b = 0; b < steps; ++b)
      for (int c = 0; c < steps; ++c) {
        const double x = at(0, a), y = at(1, b), z = at(2, c);
        if (std::abs(p.A * x + p.B * y) > p.C * z + p.D) continue;
        best = std::max(best, p.c[0] * x + p.c[1] * y + p.c[2] * z);
      }
  return best;
}

Model build_relaxed_soc(const SocProblem& p) {
  Model m("relaxed_soc");
  VarRef x = m.add_variable("x", p.lo[0], p.hi[0]);
  VarRef y = m.add_variable("y", p.lo[1], p.hi[1]);
  VarRef z = m.add_variable("z", p.lo[2], p.hi[2]);
  auto row = scopf::soc_to_quadratic(p.A, p.B, p.C, p.D, x, y, z);
  scopf::relax_quadratic_row(m, row);
  m.add_objective(p.c[0] * LinExpr(x) + p.c[1] * LinExpr(y) + p.c[2] * LinExpr(z));
  m.freeze();
  return m;
}

}  // namespace oracle
