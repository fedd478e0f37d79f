#include "scopf/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "scopf/error.hpp"

namespace scopf {

namespace {

void require_finite_box(double lo, double hi, const char* what) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw ContractError(std::string(what) + ": infinite bounds");
  if (lo > hi) throw ContractError(std::string(what) + ": inverted bounds");
}

const std::string& name_of(const Model& m, VarRef v) { return m.variable(v).name; }

}  // namespace

std::array<std::size_t, 2> onoff_to_bounds(Model& model, VarRef p, VarRef u, double p_min,
                                           double p_max) {
  if (model.variable(u).integrality != Integrality::binary)
    throw ContractError("onoff_to_bounds: " + name_of(model, u) + " is not binary");
  if (!(p_min <= p_max)) throw ContractError("onoff_to_bounds: p_min > p_max");
  const std::string& n = name_of(model, p);
  auto upper = model.add_constraint(LinExpr(p).add(u, -p_max), RowSense::le, 0.0, n + "_onmax");
  auto lower = model.add_constraint(LinExpr(p).add(u, -p_min), RowSense::ge, 0.0, n + "_onmin");
  return {upper, lower};
}

std::array<std::size_t, 4> mccormick_bilinear(Model& model, VarRef w, VarRef x, VarRef y,
                                              const Bounds2D& b) {
  require_finite_box(b.x_lo, b.x_hi, "mccormick_bilinear x");
  require_finite_box(b.y_lo, b.y_hi, "mccormick_bilinear y");
  const std::string& n = name_of(model, w);
  // w - xl*y - x*yl >= -xl*yl, and the three analogous planes.
  auto r1 = model.add_constraint(LinExpr(w).add(y, -b.x_lo).add(x, -b.y_lo), RowSense::ge,
                                 -b.x_lo * b.y_lo, n + "_mc1");
  auto r2 = model.add_constraint(LinExpr(w).add(y, -b.x_hi).add(x, -b.y_hi), RowSense::ge,
                                 -b.x_hi * b.y_hi, n + "_mc2");
  auto r3 = model.add_constraint(LinExpr(w).add(y, -b.x_hi).add(x, -b.y_lo), RowSense::le,
                                 -b.x_hi * b.y_lo, n + "_mc3");
  auto r4 = model.add_constraint(LinExpr(w).add(y, -b.x_lo).add(x, -b.y_hi), RowSense::le,
                                 -b.x_lo * b.y_hi, n + "_mc4");
  return {r1, r2, r3, r4};
}

std::array<std::size_t, 3> envelope_square(Model& model, VarRef w, VarRef x, double lo, double hi) {
  require_finite_box(lo, hi, "envelope_square");
  const std::string& n = name_of(model, w);
  auto t1 = model.add_constraint(LinExpr(w).add(x, -2.0 * lo), RowSense::ge, -lo * lo, n + "_sqlo");
  auto t2 = model.add_constraint(LinExpr(w).add(x, -2.0 * hi), RowSense::ge, -hi * hi, n + "_sqhi");
  auto sec = model.add_constraint(LinExpr(w).add(x, -(lo + hi)), RowSense::le, -lo * hi, n + "_sqsec");
  return {t1, t2, sec};
}

QuadraticRow soc_to_quadratic(double A, double B, double C, double D, VarRef x, VarRef y, VarRef z) {
  QuadraticRow row;
  if (A != 0.0) row.squares.push_back({x, A * A});
  if (B != 0.0) row.squares.push_back({y, B * B});
  if (A != 0.0 && B != 0.0) row.bilinears.push_back({x, y, 2.0 * A * B});
  if (C != 0.0) row.squares.push_back({z, -C * C});
  if (C * D != 0.0) row.linear.add(z, -2.0 * C * D);
  row.rhs = D * D;
  LinExpr side;
  if (C != 0.0) side.add(z, C);
  side.add_constant(D);
  row.side = side;
  return row;
}

RelaxedRow relax_quadratic_row(Model& model, const QuadraticRow& row) {
  RelaxedRow out;
  LinExpr linking = row.linear;
  for (const auto& sq : row.squares) {
    if (sq.coef == 0.0) continue;
    const Variable& v = model.variable(sq.var);
    if (!std::isfinite(v.lo) || !std::isfinite(v.hi))
      throw ContractError("relax_quadratic_row: unbounded operand " + v.name);
    double lo = v.lo, hi = v.hi;
    double wmax = std::max(lo * lo, hi * hi);
    double wmin = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(lo * lo, hi * hi);
    std::string vname = v.name;
    VarRef w = model.add_variable("sq_" + vname, wmin, wmax);
    auto rows = envelope_square(model, w, sq.var, lo, hi);
    out.aux.push_back(w);
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    linking.add(w, sq.coef);
  }
  for (const auto& bl : row.bilinears) {
    if (bl.coef == 0.0) continue;
    const Variable& vx = model.variable(bl.x);
    const Variable& vy = model.variable(bl.y);
    if (!std::isfinite(vx.lo) || !std::isfinite(vx.hi) || !std::isfinite(vy.lo) || !std::isfinite(vy.hi))
      throw ContractError("relax_quadratic_row: unbounded operand in " + vx.name + "*" + vy.name);
    Bounds2D b{vx.lo, vx.hi, vy.lo, vy.hi};
    double c[] = {b.x_lo * b.y_lo, b.x_lo * b.y_hi, b.x_hi * b.y_lo, b.x_hi * b.y_hi};
    std::string wname = "bl_" + vx.name + "_" + vy.name;
    VarRef w = model.add_variable(wname, *std::min_element(c, c + 4), *std::max_element(c, c + 4));
    auto rows = mccormick_bilinear(model, w, bl.x, bl.y, b);
    out.aux.push_back(w);
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    linking.add(w, bl.coef);
  }
  out.rows.push_back(model.add_constraint(linking, RowSense::le, row.rhs));
  if (row.side) out.rows.push_back(model.add_constraint(*row.side, RowSense::ge, 0.0));
  return out;
}

MinMaxResult minmax_to_mip(Model& model, VarRef y, std::span<const VarRef> xs, Extremum kind,
                           std::optional<double> big_m) {
  if (xs.empty()) throw ContractError("minmax_to_mip: empty operand list");
  double lo = kInf, hi = -kInf;
  for (VarRef x : xs) {
    const Variable& v = model.variable(x);
    if (!std::isfinite(v.lo) || !std::isfinite(v.hi))
      throw ContractError("minmax_to_mip: unbounded operand " + v.name);
    lo = std::min(lo, v.lo);
    hi = std::max(hi, v.hi);
  }
  double needed = hi - lo;
  double m = big_m.value_or(needed);
  if (m < needed - 1e-12)
    throw ContractError("minmax_to_mip: big_m " + std::to_string(m) + " below operand spread " +
                        std::to_string(needed));
  MinMaxResult out;
  const std::string yn = name_of(model, y);
  LinExpr pick;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    VarRef z = model.add_variable(yn + "_sel" + std::to_string(i), 0.0, 1.0, Integrality::binary);
    out.selectors.push_back(z);
    pick.add(z, 1.0);
    if (kind == Extremum::max) {
      // y >= x_i; y <= x_i + M(1 - z_i)
      out.rows.push_back(model.add_constraint(LinExpr(y).add(xs[i], -1.0), RowSense::ge, 0.0));
      out.rows.push_back(model.add_constraint(LinExpr(y).add(xs[i], -1.0).add(z, m), RowSense::le, m));
    } else {
      // y <= x_i; y >= x_i - M(1 - z_i)
      out.rows.push_back(model.add_constraint(LinExpr(y).add(xs[i], -1.0), RowSense::le, 0.0));
      out.rows.push_back(model.add_constraint(LinExpr(y).add(xs[i], -1.0).add(z, -m), RowSense::ge, -m));
    }
  }
  out.rows.push_back(model.add_constraint(pick, RowSense::eq, 1.0, yn + "_pick"));
  return out;
}

CliqueStartup clique_startup(Model& model, std::span<const StartupCategory> cats, double min_downtime,
                             std::span<const double> start_times, std::optional<double> off_since,
                             std::span<const VarRef> stop, std::span<const VarRef> start,
                             const std::string& prefix) {
  const std::size_t T = start_times.size();
  if (stop.size() != T || start.size() != T)
    throw ContractError("clique_startup: indicator vectors do not match the window");
  if (cats.empty() || cats.front().downtime_lo > min_downtime + 1e-9 || cats.back().downtime_hi != kInf)
    throw ContractError("clique_startup: categories do not cover [min_downtime, inf)");
  for (std::size_t k = 1; k < cats.size(); ++k)
    if (cats[k].downtime_lo > cats[k - 1].downtime_hi + 1e-12 || cats[k].downtime_lo < cats[k - 1].downtime_lo)
      throw ContractError("clique_startup: categories are not contiguous and ascending");

  const double sign = model.sense_sign();
  const std::size_t K = cats.size();
  CliqueStartup out;
  out.delta.resize(T);
  constexpr double eps = 1e-9;
  for (std::size_t t = 0; t < T; ++t) {
    if (K == 1) {
      // One category: the indicator is the start itself.
      out.delta[t].push_back(start[t]);
      if (cats[0].cost != 0.0) model.add_objective(LinExpr(start[t], -sign * cats[0].cost));
      continue;
    }
    LinExpr pick;
    for (std::size_t k = 0; k < K; ++k) {
      VarRef d = model.add_variable(prefix + "_k" + std::to_string(k) + "_t" + std::to_string(t), 0.0,
                                    1.0, Integrality::binary);
      out.delta[t].push_back(d);
      pick.add(d, 1.0);
      if (cats[k].cost != 0.0) model.add_objective(LinExpr(d, -sign * cats[k].cost));
    }
    pick.add(start[t], -1.0);
    out.rows.push_back(model.add_constraint(pick, RowSense::eq, 0.0, prefix + "_pick_t" + std::to_string(t)));
    // Nested windows: the k cheapest categories need a shutdown less than hi_k ago.
    for (std::size_t k = 0; k + 1 < K; ++k) {
      double lo = cats.front().downtime_lo, hi = cats[k].downtime_hi;
      LinExpr row;
      for (std::size_t kk = 0; kk <= k; ++kk) row.add(out.delta[t][kk], 1.0);
      for (std::size_t s = 0; s < t; ++s) {
        double elapsed = start_times[t] - start_times[s];
        if (elapsed >= lo - eps && elapsed < hi - eps) row.add(stop[s], -1.0);
      }
      double rhs = 0.0;
      if (off_since) {
        double elapsed = start_times[t] - *off_since;
        if (elapsed >= lo - eps && elapsed < hi - eps) rhs = 1.0;
      }
      out.rows.push_back(model.add_constraint(row, RowSense::le, rhs,
                                              prefix + "_clq" + std::to_string(k) + "_t" + std::to_string(t)));
    }
  }
  return out;
}

SplitExpression split_long_expression(Model& model, const LinExpr& expr, std::size_t chunk_size,
                                      const std::string& prefix) {
  if (chunk_size < 2) throw ContractError("split_long_expression: chunk_size must be >= 2");
  LinExpr e = expr;
  e.normalize();
  SplitExpression out;
  if (e.size() <= chunk_size) return out;

  std::vector<Term> terms = e.terms();
  std::size_t level = 0;
  // Repeat until the partial sums themselves fit in one combining row.
  while (terms.size() > chunk_size) {
    std::vector<Term> next;
    for (std::size_t begin = 0; begin < terms.size(); begin += chunk_size) {
      std::size_t end = std::min(terms.size(), begin + chunk_size);
      VarRef part = model.add_variable(
          prefix + "_l" + std::to_string(level) + "_" + std::to_string(begin / chunk_size), -kInf, kInf);
      LinExpr def(part, -1.0);
      for (std::size_t i = begin; i < end; ++i) def.add(terms[i].var, terms[i].coef);
      out.rows.push_back(model.add_constraint(def, RowSense::eq, 0.0));
      out.partials.push_back(part);
      next.push_back({part, 1.0});
    }
    terms = std::move(next);
    ++level;
  }
  VarRef value = model.add_variable(prefix + "_sum", -kInf, kInf);
  LinExpr combine(value, -1.0);
  for (const auto& t : terms) combine.add(t.var, t.coef);
  out.rows.push_back(model.add_constraint(combine, RowSense::eq, -e.constant()));
  out.value = value;
  return out;
}

PenalizedSlack add_penalized_slack(Model& model, std::size_t row, double penalty) {
  if (!(penalty > 0.0)) throw ContractError("add_penalized_slack: penalty must be positive");
  if (row >= model.num_constraints()) throw ContractError("add_penalized_slack: no such row");
  const Constraint& c = model.constraints()[row];
  const double sign = model.sense_sign();
  std::string base = c.name;
  RowSense sense = c.sense;
  PenalizedSlack out;
  VarRef s = model.add_variable(base + "_slk", 0.0, kInf);
  // <= rows relax upwards (a x - s <= b), >= rows downwards.
  model.add_to_row(row, s, sense == RowSense::ge ? 1.0 : -1.0);
  model.add_objective(LinExpr(s, -sign * penalty));
  out.slack = s;
  if (sense == RowSense::eq) {
    VarRef s2 = model.add_variable(base + "_slk_neg", 0.0, kInf);
    model.add_to_row(row, s2, 1.0);
    model.add_objective(LinExpr(s2, -sign * penalty));
    out.lower = s2;
  }
  return out;
}

}  // namespace scopf
