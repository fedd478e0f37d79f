#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "scopf/instance.hpp"
#include "scopf/model.hpp"

namespace scopf {

/// Operand box of a bilinear term.
struct Bounds2D {
  double x_lo, x_hi, y_lo, y_hi;
};

/// p_min*u <= p <= p_max*u, with no auxiliary variables.
std::array<std::size_t, 2> onoff_to_bounds(Model& model, VarRef p, VarRef u, double p_min,
                                           double p_max);

/// Four-plane McCormick envelope of w = x*y over the box `b`.
std::array<std::size_t, 4> mccormick_bilinear(Model& model, VarRef w, VarRef x, VarRef y,
                                              const Bounds2D& b);

/// Two end-point tangents and the secant of w = x^2 over [lo, hi].
std::array<std::size_t, 3> envelope_square(Model& model, VarRef w, VarRef x, double lo, double hi);

struct SquareTerm {
  VarRef var;
  double coef;
};
struct BilinearTerm {
  VarRef x, y;
  double coef;
};

/// sum(squares) + sum(bilinears) + linear <= rhs, plus an optional side row
/// `side >= 0` that must hold for the quadratic form to be equivalent.
struct QuadraticRow {
  std::vector<SquareTerm> squares;
  std::vector<BilinearTerm> bilinears;
  LinExpr linear;
  double rhs = 0.0;
  std::optional<LinExpr> side;
};

/// ||A x + B y|| <= C z + D squared into
/// A²x² + B²y² + 2AB xy - C²z² - 2CD z <= D², with side row C z + D >= 0.
QuadraticRow soc_to_quadratic(double A, double B, double C, double D, VarRef x, VarRef y, VarRef z);

struct RelaxedRow {
  std::vector<VarRef> aux;
  std::vector<std::size_t> rows;
};

/// Replaces every square and bilinear monomial by a fresh auxiliary bounded by
/// its envelope, then adds the linear row over the auxiliaries.
RelaxedRow relax_quadratic_row(Model& model, const QuadraticRow& row);

enum class Extremum { max, min };

struct MinMaxResult {
  std::vector<std::size_t> rows;
  std::vector<VarRef> selectors;
};

/// y = max(xs) (or min) through one binary selector per operand. big_m defaults
/// to the spread of the operand bounds; a smaller user value is rejected.
MinMaxResult minmax_to_mip(Model& model, VarRef y, std::span<const VarRef> xs, Extremum kind,
                           std::optional<double> big_m = std::nullopt);

/// Commitment indicator variables of one device over a window of intervals.
struct CommitmentVars {
  std::vector<VarRef> on, start, stop;
};

struct CliqueStartup {
  std::vector<std::vector<VarRef>> delta;  // [t][category]
  std::vector<std::size_t> rows;
};

/// Downtime-dependent startup cost. `start_times[t]` is the clock time (hours)
/// at which interval t of the window begins; `off_since` is the clock time of
/// the last shutdown when the device is off at window entry. stop[s] = 1 means
/// off from interval s on, so a start at t after a stop at s has downtime
/// start_times[t] - start_times[s].
CliqueStartup clique_startup(Model& model, std::span<const StartupCategory> categories,
                             double min_downtime, std::span<const double> start_times,
                             std::optional<double> off_since, std::span<const VarRef> stop,
                             std::span<const VarRef> start, const std::string& prefix = "su");

struct SplitExpression {
  std::optional<VarRef> value;  // empty when the expression was short enough
  std::vector<VarRef> partials;
  std::vector<std::size_t> rows;
};

/// Introduces partial-sum variables so that no defining row exceeds
/// chunk_size + 1 nonzeros. `value` equals the expression at every feasible point.
SplitExpression split_long_expression(Model& model, const LinExpr& expr, std::size_t chunk_size = 50,
                                      const std::string& prefix = "part");

struct PenalizedSlack {
  VarRef slack;                 // relaxes the row in its binding direction
  std::optional<VarRef> lower;  // second, opposite-signed slack for equality rows
};

/// Adds a nonnegative slack to one row and charges `penalty` per unit in the objective.
PenalizedSlack add_penalized_slack(Model& model, std::size_t row, double penalty);

}  // namespace scopf
