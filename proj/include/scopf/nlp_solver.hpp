#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "scopf/solve_options.hpp"

namespace scopf {

/// Coordinate sparsity pattern.
struct SparsePattern {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  std::size_t size() const { return rows.size(); }
};

/// Smooth problem: optimize f(x) subject to c(x) = 0 and lo <= x <= hi.
/// Derivative structures are fixed; values are written in structure order.
/// Implementations must be safe to evaluate concurrently on distinct buffers.
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  virtual std::size_t num_variables() const = 0;
  virtual std::size_t num_constraints() const = 0;
  virtual bool maximize() const { return false; }
  virtual const std::vector<double>& lower() const = 0;
  virtual const std::vector<double>& upper() const = 0;
  virtual const SparsePattern& jacobian_structure() const = 0;
  /// Lower triangle (row >= col) of the Lagrangian Hessian.
  virtual const SparsePattern& hessian_structure() const = 0;

  virtual double eval_objective(std::span<const double> x) const = 0;
  virtual void eval_gradient(std::span<const double> x, std::span<double> grad) const = 0;
  virtual void eval_constraints(std::span<const double> x, std::span<double> c) const = 0;
  virtual void eval_jacobian(std::span<const double> x, std::span<double> values) const = 0;
  /// Values of sigma * hess(f) + sum_i lambda_i * hess(c_i).
  virtual void eval_hessian(std::span<const double> x, double sigma, std::span<const double> lambda,
                            std::span<double> values) const = 0;

  virtual std::string variable_name(std::size_t j) const { return "x" + std::to_string(j); }
};

enum class NlpStatus { converged, max_iter, time_limit };

const char* to_string(NlpStatus status);

struct NlpResult {
  NlpStatus status = NlpStatus::max_iter;
  std::vector<double> x;
  double objective = 0.0;      // f(x) in the problem's own sense
  double residual = 0.0;       // max |c_i(x)|
  double stationarity = 0.0;   // projected Lagrangian gradient, scaled objective
  std::size_t iterations = 0;  // inner Newton steps
  std::vector<double> multipliers;
};

/// Augmented-Lagrangian outer loop over the equalities with projected, damped
/// Newton inner steps on the box. Returns the best iterate found when the
/// deadline or iteration cap is hit. Non-finite callback output raises NumericError.
NlpResult solve_nlp(const NlpProblem& problem, const SolveOptions& options, std::span<const double> x0);

/// Checks callback output for the problem at x; throws NumericError naming the first bad entry.
void check_finite(const NlpProblem& problem, std::span<const double> values, const char* what);

}  // namespace scopf
