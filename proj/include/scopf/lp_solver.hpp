#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "scopf/model.hpp"
#include "scopf/solve_options.hpp"

namespace scopf {

enum class LpStatus { optimal, infeasible, unbounded, time_limit, iteration_limit, numeric_error };

const char* to_string(LpStatus status);

enum class VarStatus : std::uint8_t { basic, at_lower, at_upper, at_zero };

/// Simplex basis over structural columns followed by one logical per row.
struct Basis {
  std::vector<VarStatus> status;
};

struct LpResult {
  LpStatus status = LpStatus::numeric_error;
  double objective = 0.0;  // in the model's own sense
  std::vector<double> x;   // structural values
  std::size_t iterations = 0;
  std::shared_ptr<const Basis> basis;
};

/// Bounded-variable revised primal simplex. Every row a x gets a logical s with
/// a x - s = 0 and the row bounds on s, so the all-logical basis is always
/// valid. Phase 1 minimizes the sum of bound violations from any starting
/// basis, which is what makes warm starts after bound changes work. Dantzig
/// pricing with a Harris ratio test; falls back to Bland's rule on stalls.
class SimplexSolver {
 public:
  explicit SimplexSolver(const Model& model);
  ~SimplexSolver();
  SimplexSolver(const SimplexSolver&) = delete;
  SimplexSolver& operator=(const SimplexSolver&) = delete;

  std::size_t num_columns() const;
  void set_column_bounds(std::size_t col, double lo, double hi);
  void reset_bounds();

  LpResult solve(const SolveOptions& options, const Deadline& deadline,
                 const Basis* warm_start = nullptr);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Solves the LP relaxation of `model` (integrality ignored).
LpResult solve_lp(const Model& model, const SolveOptions& options);

}  // namespace scopf
