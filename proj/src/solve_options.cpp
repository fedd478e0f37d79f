#include "scopf/solve_options.hpp"

#include <cmath>

#include "scopf/error.hpp"

namespace scopf {

void SolveOptions::validate() const {
  if (!(time_limit > 0.0)) throw ContractError("time_limit must be positive");
  auto in_range = [](double v) { return v > 0.0 && v <= 1e-2; };
  if (!in_range(mip_gap)) throw ContractError("mip_gap must lie in (0, 1e-2]");
  if (!in_range(feas_tol)) throw ContractError("feas_tol must lie in (0, 1e-2]");
  if (!in_range(opt_tol)) throw ContractError("opt_tol must lie in (0, 1e-2]");
}

}  // namespace scopf
