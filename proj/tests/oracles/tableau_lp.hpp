#pragma once

#include <optional>
#include <vector>

#include "scopf/model.hpp"

namespace oracle {

enum class TableauStatus { optimal, infeasible, unbounded };

struct TableauResult {
  TableauStatus status = TableauStatus::infeasible;
  double objective = 0.0;  // model sense
  std::vector<double> x;
};

/// Dense two-phase tableau simplex with Bland's rule. Slow and simple, meant
/// only as an independent reference for small models. Integrality is ignored;
/// `fixed` optionally pins columns to values.
TableauResult solve_tableau(const scopf::Model& model,
                            const std::vector<std::optional<double>>& fixed = {});

/// Enumerates every assignment of the binary columns (at most ~16 of them) and
/// solves the continuous remainder with the tableau oracle.
TableauResult solve_by_enumeration(const scopf::Model& model);

}  // namespace oracle
