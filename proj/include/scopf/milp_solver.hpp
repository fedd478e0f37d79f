#pragma once

#include <cstddef>
#include <vector>

#include "scopf/model.hpp"
#include "scopf/solve_options.hpp"

namespace scopf {

enum class MilpStatus { optimal, incumbent_time_limit, infeasible_reported, no_incumbent_time_limit };

const char* to_string(MilpStatus status);

struct MilpResult {
  MilpStatus status = MilpStatus::infeasible_reported;
  std::vector<double> x;
  double objective = 0.0;  // model sense
  double bound = 0.0;      // proven bound in the model sense
  double gap = 0.0;        // |bound - objective| / max(1, |objective|)
  std::size_t nodes = 0;
  double elapsed = 0.0;

  bool has_solution() const {
    return status == MilpStatus::optimal || status == MilpStatus::incumbent_time_limit;
  }
};

/// LP-based best-first branch and bound. Open nodes are taken in batches of
/// `worker_count` and solved concurrently; results are merged in node order
/// so the search is deterministic for a given worker count.
MilpResult solve_milp(const Model& model, const SolveOptions& options);

}  // namespace scopf
