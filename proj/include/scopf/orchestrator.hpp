#pragma once

#include <cstddef>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "scopf/dc_model.hpp"
#include "scopf/instance.hpp"
#include "scopf/solution.hpp"

namespace scopf {

/// Per-position power bounds of one device.
struct BoundArrays {
  std::vector<double> hi, lo;
};

/// Limits on the change between consecutive positions: for k < T - 1,
/// p[k+1] - p[k] <= up[k] and p[k] - p[k+1] <= down[k].
struct TransitionLimits {
  std::vector<double> up, down;
};

/// Uniform per-hour ramp rates over the given transition durations.
TransitionLimits uniform_limits(double ramp_up, double ramp_down, const std::vector<double>& durations);

/// Backward sweep: hi[t] = min(hi[t], hi[t+1] + down[t]), lo[t] = max(lo[t], lo[t+1] - up[t]).
BoundArrays propagate_bounds_stage1(BoundArrays bounds, const TransitionLimits& limits);

/// Forward sweep over the stage-1 values: hi[t] = min(new[t], new[t-1] + up[t-1]) and
/// lo[t] = max(new[t], new[t-1] - down[t-1]). Throws SemanticError naming
/// `what` and the position of the first empty interval.
BoundArrays propagate_bounds_stage2(const BoundArrays& stage1, const TransitionLimits& limits,
                                    const std::string& what = "bounds");

/// Per device, per window interval (lo, hi) after both sweeps. The entry
/// state is position zero; off intervals are pinned at zero and start or stop
/// transitions gain the p_min allowance.
using RampBounds = std::vector<std::vector<std::pair<double, double>>>;
RampBounds ramp_bounds_for(const Instance& instance, const DcStageSpec& spec, const CommitmentSchedule& schedule);

struct StageWindow {
  std::size_t first = 0;
  std::size_t count = 0;
};

struct StagePlan {
  std::vector<StageWindow> windows;
  bool sequential() const { return windows.size() > 1; }
};

/// One window when bus_count <= 2000, else windows of `window_length` intervals.
StagePlan plan_stages(const TimeGrid& grid, int category, std::size_t bus_count, std::size_t window_length = 4);

struct TimeBudget {
  double total = 0.0;
  double dc = 0.0;
  double ac = 0.0;
  double reserve_margin = 0.0;
};

/// min(60, 5% of total) seconds; the margin used when none is given.
double default_margin(double total_seconds);
/// dc = dc_fraction (total - margin), ac = the rest. Throws ContractError on a nonpositive usable budget.
TimeBudget allocate_time_budget(double total_seconds, double reserve_margin, double dc_fraction = 1.0 / 3.0);
TimeBudget allocate_time_budget(double total_seconds);

/// Two-switching-event policy for one device over the window of `spec`:
/// at most one change after the first interval, and a change at the first
/// interval pins the status for the device's minimum up or down time.
/// Returns the ids of the added rows.
std::vector<std::size_t> restrict_commitment_pattern(Model& model, const DcVarMap& vars, const Instance& instance,
                                                     const DcStageSpec& spec, std::size_t device);

/// Greedy reserve allocation from online producer headroom in ascending
/// marginal-price order. Dispatch values are left untouched.
void postprocess_reserves(Solution& solution, const Instance& instance);

/// Market surplus of a pipeline solution from the pipeline's own kernels
/// (AC stage residuals and branch flows).
ScoreBreakdown pipeline_objective(const Solution& solution, const Instance& instance);

/// Devices whose consecutive dispatch breaks ramp_up/ramp_down (with the
/// p_min allowance at starts and stops), as "device@t" entries.
std::vector<std::string> ramp_violations(const Solution& solution, const Instance& instance, double tol = 1e-6);

struct PipelineOptions {
  int category = 1;
  double time_limit = 600.0;
  double reserve_margin = -1.0;  // negative selects default_margin
  double dc_fraction = 1.0 / 3.0;
  std::size_t window_length = 4;
  bool force_windows = false;  // split into windows even for small networks
  double switch_threshold = 0.5;
  int workers = 1;
  std::string export_mps_dir;  // writes each stage MILP when set
  std::ostream* log = nullptr;
};

struct PipelineResult {
  Solution solution;
  TimeBudget budget;
  double dc_seconds = 0.0;
  double ac_seconds = 0.0;
  double total_seconds = 0.0;
  bool fallback = false;
};

/// Devices ramp down to their earliest legal shutdown, flat voltages, every
/// branch in its initial state. Devices with energy windows take the
/// least-energy ramp-feasible profile meeting them, holding their initial
/// status when the earliest shutdown cannot. Flagged "fallback".
Solution fallback_solution(const Instance& instance);

/// DC commitment followed by per-interval AC dispatch, stage by stage.
PipelineResult run_pipeline(const Instance& instance, const PipelineOptions& options);

}  // namespace scopf
