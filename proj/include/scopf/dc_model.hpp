#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scopf/instance.hpp"
#include "scopf/milp_solver.hpp"
#include "scopf/model.hpp"

namespace scopf {

/// Status of one device when a stage window begins.
struct DeviceBoundary {
  bool on = false;
  double duration = 0.0;  // hours already spent in `on`
  double p = 0.0;
  int starts_used = 0;  // starts consumed by earlier stages
};

struct DcStageSpec {
  std::size_t first = 0;  // first interval of the window
  std::size_t count = 0;
  std::vector<DeviceBoundary> boundary;  // per device
  /// Optional per-device, per-window-interval (p_lo, p_hi) applied while on.
  std::vector<std::vector<std::pair<double, double>>> bound_overrides;
  std::string name = "s0";

  std::size_t end() const { return first + count; }
};

/// Spec for a window that starts from the instance initial state.
DcStageSpec initial_stage_spec(const Instance& instance, std::size_t first, std::size_t count);

/// Handles of the DC stage model, indexed [entity][window interval].
struct DcVarMap {
  std::vector<std::vector<VarRef>> p, on, start, stop;
  std::vector<std::vector<std::vector<VarRef>>> blocks;   // [device][t][block]
  std::vector<std::vector<std::vector<VarRef>>> startup;  // [device][t][category]
  std::vector<std::vector<VarRef>> theta, v, vsq;
  std::vector<std::vector<VarRef>> flow, overload;
  std::vector<std::vector<VarRef>> mismatch_pos, mismatch_neg;
  std::vector<std::vector<std::size_t>> balance_rows;
  std::vector<std::vector<VarRef>> energy_short;  // [device][window], unset handles skipped
  std::vector<VarRef> all() const;
};

struct DcModel {
  Model model;
  DcVarMap vars;
};

/// Parallel branches whose reactance deviates from the group median by more
/// than `rho` (relative) are opened when switchable. Each group keeps at least
/// one closed branch and the network stays connected.
std::set<std::size_t> line_switching_heuristic(const Instance& instance, double rho = 0.5);

/// Stage MILP over the window. The returned model is not frozen so callers can
/// add rows before set_dc_start and freeze.
DcModel build_dc_model(const Instance& instance, const DcStageSpec& spec, const std::set<std::size_t>& opened);

struct CommitmentStep {
  bool on = false;
  bool start = false;
  bool stop = false;
  int category = -1;  // startup category index when start
};

/// [device][window interval]
struct CommitmentSchedule {
  std::size_t first = 0;
  std::vector<std::vector<CommitmentStep>> steps;
};

/// Throws SemanticError naming the device and rule when the schedule breaks
/// start/stop logic, minimum up/down times or the start limit.
void check_commitment(const Instance& instance, const DcStageSpec& spec, const CommitmentSchedule& schedule);

/// Rounds the binaries of `x` (tolerance 1e-6) and validates the schedule.
CommitmentSchedule extract_commitment(std::span<const double> x, const DcVarMap& vars, const Instance& instance,
                                      const DcStageSpec& spec);

/// Earliest legal shutdown for every device, starting nothing.
CommitmentSchedule minimal_commitment(const Instance& instance, const DcStageSpec& spec);
/// Every device keeps its entry status.
CommitmentSchedule hold_commitment(const Instance& instance, const DcStageSpec& spec);

/// Solves the LP with the binaries fixed to `schedule`. Empty when that LP is infeasible.
std::optional<std::vector<double>> dc_point_for(const Model& model, const DcVarMap& vars,
                                                const CommitmentSchedule& schedule, double time_limit);

/// Installs the better of the minimal and hold schedules as the MILP start.
/// Returns false when neither gives a feasible point.
bool set_dc_start(Model& model, const DcVarMap& vars, const Instance& instance, const DcStageSpec& spec,
                  double time_limit = 10.0);

}  // namespace scopf
