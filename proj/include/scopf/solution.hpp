#pragma once

#include <string>
#include <vector>

namespace scopf {

/// Market-surplus terms. `total` is benefit minus every cost and penalty.
struct ScoreBreakdown {
  double consumer_benefit = 0.0;
  double producer_cost = 0.0;
  double startup_cost = 0.0;
  double on_cost = 0.0;
  double shutdown_cost = 0.0;
  double mismatch_penalty = 0.0;
  double overload_penalty = 0.0;
  double reserve_shortfall_penalty = 0.0;
  double total = 0.0;

  void recompute_total() {
    total = consumer_benefit - producer_cost - startup_cost - on_cost - shutdown_cost -
            mismatch_penalty - overload_penalty - reserve_shortfall_penalty;
  }
  bool operator==(const ScoreBreakdown&) const = default;
};

struct DeviceStep {
  double p = 0.0;
  double q = 0.0;
  bool on = false;
  bool start = false;
  bool stop = false;
  double reserve_up = 0.0;
  double reserve_down = 0.0;
  bool operator==(const DeviceStep&) const = default;
};

struct BusStep {
  double v = 1.0;
  double theta = 0.0;
  bool operator==(const BusStep&) const = default;
};

struct SolutionStep {
  std::vector<DeviceStep> devices;
  std::vector<BusStep> buses;
  std::vector<bool> branch_closed;
  bool operator==(const SolutionStep&) const = default;
};

/// Per-interval dispatch. Entity order follows the id lists, which match the
/// instance order for solutions produced by this library.
struct Solution {
  std::vector<std::string> device_ids;
  std::vector<std::string> bus_ids;
  std::vector<std::string> branch_ids;
  std::vector<SolutionStep> steps;
  ScoreBreakdown objective;
  std::vector<std::string> flags;

  bool has_flag(const std::string& flag) const;
  bool operator==(const Solution&) const = default;
};

}  // namespace scopf
