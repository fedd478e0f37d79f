#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace scopf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

/// Interval lengths of the scheduling horizon, in hours.
struct TimeGrid {
  std::vector<double> durations;

  std::size_t count() const { return durations.size(); }
  /// Hours elapsed from the horizon start to the beginning of interval `t`.
  double start_time(std::size_t t) const;
  double horizon() const;
};

struct Bus {
  std::string id;
  double v_min = 0.9;
  double v_max = 1.1;
  bool is_reference = false;
};

struct Shunt {
  std::string id;
  std::string bus;
  std::size_t bus_index = kNoIndex;
  std::vector<double> g_sh;  // per timestep
  std::vector<double> b_sh;
};

enum class DeviceKind { producer, consumer };

/// Downtime-dependent startup cost: applies when the elapsed downtime lies in
/// [downtime_lo, downtime_hi).
struct StartupCategory {
  double downtime_lo = 0.0;
  double downtime_hi = kInf;
  double cost = 0.0;
};

struct CostBlock {
  double quantity_max = 0.0;
  double marginal_price = 0.0;
};

/// Sum over t in [t_start, t_end] (0-based, inclusive) of d_t * p_t must lie
/// in [e_min, e_max].
struct EnergyWindow {
  std::size_t t_start = 0;
  std::size_t t_end = 0;
  double e_min = -kInf;
  double e_max = kInf;
};

struct InitialState {
  bool on = false;
  double duration = 0.0;  // hours spent in the current status before t = 0
  double p = 0.0;
};

struct Device {
  std::string id;
  std::string bus;
  std::size_t bus_index = kNoIndex;
  DeviceKind kind = DeviceKind::producer;
  std::vector<double> p_min, p_max;  // per timestep
  std::vector<double> q_min, q_max;
  double ramp_up = kInf;    // p.u. per hour
  double ramp_down = kInf;  // p.u. per hour
  double min_uptime = 0.0;
  double min_downtime = 0.0;
  int max_starts = std::numeric_limits<int>::max();
  double on_cost = 0.0;        // $ per committed interval
  double shutdown_cost = 0.0;  // $ per shutdown event
  std::vector<StartupCategory> startup_categories;
  std::vector<std::vector<CostBlock>> cost_blocks;  // [t][block], merit order
  std::vector<EnergyWindow> energy_windows;
  InitialState initial;

  bool is_producer() const { return kind == DeviceKind::producer; }
};

struct Branch {
  std::string id;
  std::string from_bus, to_bus;
  std::size_t from_index = kNoIndex, to_index = kNoIndex;
  double r = 0.0;
  double x = 0.1;
  double b_ch = 0.0;
  double s_max = 1.0;
  bool switchable = false;
  bool initial_closed = true;
};

struct ReserveZone {
  std::string id;
  std::vector<std::string> buses;
  std::vector<std::size_t> bus_indices;
  std::vector<double> req_up, req_down;  // per timestep
  double shortfall_penalty = 0.0;        // $ per p.u.h
};

struct Header {
  std::string name;
  double horizon_hours = 0.0;
  double base_mva = 100.0;
};

struct Penalties {
  double mismatch_penalty = 1e4;  // $ per p.u.h of bus imbalance
  double overload_penalty = 1e3;  // $ per p.u.h of branch overload
};

/// A multi-interval network description. Immutable once parsed; `link()` must
/// be called after hand edits to re-resolve the index fields from the ids.
struct Instance {
  Header header;
  TimeGrid time_grid;
  std::vector<Bus> buses;
  std::vector<Shunt> shunts;
  std::vector<Device> devices;
  std::vector<Branch> branches;
  std::vector<ReserveZone> zones;
  Penalties penalties;

  std::size_t horizon() const { return time_grid.count(); }
  std::optional<std::size_t> find_bus(const std::string& id) const;
  std::size_t reference_bus() const;
  double max_block_price() const;
};

/// Resolves id references into index fields. Returns the ids that could not be
/// resolved (those index fields are left at kNoIndex).
std::vector<std::string> link(Instance& instance);

}  // namespace scopf
