#include "scopf/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scopf/error.hpp"
#include "scopf/solution.hpp"

namespace scopf {

double TimeGrid::start_time(std::size_t t) const {
  double elapsed = 0.0;
  for (std::size_t s = 0; s < t && s < durations.size(); ++s) elapsed += durations[s];
  return elapsed;
}

double TimeGrid::horizon() const {
  return std::accumulate(durations.begin(), durations.end(), 0.0);
}

std::optional<std::size_t> Instance::find_bus(const std::string& id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return i;
  return std::nullopt;
}

std::size_t Instance::reference_bus() const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].is_reference) return i;
  throw SemanticError("instance has no reference bus");
}

double Instance::max_block_price() const {
  double best = 0.0;
  for (const auto& d : devices)
    for (const auto& step : d.cost_blocks)
      for (const auto& b : step) best = std::max(best, std::abs(b.marginal_price));
  return best;
}

std::vector<std::string> link(Instance& instance) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < instance.buses.size(); ++i) index.emplace(instance.buses[i].id, i);
  std::vector<std::string> missing;
  auto resolve = [&](const std::string& id) {
    auto it = index.find(id);
    if (it == index.end()) {
      missing.push_back(id);
      return kNoIndex;
    }
    return it->second;
  };
  for (auto& s : instance.shunts) s.bus_index = resolve(s.bus);
  for (auto& d : instance.devices) d.bus_index = resolve(d.bus);
  for (auto& b : instance.branches) {
    b.from_index = resolve(b.from_bus);
    b.to_index = resolve(b.to_bus);
  }
  for (auto& z : instance.zones) {
    z.bus_indices.clear();
    for (const auto& id : z.buses) z.bus_indices.push_back(resolve(id));
  }
  return missing;
}

bool Solution::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

}  // namespace scopf
