#pragma once

#include <cstddef>
#include <cstdint>

#include "scopf/instance.hpp"

namespace scopf {

struct GeneratorOptions {
  std::size_t buses = 6;
  std::size_t intervals = 4;
  std::uint64_t seed = 1;
  double interval_hours = 1.0;
  double parallel_fraction = 0.15;  // share of corridors doubled by a parallel branch
  bool zones = true;
  bool energy_windows = true;
};

/// Random connected instance that passes validation. Deterministic in the seed.
Instance generate_instance(const GeneratorOptions& options);

/// IEEE 14-bus network with producers, flexible loads and one reserve zone
/// over `intervals` one-hour intervals.
Instance case14_instance(std::size_t intervals = 8);

}  // namespace scopf
