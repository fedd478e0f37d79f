#pragma once

#include <optional>
#include <vector>

#include "scopf/instance.hpp"
#include "scopf/solution.hpp"

namespace oracle {

/// Direct DC solve of the step's network without branch k, with bus
/// injections implied by the base angles. Empty when the outage islands a bus.
std::optional<std::vector<double>> resolve_outage(const scopf::Instance& instance, const scopf::SolutionStep& step,
                                                  std::size_t k);

}  // namespace oracle
