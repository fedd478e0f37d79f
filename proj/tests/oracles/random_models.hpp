#pragma once

#include <random>

#include "scopf/model.hpp"

namespace oracle {

/// Small frozen MILP with a few binaries and quarter-step coefficients, so
/// the MPS text form is exact.
scopf::Model random_mps_model(std::mt19937_64& rng);

}  // namespace oracle
