#pragma once

#include <random>
#include <string>
#include <vector>

namespace oracle {

/// Integer bounds on a 0..10 grid with integer transition limits.
struct GridCase {
  std::vector<int> lo, hi, up, down;
};

/// T in [1, 6], bounds in [0, 10], limits in [0, 4].
GridCase random_grid_case(std::mt19937_64& rng);

/// Values at each position lying on some fully feasible integer trajectory.
std::vector<std::vector<bool>> feasible_values(const GridCase& c);

struct TrajectoryCheck {
  int cases = 0;
  int nonempty = 0;
  std::vector<std::string> failures;
};

/// Runs both propagation sweeps on `count` random cases and checks, on the
/// integer grid: emptiness iff no trajectory exists, final bounds within the
/// originals, every feasible value kept, and every in-bounds value extendable
/// to the next position.
TrajectoryCheck check_propagation(std::mt19937_64& rng, int count);

}  // namespace oracle
