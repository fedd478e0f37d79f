#include "oracles/random_models.hpp"

#include <string>
#include <vector>

namespace oracle {

namespace {

double short_decimal(std::mt19937_64& rng, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  return d(rng) / 4.0;
}

}  // namespace

scopf::Model random_mps_model(std::mt19937_64& rng) {
  using namespace scopf;
  std::uniform_int_distribution<int> nvar(2, 7), nrow(1, 5), coin(0, 3);
  Model m("rand");
  const int n = nvar(rng);
  std::vector<VarRef> v;
  for (int j = 0; j < n; ++j) {
    if (coin(rng) == 0)
      v.push_back(m.add_variable("b" + std::to_string(j), 0, 1, Integrality::binary));
    else
      v.push_back(m.add_variable("x" + std::to_string(j), short_decimal(rng, -8, 0), short_decimal(rng, 1, 20)));
  }
  const int rows = nrow(rng);
  for (int i = 0; i < rows; ++i) {
    LinExpr e;
    for (int j = 0; j < n; ++j)
      if (coin(rng) != 0) e.add(v[j], short_decimal(rng, -12, 12));
    const int s = coin(rng) % 3;
    m.add_constraint(e, s == 0 ? RowSense::le : s == 1 ? RowSense::ge : RowSense::eq,
                     s == 0 ? short_decimal(rng, 4, 40) : s == 1 ? short_decimal(rng, -40, -4) : 0.0);
  }
  LinExpr obj;
  for (int j = 0; j < n; ++j) obj.add(v[j], short_decimal(rng, -10, 10));
  obj.add_constant(short_decimal(rng, -4, 4));
  m.add_objective(obj);
  if (coin(rng) == 0) m.set_objective_sense(ObjSense::minimize);
  m.freeze();
  return m;
}

}  // namespace oracle
