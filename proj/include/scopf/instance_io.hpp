#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "scopf/instance.hpp"
#include "scopf/solution.hpp"

namespace scopf {

/// One broken invariant: which entity, which rule, what was observed.
struct Violation {
  std::string entity;
  std::string rule;
  std::string observed;
};

/// Parses and fully validates an instance document. Throws SchemaError for
/// missing or mistyped fields and SemanticError for broken invariants.
Instance parse_instance(std::string_view text);
Instance load_instance(const std::string& path);

/// Checks every instance invariant. Empty result iff the instance is valid.
std::vector<Violation> validate(const Instance& instance);

std::string write_instance(const Instance& instance);

/// Deterministic serialization. Throws ContractError on shape mismatch or
/// non-finite values.
std::string write_solution(const Solution& solution, const Instance& instance);
Solution read_solution(std::string_view text);

/// Throws ContractError unless the solution arrays match the instance shape
/// and ids in order.
void check_solution_shape(const Solution& solution, const Instance& instance);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace scopf
