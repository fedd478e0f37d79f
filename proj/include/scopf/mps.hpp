#pragma once

#include <string>
#include <string_view>

#include "scopf/model.hpp"

namespace scopf {

/// Fixed-format MPS text. Names are truncated to 8 characters; collisions get
/// a deterministic numeric suffix. Maximization is recorded as an
/// `OBJSENSE MAX` comment line, binaries with INTORG markers and BV bounds.
std::string export_mps(const Model& model);

/// Reads the subset written by export_mps (ROWS, COLUMNS, RHS, RANGES, BOUNDS,
/// integer markers and the sense comment). Throws SchemaError on malformed input.
Model import_mps(std::string_view text);

}  // namespace scopf
