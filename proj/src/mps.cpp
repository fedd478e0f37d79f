#include "scopf/mps.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "scopf/error.hpp"

namespace scopf {

namespace {

constexpr const char* kObjRow = "OBJ";

std::string sanitize(const std::string& name) {
  std::string s;
  for (char c : name) s += (c == ' ' || c == '\t' || c == '$' || c == '*') ? '_' : c;
  return s;
}

/// Hands out unique names of at most 8 characters.
class NamePool {
 public:
  explicit NamePool(std::set<std::string> reserved = {}) : used_(std::move(reserved)) {}

  std::string take(const std::string& raw, const std::string& fallback) {
    std::string base = sanitize(raw.empty() ? fallback : raw);
    std::string cand = base.substr(0, 8);
    if (used_.insert(cand).second) return cand;
    for (int k = 0; k < 100; ++k) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "~%02d", k);
      cand = base.substr(0, 5) + buf;
      if (used_.insert(cand).second) return cand;
    }
    for (int k = 0; k < 10000; ++k) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "~%04d", k);
      cand = base.substr(0, 3) + buf;
      if (used_.insert(cand).second) return cand;
    }
    throw ContractError("export_mps: name space exhausted for \"" + raw + "\"");
  }

 private:
  std::set<std::string> used_;
};

std::string number(double v) {
  if (!std::isfinite(v)) throw ContractError("export_mps: non-finite value");
  for (int prec = 12; prec >= 1; --prec) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::string_view(buf).size() <= 12) return buf;
  }
  throw ContractError("export_mps: value does not fit a 12-character field");
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// Field layout: 1-3 code, 5-12 name, 15-22 name, 25-36 value.
std::string line(const std::string& code, const std::string& a, const std::string& b = {},
                 const std::string& value = {}) {
  std::string out = " " + pad(code, 2) + " " + pad(a, 8);
  if (!b.empty() || !value.empty()) out += "  " + pad(b, 8);
  if (!value.empty()) out += "  " + value;
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out + "\n";
}

}  // namespace

std::string export_mps(const Model& model) {
  const auto& vars = model.variables();
  const auto& rows = model.constraints();
  NamePool row_names({kObjRow});
  NamePool col_names;
  std::vector<std::string> rn(rows.size()), cn(vars.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rn[i] = row_names.take(rows[i].name, "R" + std::to_string(i));
  for (std::size_t j = 0; j < vars.size(); ++j) cn[j] = col_names.take(vars[j].name, "C" + std::to_string(j));

  std::vector<std::vector<std::pair<std::size_t, double>>> cols(vars.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& [c, v] : rows[i].terms)
      if (v != 0.0) cols[c].emplace_back(i, v);

  std::ostringstream out;
  out << "* OBJSENSE " << (model.objective_sense() == ObjSense::maximize ? "MAX" : "MIN") << "\n";
  out << pad("NAME", 14) << sanitize(model.name()).substr(0, 8) << "\n";
  out << "ROWS\n" << line("N", kObjRow);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const char* code = rows[i].sense == RowSense::le ? "L" : rows[i].sense == RowSense::ge ? "G" : "E";
    out << line(code, rn[i]);
  }
  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  const auto& obj = model.objective();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const bool binary = vars[j].integrality == Integrality::binary;
    if (binary != in_int) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "M%07d", marker++);
      out << line("", buf, "'MARKER'", binary ? "'INTORG'" : "'INTEND'");
      in_int = binary;
    }
    if (obj[j] != 0.0 || cols[j].empty()) out << line("", cn[j], kObjRow, number(obj[j]));
    for (const auto& [i, v] : cols[j]) out << line("", cn[j], rn[i], number(v));
  }
  if (in_int) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "M%07d", marker++);
    out << line("", buf, "'MARKER'", "'INTEND'");
  }
  out << "RHS\n";
  if (model.objective_constant() != 0.0) out << line("", "RHS", kObjRow, number(-model.objective_constant()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].rhs != 0.0) out << line("", "RHS", rn[i], number(rows[i].rhs));
  out << "BOUNDS\n";
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const Variable& v = vars[j];
    if (v.integrality == Integrality::binary && v.lo == 0.0 && v.hi == 1.0) {
      out << line("BV", "BND", cn[j]);
      continue;
    }
    if (v.lo == v.hi) {
      out << line("FX", "BND", cn[j], number(v.lo));
      continue;
    }
    if (std::isinf(v.lo) && std::isinf(v.hi)) {
      out << line("FR", "BND", cn[j]);
      continue;
    }
    if (std::isinf(v.lo))
      out << line("MI", "BND", cn[j]);
    else if (v.lo != 0.0)
      out << line("LO", "BND", cn[j], number(v.lo));
    if (std::isfinite(v.hi)) out << line("UP", "BND", cn[j], number(v.hi));
  }
  out << "ENDATA\n";
  return out.str();
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw SchemaError(where, "invalid number \"" + s + "\"");
  return v;
}

}  // namespace

Model import_mps(std::string_view text) {
  enum class Section { none, name, rows, columns, rhs, ranges, bounds, objsense, end };
  Section section = Section::none;
  std::string model_name = "mps";
  ObjSense sense = ObjSense::minimize;
  std::string obj_row;

  struct RowData {
    std::string name;
    char code;
    std::vector<std::pair<std::size_t, double>> terms;
    double rhs = 0.0;
    std::optional<double> range;
  };
  struct ColData {
    std::string name;
    bool integer = false;
    double lo = 0.0, hi = kInf;
    bool binary = false;
    double obj = 0.0;
  };
  std::vector<RowData> rows;
  std::vector<ColData> cols;
  std::unordered_map<std::string, std::size_t> row_index, col_index;
  double obj_constant = 0.0;
  bool integer_block = false;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno);
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    if (raw[0] == '*') {
      auto tok = split_ws(raw.substr(1));
      if (tok.size() >= 2 && tok[0] == "OBJSENSE")
        sense = (tok[1] == "MAX" || tok[1] == "MAXIMIZE") ? ObjSense::maximize : ObjSense::minimize;
      continue;
    }
    auto tok = split_ws(raw);
    if (tok.empty()) continue;
    if (raw[0] != ' ' && raw[0] != '\t') {
      const std::string& head = tok[0];
      if (head == "NAME") {
        section = Section::name;
        if (tok.size() > 1) model_name = tok[1];
      } else if (head == "ROWS") section = Section::rows;
      else if (head == "COLUMNS") section = Section::columns;
      else if (head == "RHS") section = Section::rhs;
      else if (head == "RANGES") section = Section::ranges;
      else if (head == "BOUNDS") section = Section::bounds;
      else if (head == "OBJSENSE") {
        section = Section::objsense;
        if (tok.size() > 1) sense = tok[1] == "MAX" ? ObjSense::maximize : ObjSense::minimize;
      } else if (head == "ENDATA") {
        section = Section::end;
        break;
      } else {
        throw SchemaError(where, "unknown section \"" + head + "\"");
      }
      continue;
    }
    switch (section) {
      case Section::objsense:
        sense = (tok[0] == "MAX" || tok[0] == "MAXIMIZE") ? ObjSense::maximize : ObjSense::minimize;
        break;
      case Section::rows: {
        if (tok.size() != 2 || tok[0].size() != 1) throw SchemaError(where, "malformed ROWS entry");
        const char code = tok[0][0];
        if (code == 'N') {
          if (obj_row.empty()) obj_row = tok[1];
          break;
        }
        if (code != 'L' && code != 'G' && code != 'E') throw SchemaError(where, "unknown row type");
        if (!row_index.emplace(tok[1], rows.size()).second) throw SchemaError(where, "duplicate row " + tok[1]);
        rows.push_back({tok[1], code, {}, 0.0, std::nullopt});
        break;
      }
      case Section::columns: {
        if (tok.size() >= 3 && tok[1] == "'MARKER'") {
          if (tok[2] == "'INTORG'") integer_block = true;
          else if (tok[2] == "'INTEND'") integer_block = false;
          else throw SchemaError(where, "unknown marker");
          break;
        }
        if (tok.size() != 3 && tok.size() != 5) throw SchemaError(where, "malformed COLUMNS entry");
        auto [it, fresh] = col_index.emplace(tok[0], cols.size());
        if (fresh) {
          ColData c;
          c.name = tok[0];
          c.integer = integer_block;
          cols.push_back(c);
        }
        const std::size_t j = it->second;
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const double v = parse_number(tok[k + 1], where);
          if (tok[k] == obj_row) {
            cols[j].obj += v;
            continue;
          }
          auto r = row_index.find(tok[k]);
          if (r == row_index.end()) throw SchemaError(where, "unknown row " + tok[k]);
          rows[r->second].terms.emplace_back(j, v);
        }
        break;
      }
      case Section::rhs:
      case Section::ranges: {
        if (tok.size() != 3 && tok.size() != 5) throw SchemaError(where, "malformed RHS/RANGES entry");
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const double v = parse_number(tok[k + 1], where);
          if (section == Section::rhs && tok[k] == obj_row) {
            obj_constant = -v;
            continue;
          }
          auto r = row_index.find(tok[k]);
          if (r == row_index.end()) throw SchemaError(where, "unknown row " + tok[k]);
          if (section == Section::rhs)
            rows[r->second].rhs = v;
          else
            rows[r->second].range = v;
        }
        break;
      }
      case Section::bounds: {
        if (tok.size() < 3) throw SchemaError(where, "malformed BOUNDS entry");
        auto c = col_index.find(tok[2]);
        if (c == col_index.end()) throw SchemaError(where, "unknown column " + tok[2]);
        ColData& col = cols[c->second];
        const std::string& code = tok[0];
        auto value = [&]() {
          if (tok.size() < 4) throw SchemaError(where, "bound value missing");
          return parse_number(tok[3], where);
        };
        if (code == "UP") col.hi = value();
        else if (code == "LO") col.lo = value();
        else if (code == "FX") col.lo = col.hi = value();
        else if (code == "FR") col.lo = -kInf, col.hi = kInf;
        else if (code == "MI") col.lo = -kInf;
        else if (code == "PL") col.hi = kInf;
        else if (code == "BV") col.binary = true, col.lo = 0.0, col.hi = 1.0;
        else throw SchemaError(where, "unsupported bound type " + code);
        break;
      }
      default:
        throw SchemaError(where, "data line outside a section");
    }
  }
  if (section != Section::end) throw SchemaError("ENDATA", "missing ENDATA");
  if (obj_row.empty()) throw SchemaError("ROWS", "no objective row");

  Model model(model_name);
  model.set_objective_sense(sense);
  std::vector<VarRef> refs;
  for (const auto& c : cols) {
    Integrality kind = Integrality::continuous;
    double hi = c.hi;
    if (c.integer || c.binary) {
      if (c.integer && !c.binary && std::isinf(hi)) hi = 1.0;
      if (c.lo < 0.0 || hi > 1.0) throw SchemaError(c.name, "general integer columns are not supported");
      kind = Integrality::binary;
    }
    refs.push_back(model.add_variable(c.name, c.lo, hi, kind));
  }
  LinExpr objective;
  for (std::size_t j = 0; j < cols.size(); ++j)
    if (cols[j].obj != 0.0) objective.add(refs[j], cols[j].obj);
  objective.add_constant(obj_constant);
  model.add_objective(objective);
  for (const auto& r : rows) {
    LinExpr e;
    for (const auto& [j, v] : r.terms) e.add(refs[j], v);
    RowSense s = r.code == 'L' ? RowSense::le : r.code == 'G' ? RowSense::ge : RowSense::eq;
    if (!r.range) {
      model.add_constraint(e, s, r.rhs, r.name);
      continue;
    }
    const double R = std::abs(*r.range);
    double lo = r.rhs, hi = r.rhs;
    if (r.code == 'L') lo = r.rhs - R;
    else if (r.code == 'G') hi = r.rhs + R;
    else if (*r.range > 0) hi = r.rhs + R;
    else lo = r.rhs - R;
    model.add_constraint(e, RowSense::ge, lo, r.name);
    model.add_constraint(e, RowSense::le, hi, r.name + "_rng");
  }
  return model;
}

}  // namespace scopf
