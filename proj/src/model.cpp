#include "scopf/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_map>

#include "scopf/error.hpp"

namespace scopf {

namespace {
std::atomic<std::uint64_t> next_model_id{1};
}

LinExpr& LinExpr::operator+=(const LinExpr& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  constant_ += other.constant_;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (auto& t : terms_) t.coef *= s;
  constant_ *= s;
  return *this;
}

void LinExpr::normalize() {
  std::vector<Term> merged;
  std::unordered_map<std::size_t, std::size_t> pos;
  for (const auto& t : terms_) {
    if (!std::isfinite(t.coef)) throw NumericError("non-finite coefficient in expression");
    auto [it, inserted] = pos.emplace(t.var.index, merged.size());
    if (inserted) {
      merged.push_back(t);
    } else {
      if (!(merged[it->second].var == t.var)) throw ContractError("expression mixes models");
      merged[it->second].coef += t.coef;
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  terms_ = std::move(merged);
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) {
  LinExpr nb = b;
  nb *= -1.0;
  return a += nb;
}
LinExpr operator*(double s, LinExpr a) { return a *= s; }

Model::Model(std::string name) : name_(std::move(name)), id_(next_model_id++) {}

void Model::check_mutable() const {
  if (frozen_) throw ContractError("model " + name_ + " is frozen");
}

std::size_t Model::column(VarRef v) const {
  if (!owns(v)) throw ContractError("variable handle does not belong to model " + name_);
  return v.index;
}

VarRef Model::add_variable(std::string name, double lo, double hi, Integrality integrality) {
  check_mutable();
  if (std::isnan(lo) || std::isnan(hi) || lo > hi)
    throw ContractError("inverted bounds for variable " + name);
  if (integrality == Integrality::binary && (lo < 0.0 || hi > 1.0))
    throw ContractError("binary variable " + name + " needs bounds within [0,1]");
  vars_.push_back({std::move(name), lo, hi, integrality});
  obj_.push_back(0.0);
  return {vars_.size() - 1, id_};
}

std::size_t Model::add_constraint(const LinExpr& expr, RowSense sense, double rhs, std::string name) {
  check_mutable();
  LinExpr e = expr;
  for (const auto& t : e.terms()) column(t.var);
  e.normalize();
  if (!std::isfinite(rhs - e.constant())) throw NumericError("non-finite right-hand side");
  Constraint c;
  c.name = name.empty() ? "r" + std::to_string(rows_.size()) : std::move(name);
  c.sense = sense;
  c.rhs = rhs - e.constant();
  c.terms.reserve(e.size());
  for (const auto& t : e.terms()) c.terms.emplace_back(t.var.index, t.coef);
  rows_.push_back(std::move(c));
  return rows_.size() - 1;
}

void Model::add_to_row(std::size_t row, VarRef var, double coef) {
  check_mutable();
  std::size_t col = column(var);
  auto& terms = rows_.at(row).terms;
  auto it = std::find_if(terms.begin(), terms.end(), [&](const auto& p) { return p.first == col; });
  if (it == terms.end()) {
    if (coef != 0.0) terms.emplace_back(col, coef);
  } else {
    it->second += coef;
    if (it->second == 0.0) terms.erase(it);
  }
}

void Model::add_objective(const LinExpr& expr) {
  check_mutable();
  for (const auto& t : expr.terms()) obj_[column(t.var)] += t.coef;
  obj_constant_ += expr.constant();
}

void Model::set_bounds(VarRef var, double lo, double hi) {
  check_mutable();
  auto& v = vars_[column(var)];
  if (std::isnan(lo) || std::isnan(hi) || lo > hi)
    throw ContractError("inverted bounds for variable " + v.name);
  v.lo = lo;
  v.hi = hi;
}

void Model::set_integrality(VarRef var, Integrality integrality) {
  check_mutable();
  vars_[column(var)].integrality = integrality;
}

const Variable& Model::variable(VarRef v) const { return vars_[column(v)]; }

std::size_t Model::num_nonzeros() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.terms.size();
  return n;
}

std::vector<Triplet> Model::triplets() const {
  std::vector<Triplet> out;
  out.reserve(num_nonzeros());
  for (std::size_t i = 0; i < rows_.size(); ++i)
    for (const auto& [col, val] : rows_[i].terms)
      if (val != 0.0) out.push_back({i, col, val});
  return out;
}

double Model::objective_value(std::span<const double> x) const {
  double v = obj_constant_;
  for (std::size_t j = 0; j < obj_.size(); ++j) v += obj_[j] * x[j];
  return v;
}

double Model::row_activity(std::size_t row, std::span<const double> x) const {
  double a = 0.0;
  for (const auto& [col, val] : rows_.at(row).terms) a += val * x[col];
  return a;
}

double Model::max_violation(std::span<const double> x, bool check_integrality) const {
  if (x.size() != vars_.size()) throw ContractError("point has wrong dimension");
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max({worst, vars_[j].lo - x[j], x[j] - vars_[j].hi});
    if (check_integrality && vars_[j].integrality == Integrality::binary)
      worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    double a = row_activity(i, x);
    const auto& r = rows_[i];
    if (r.sense != RowSense::ge) worst = std::max(worst, a - r.rhs);
    if (r.sense != RowSense::le) worst = std::max(worst, r.rhs - a);
  }
  return worst;
}

}  // namespace scopf
