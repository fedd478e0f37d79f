#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scopf/instance.hpp"

namespace scopf {

enum class Integrality { continuous, binary };
enum class RowSense { le, eq, ge };
enum class ObjSense { maximize, minimize };

/// Dense handle to a variable of one particular Model.
struct VarRef {
  std::size_t index = 0;
  std::uint64_t model_id = 0;
  bool operator==(const VarRef&) const = default;
};

struct Term {
  VarRef var;
  double coef = 0.0;
};

/// Sum of coefficient * variable plus a constant.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(VarRef v, double coef = 1.0) { add(v, coef); }  // NOLINT(implicit)

  LinExpr& add(VarRef v, double coef) {
    terms_.push_back({v, coef});
    return *this;
  }
  LinExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }
  LinExpr& operator+=(const LinExpr& other);
  LinExpr& operator*=(double s);

  /// Merges duplicate variables and drops zero coefficients.
  void normalize();

  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }
  std::size_t size() const { return terms_.size(); }

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, LinExpr a);

struct Variable {
  std::string name;
  double lo = 0.0;
  double hi = kInf;
  Integrality integrality = Integrality::continuous;
};

struct Constraint {
  std::string name;
  std::vector<std::pair<std::size_t, double>> terms;  // (column, coefficient), unique columns
  RowSense sense = RowSense::le;
  double rhs = 0.0;
};

/// Coordinate (row, column, value) entry of the constraint matrix.
struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Solver-agnostic MILP/LP container: bounded variables, sparse linear rows and
/// a linear objective. Single writer until freeze(); read-only afterwards.
class Model {
 public:
  explicit Model(std::string name = "model");

  VarRef add_variable(std::string name, double lo, double hi,
                      Integrality integrality = Integrality::continuous);
  /// Adds `expr sense rhs`; the expression constant moves to the right-hand side.
  std::size_t add_constraint(const LinExpr& expr, RowSense sense, double rhs, std::string name = {});
  void add_to_row(std::size_t row, VarRef var, double coef);

  void add_objective(const LinExpr& expr);
  void set_objective_sense(ObjSense sense) {
    check_mutable();
    sense_ = sense;
  }
  void set_bounds(VarRef var, double lo, double hi);
  void set_integrality(VarRef var, Integrality integrality);

  /// Optional point known to satisfy every row; solvers may use it as a first incumbent.
  void set_start(std::vector<double> x) {
    check_mutable();
    start_ = std::move(x);
  }
  const std::optional<std::vector<double>>& start() const { return start_; }

  bool owns(VarRef v) const { return v.model_id == id_ && v.index < vars_.size(); }
  VarRef ref(std::size_t index) const { return {index, id_}; }
  const Variable& variable(VarRef v) const;
  const Variable& variable(std::size_t index) const { return vars_.at(index); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }
  std::size_t num_nonzeros() const;

  const std::vector<double>& objective() const { return obj_; }
  double objective_constant() const { return obj_constant_; }
  ObjSense objective_sense() const { return sense_; }
  const std::string& name() const { return name_; }
  /// +1 when maximizing: multiplies "benefit" to get the model's objective sign.
  double sense_sign() const { return sense_ == ObjSense::maximize ? 1.0 : -1.0; }

  std::vector<Triplet> triplets() const;

  double objective_value(std::span<const double> x) const;
  double row_activity(std::size_t row, std::span<const double> x) const;
  /// Largest bound or row violation of `x`; integrality is checked when asked.
  double max_violation(std::span<const double> x, bool check_integrality = false) const;

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

 private:
  void check_mutable() const;
  std::size_t column(VarRef v) const;

  std::string name_;
  std::uint64_t id_;
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<double> obj_;
  double obj_constant_ = 0.0;
  ObjSense sense_ = ObjSense::maximize;
  std::optional<std::vector<double>> start_;
  bool frozen_ = false;
};

}  // namespace scopf
