#include "scopf/lp_solver.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "scopf/error.hpp"

namespace scopf {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::time_limit: return "time_limit";
    case LpStatus::iteration_limit: return "iteration_limit";
    case LpStatus::numeric_error: return "numeric_error";
  }
  return "unknown";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr std::size_t kRefactorEvery = 64;
constexpr int kStallLimit = 40;

struct Eta {
  int row;
  double pivot;
  std::vector<std::pair<int, double>> entries;  // off-pivot entries of the entering column
};

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

}  // namespace

struct SimplexSolver::Impl {
  int n = 0, m = 0;
  std::vector<int> col_start, row_index;
  std::vector<double> values;
  std::vector<double> lo0, hi0, lo, hi, cost, obj;
  double obj_constant = 0.0;

  std::vector<VarStatus> status;
  std::vector<double> x;
  std::vector<int> head;  // basic column at each basis position
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  std::vector<Eta> etas;

  explicit Impl(const Model& model) {
    n = static_cast<int>(model.num_variables());
    m = static_cast<int>(model.num_constraints());
    const int total = n + m;
    lo0.resize(total);
    hi0.resize(total);
    cost.assign(total, 0.0);
    obj = model.objective();
    obj_constant = model.objective_constant();
    for (int j = 0; j < n; ++j) {
      lo0[j] = model.variable(j).lo;
      hi0[j] = model.variable(j).hi;
      cost[j] = -model.sense_sign() * obj[j];
    }
    std::vector<int> counts(n + 1, 0);
    for (const auto& row : model.constraints())
      for (const auto& [c, v] : row.terms) ++counts[c + 1];
    for (int j = 0; j < n; ++j) counts[j + 1] += counts[j];
    col_start = counts;
    row_index.resize(col_start[n]);
    values.resize(col_start[n]);
    std::vector<int> fill(col_start.begin(), col_start.end() - 1);
    for (int i = 0; i < m; ++i) {
      const auto& row = model.constraints()[i];
      for (const auto& [c, v] : row.terms) {
        row_index[fill[c]] = i;
        values[fill[c]++] = v;
      }
      double l = -kInf, u = kInf;
      if (row.sense != RowSense::ge) u = row.rhs;
      if (row.sense != RowSense::le) l = row.rhs;
      lo0[n + i] = l;
      hi0[n + i] = u;
    }
    lo = lo0;
    hi = hi0;
  }

  template <class F>
  void for_column(int j, F&& f) const {
    if (j < n) {
      for (int k = col_start[j]; k < col_start[j + 1]; ++k) f(row_index[k], values[k]);
    } else {
      f(j - n, -1.0);
    }
  }

  double dot_column(int j, const Eigen::VectorXd& y) const {
    double s = 0.0;
    for_column(j, [&](int r, double v) { s += v * y[r]; });
    return s;
  }

  void place_nonbasic(int j) {
    VarStatus& s = status[j];
    const bool lo_fin = std::isfinite(lo[j]), hi_fin = std::isfinite(hi[j]);
    if (s == VarStatus::at_lower && !lo_fin) s = hi_fin ? VarStatus::at_upper : VarStatus::at_zero;
    if (s == VarStatus::at_upper && !hi_fin) s = lo_fin ? VarStatus::at_lower : VarStatus::at_zero;
    if (s == VarStatus::at_zero && (lo_fin || hi_fin))
      s = lo_fin && (!hi_fin || std::abs(lo[j]) <= std::abs(hi[j])) ? VarStatus::at_lower
                                                                     : VarStatus::at_upper;
    x[j] = s == VarStatus::at_lower ? lo[j] : s == VarStatus::at_upper ? hi[j] : 0.0;
  }

  void cold_basis() {
    const int total = n + m;
    status.assign(total, VarStatus::at_zero);
    x.assign(total, 0.0);
    head.resize(m);
    for (int j = 0; j < n; ++j) place_nonbasic(j);
    for (int i = 0; i < m; ++i) {
      status[n + i] = VarStatus::basic;
      head[i] = n + i;
    }
  }

  bool load_basis(const Basis& basis) {
    const int total = n + m;
    if (static_cast<int>(basis.status.size()) != total) return false;
    if (std::count(basis.status.begin(), basis.status.end(), VarStatus::basic) != m) return false;
    status = basis.status;
    x.assign(total, 0.0);
    head.clear();
    for (int j = 0; j < total; ++j) {
      if (status[j] == VarStatus::basic)
        head.push_back(j);
      else
        place_nonbasic(j);
    }
    return true;
  }

  bool factor() {
    etas.clear();
    if (m == 0) return true;
    std::vector<Eigen::Triplet<double>> trips;
    for (int r = 0; r < m; ++r) for_column(head[r], [&](int i, double v) { trips.emplace_back(i, r, v); });
    SpMat b(m, m);
    b.setFromTriplets(trips.begin(), trips.end());
    lu.compute(b);
    return lu.info() == Eigen::Success;
  }

  Eigen::VectorXd ftran(Eigen::VectorXd rhs) const {
    if (m == 0) return rhs;
    Eigen::VectorXd z = lu.solve(rhs);
    for (const auto& e : etas) {
      const double zr = z[e.row] / e.pivot;
      z[e.row] = zr;
      if (zr != 0.0)
        for (const auto& [i, v] : e.entries) z[i] -= v * zr;
    }
    return z;
  }

  Eigen::VectorXd btran(Eigen::VectorXd c) {
    if (m == 0) return c;
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double s = c[it->row];
      for (const auto& [i, v] : it->entries) s -= v * c[i];
      c[it->row] = s / it->pivot;
    }
    return lu.transpose().solve(c);
  }

  void compute_basic_values() {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < n + m; ++j) {
      if (status[j] == VarStatus::basic || x[j] == 0.0) continue;
      const double xj = x[j];
      for_column(j, [&](int r, double v) { rhs[r] -= v * xj; });
    }
    Eigen::VectorXd xb = ftran(std::move(rhs));
    for (int r = 0; r < m; ++r) x[head[r]] = xb[r];
  }

  double infeasibility(int j, double tol) const {
    if (x[j] < lo[j] - tol) return lo[j] - x[j];
    if (x[j] > hi[j] + tol) return x[j] - hi[j];
    return 0.0;
  }

  LpResult run(const SolveOptions& opt, const Deadline& deadline, const Basis* warm);
};

LpResult SimplexSolver::Impl::run(const SolveOptions& opt, const Deadline& deadline,
                                  const Basis* warm) {
  const double ftol = opt.feas_tol;
  const double dtol = opt.opt_tol;
  const int total = n + m;
  LpResult result;

  for (int j = 0; j < total; ++j)
    if (lo[j] > hi[j] + ftol) {
      result.status = LpStatus::infeasible;
      return result;
    }

  if (!(warm && load_basis(*warm))) cold_basis();
  if (!factor()) {
    cold_basis();
    factor();
  }
  compute_basic_values();

  const std::size_t max_iter = 100000 + 50 * static_cast<std::size_t>(total);
  std::size_t iter = 0;
  bool bland = false, fresh = true;
  int stall = 0, recoveries = 0;
  double best_merit = std::numeric_limits<double>::infinity();
  bool last_phase1 = true;
  Eigen::VectorXd cb(m), alpha(m), col(m);

  auto finish = [&](LpStatus s) {
    result.status = s;
    result.iterations = iter;
    result.x.assign(x.begin(), x.begin() + n);
    double f = obj_constant;
    for (int j = 0; j < n; ++j) f += obj[j] * result.x[j];
    result.objective = f;
    auto b = std::make_shared<Basis>();
    b->status = status;
    result.basis = std::move(b);
    return result;
  };

  auto refresh = [&]() -> bool {
    if (!factor()) {
      if (++recoveries > 5) return false;
      cold_basis();
      factor();
      bland = false;
    }
    compute_basic_values();
    fresh = true;
    return true;
  };

  while (true) {
    if ((iter & 15) == 0 && deadline.expired()) return finish(LpStatus::time_limit);
    if (iter >= max_iter) return finish(LpStatus::iteration_limit);
    if (etas.size() >= kRefactorEvery && !refresh()) return finish(LpStatus::numeric_error);

    double infeas = 0.0;
    for (int r = 0; r < m; ++r) infeas += infeasibility(head[r], ftol);
    const bool phase1 = infeas > 0.0;
    if (phase1 != last_phase1) {
      best_merit = std::numeric_limits<double>::infinity();
      stall = 0;
      bland = false;
      last_phase1 = phase1;
    }
    for (int r = 0; r < m; ++r) {
      const int j = head[r];
      if (phase1)
        cb[r] = x[j] < lo[j] - ftol ? -1.0 : x[j] > hi[j] + ftol ? 1.0 : 0.0;
      else
        cb[r] = cost[j];
    }
    double merit = infeas;
    if (!phase1) {
      merit = 0.0;
      for (int j = 0; j < total; ++j) merit += cost[j] * x[j];
    }
    if (merit < best_merit - 1e-11 * (1.0 + std::abs(merit))) {
      best_merit = merit;
      stall = 0;
      bland = false;
    } else if (++stall > kStallLimit) {
      bland = true;
    }

    const Eigen::VectorXd y = btran(cb);

    int q = -1;
    double dir = 0.0, best_score = 0.0;
    for (int j = 0; j < total; ++j) {
      const VarStatus s = status[j];
      if (s == VarStatus::basic || lo[j] == hi[j]) continue;
      const double d = (phase1 ? 0.0 : cost[j]) - dot_column(j, y);
      double want = 0.0;
      if (s == VarStatus::at_lower && d < -dtol) want = 1.0;
      else if (s == VarStatus::at_upper && d > dtol) want = -1.0;
      else if (s == VarStatus::at_zero && std::abs(d) > dtol) want = d < 0 ? 1.0 : -1.0;
      if (want == 0.0) continue;
      if (bland) {
        q = j;
        dir = want;
        break;
      }
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        q = j;
        dir = want;
      }
    }

    if (q < 0) {
      if (!fresh) {
        if (!refresh()) return finish(LpStatus::numeric_error);
        continue;
      }
      return finish(phase1 ? LpStatus::infeasible : LpStatus::optimal);
    }

    col.setZero();
    for_column(q, [&](int r, double v) { col[r] = v; });
    alpha = ftran(col);

    // Harris two-pass ratio test over the basic variables.
    double theta_max = kInf;
    for (int r = 0; r < m; ++r) {
      const double a = alpha[r];
      if (std::abs(a) <= kPivotTol) continue;
      const double rate = -dir * a;
      const int j = head[r];
      double t = kInf;
      if (rate < 0) {
        if (x[j] > hi[j] + ftol) t = (x[j] - hi[j] + ftol) / -rate;
        else if (x[j] >= lo[j] - ftol && std::isfinite(lo[j])) t = (x[j] - lo[j] + ftol) / -rate;
      } else {
        if (x[j] < lo[j] - ftol) t = (lo[j] - x[j] + ftol) / rate;
        else if (x[j] <= hi[j] + ftol && std::isfinite(hi[j])) t = (hi[j] - x[j] + ftol) / rate;
      }
      theta_max = std::min(theta_max, t);
    }
    const double flip = std::isfinite(lo[q]) && std::isfinite(hi[q]) ? hi[q] - lo[q] : kInf;

    int leave = -1;
    double theta = kInf, leave_bound = 0.0, best_pivot = 0.0;
    if (std::isfinite(theta_max)) {
      for (int r = 0; r < m; ++r) {
        const double a = alpha[r];
        if (std::abs(a) <= kPivotTol) continue;
        const double rate = -dir * a;
        const int j = head[r];
        double t = kInf, bound = 0.0;
        if (rate < 0) {
          if (x[j] > hi[j] + ftol) bound = hi[j];
          else if (x[j] >= lo[j] - ftol && std::isfinite(lo[j])) bound = lo[j];
          else continue;
          t = (x[j] - bound) / -rate;
        } else {
          if (x[j] < lo[j] - ftol) bound = lo[j];
          else if (x[j] <= hi[j] + ftol && std::isfinite(hi[j])) bound = hi[j];
          else continue;
          t = (bound - x[j]) / rate;
        }
        if (t > theta_max) continue;
        const bool better = bland ? (leave < 0 || t < theta - 1e-12 ||
                                     (t <= theta + 1e-12 && j < head[leave]))
                                  : std::abs(a) > best_pivot;
        if (better) {
          leave = r;
          theta = std::max(t, 0.0);
          leave_bound = bound;
          best_pivot = std::abs(a);
        }
      }
    }

    if (std::isfinite(flip) && flip <= theta_max && (leave < 0 || flip <= theta)) {
      ++iter;
      fresh = false;
      for (int r = 0; r < m; ++r) x[head[r]] -= dir * flip * alpha[r];
      status[q] = dir > 0 ? VarStatus::at_upper : VarStatus::at_lower;
      x[q] = dir > 0 ? hi[q] : lo[q];
      continue;
    }
    if (leave < 0) {
      if (!phase1) return finish(LpStatus::unbounded);
      if (fresh) return finish(LpStatus::numeric_error);
      if (!refresh()) return finish(LpStatus::numeric_error);
      continue;
    }

    ++iter;
    fresh = false;
    for (int r = 0; r < m; ++r) x[head[r]] -= dir * theta * alpha[r];
    x[q] += dir * theta;
    const int out = head[leave];
    x[out] = leave_bound;
    status[out] = leave_bound == lo[out] ? VarStatus::at_lower : VarStatus::at_upper;
    status[q] = VarStatus::basic;
    head[leave] = q;

    Eta eta{leave, alpha[leave], {}};
    for (int r = 0; r < m; ++r)
      if (r != leave && alpha[r] != 0.0) eta.entries.emplace_back(r, alpha[r]);
    etas.push_back(std::move(eta));
    if (std::abs(alpha[leave]) < 1e-6 && !refresh()) return finish(LpStatus::numeric_error);
  }
}

SimplexSolver::SimplexSolver(const Model& model) : impl_(std::make_unique<Impl>(model)) {}
SimplexSolver::~SimplexSolver() = default;

std::size_t SimplexSolver::num_columns() const { return static_cast<std::size_t>(impl_->n); }

void SimplexSolver::set_column_bounds(std::size_t col, double lo, double hi) {
  if (col >= num_columns()) throw ContractError("column index out of range");
  impl_->lo[col] = lo;
  impl_->hi[col] = hi;
}

void SimplexSolver::reset_bounds() {
  impl_->lo = impl_->lo0;
  impl_->hi = impl_->hi0;
}

LpResult SimplexSolver::solve(const SolveOptions& options, const Deadline& deadline,
                              const Basis* warm_start) {
  options.validate();
  return impl_->run(options, deadline, warm_start);
}

LpResult solve_lp(const Model& model, const SolveOptions& options) {
  options.validate();
  SimplexSolver solver(model);
  return solver.solve(options, Deadline(options.time_limit));
}

}  // namespace scopf
