#include "scopf/nlp_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "scopf/error.hpp"

namespace scopf {

const char* to_string(NlpStatus status) {
  switch (status) {
    case NlpStatus::converged: return "converged";
    case NlpStatus::max_iter: return "max_iter";
    case NlpStatus::time_limit: return "time_limit";
  }
  return "unknown";
}

void check_finite(const NlpProblem& problem, std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isfinite(values[i])) continue;
    std::string where = std::string(what) + "[" + std::to_string(i) + "]";
    if (values.size() == problem.num_variables()) where += " (" + problem.variable_name(i) + ")";
    throw NumericError("non-finite " + where);
  }
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

constexpr std::size_t kMaxOuter = 200;
constexpr std::size_t kMaxInner = 200;
constexpr std::size_t kMaxTotal = 20000;
constexpr double kMaxStep = 1.0;  // infinity-norm cap on the free part of a Newton direction

class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const NlpProblem& p, const SolveOptions& o)
      : p_(p), o_(o), n_(p.num_variables()), m_(p.num_constraints()), lo_(p.lower()), hi_(p.upper()) {
    if (lo_.size() != n_ || hi_.size() != n_) throw ContractError("solve_nlp: bound arrays have wrong length");
    for (std::size_t j = 0; j < n_; ++j)
      if (!(lo_[j] <= hi_[j])) throw ContractError("solve_nlp: inverted bounds on " + p.variable_name(j));
    sign_ = p.maximize() ? -1.0 : 1.0;
    grad_.resize(n_);
    c_.resize(m_);
    jac_.resize(p.jacobian_structure().size());
    hess_.resize(p.hessian_structure().size());
    lambda_.assign(m_, 0.0);
  }

  NlpResult run(std::span<const double> x0, const Deadline& deadline) {
    if (x0.size() != n_) throw ContractError("solve_nlp: start point has wrong length");
    std::vector<double> x(n_);
    for (std::size_t j = 0; j < n_; ++j) x[j] = std::clamp(x0[j], lo_[j], hi_[j]);

    p_.eval_gradient(x, grad_);
    check_finite(p_, grad_, "gradient");
    double gmax = 0.0;
    for (double g : grad_) gmax = std::max(gmax, std::abs(g));
    scale_ = 1.0 / std::max(1.0, gmax);

    double mu = 10.0;
    double omega = 1.0 / mu;
    double eta = std::pow(mu, -0.1);
    NlpResult best;
    bool have_best = false;
    NlpStatus status = NlpStatus::max_iter;
    std::size_t total = 0;
    bool timed_out = false;

    for (std::size_t outer = 0; outer < kMaxOuter && total < kMaxTotal; ++outer) {
      const double tol = std::max(omega, 0.5 * o_.opt_tol);
      timed_out = !minimize_inner(x, mu, tol, deadline, total);
      evaluate_constraints(x);
      const double res = inf_norm(c_);
      if (timed_out) {
        consider(best, have_best, x, res);
        status = NlpStatus::time_limit;
        break;
      }
      if (res <= std::max(eta, o_.feas_tol)) {
        for (std::size_t i = 0; i < m_; ++i) lambda_[i] -= mu * c_[i];
        const double stat = stationarity(x);
        consider(best, have_best, x, res);
        if (res <= o_.feas_tol && stat <= o_.opt_tol) {
          status = NlpStatus::converged;
          best = snapshot(x, res);
          best.stationarity = stat;
          have_best = true;
          break;
        }
        eta = std::max(eta / std::pow(mu, 0.9), 0.1 * o_.feas_tol);
        omega = std::max(omega / mu, 0.1 * o_.opt_tol);
      } else {
        consider(best, have_best, x, res);
        mu = std::min(mu * 10.0, 1e12);
        eta = std::max(std::pow(mu, -0.1), o_.feas_tol);
        omega = std::max(1.0 / mu, 0.1 * o_.opt_tol);
      }
      if (o_.log)
        *o_.log << "nlp outer=" << outer << " mu=" << mu << " residual=" << res << " inner_total=" << total
                << "\n";
    }
    if (!have_best) {
      evaluate_constraints(x);
      best = snapshot(x, inf_norm(c_));
    }
    best.status = status;
    best.iterations = total;
    if (status != NlpStatus::converged) best.stationarity = stationarity(best.x);
    return best;
  }

 private:
  static double inf_norm(const std::vector<double>& v) {
    double r = 0.0;
    for (double a : v) r = std::max(r, std::abs(a));
    return r;
  }

  void evaluate_constraints(std::span<const double> x) {
    if (m_ == 0) return;
    p_.eval_constraints(x, c_);
    check_finite(p_, c_, "constraints");
  }

  NlpResult snapshot(const std::vector<double>& x, double res) const {
    NlpResult r;
    r.x = x;
    r.objective = p_.eval_objective(x);
    r.residual = res;
    r.multipliers = lambda_;
    return r;
  }

  // Keeps the least infeasible point, ties broken by objective.
  void consider(NlpResult& best, bool& have, const std::vector<double>& x, double res) const {
    NlpResult cand = snapshot(x, res);
    if (!have) {
      best = std::move(cand);
      have = true;
      return;
    }
    const double ib = std::max(0.0, best.residual - o_.feas_tol), ic = std::max(0.0, res - o_.feas_tol);
    const double fb = sign_ * best.objective, fc = sign_ * cand.objective;
    if (ic < ib || (ic == ib && fc < fb)) best = std::move(cand);
  }

  // Augmented Lagrangian value; fills grad_ and c_ when asked.
  double merit(std::span<const double> x, double mu, bool with_gradient) {
    const double f = p_.eval_objective(x);
    if (!std::isfinite(f)) throw NumericError("non-finite objective");
    double phi = sign_ * scale_ * f;
    evaluate_constraints(x);
    for (std::size_t i = 0; i < m_; ++i) phi += -lambda_[i] * c_[i] + 0.5 * mu * c_[i] * c_[i];
    if (with_gradient) {
      p_.eval_gradient(x, grad_);
      check_finite(p_, grad_, "gradient");
      for (double& g : grad_) g *= sign_ * scale_;
      if (m_ > 0) {
        p_.eval_jacobian(x, jac_);
        check_finite(p_, jac_, "jacobian");
        const auto& js = p_.jacobian_structure();
        for (std::size_t k = 0; k < js.size(); ++k) {
          const std::size_t i = js.rows[k];
          grad_[js.cols[k]] -= jac_[k] * (lambda_[i] - mu * c_[i]);
        }
      }
    }
    return phi;
  }

  double projected_gradient_norm(const std::vector<double>& x, const std::vector<double>& g) const {
    double r = 0.0;
    for (std::size_t j = 0; j < n_; ++j) r = std::max(r, std::abs(x[j] - std::clamp(x[j] - g[j], lo_[j], hi_[j])));
    return r;
  }

  double stationarity(const std::vector<double>& x) {
    merit(x, 0.0, true);
    return projected_gradient_norm(x, grad_);
  }

  // Newton direction on the free set; active coordinates follow the negative gradient.
  std::vector<double> newton_direction(std::span<const double> x, double mu, const std::vector<bool>& free) {
    std::vector<long> map(n_, -1);
    long nf = 0;
    for (std::size_t j = 0; j < n_; ++j)
      if (free[j]) map[j] = nf++;
    std::vector<double> d(n_);
    for (std::size_t j = 0; j < n_; ++j) d[j] = -grad_[j];
    if (nf == 0) return d;

    std::vector<double> y(m_);
    for (std::size_t i = 0; i < m_; ++i) y[i] = -(lambda_[i] - mu * c_[i]);
    p_.eval_hessian(x, sign_ * scale_, y, hess_);
    check_finite(p_, hess_, "hessian");

    std::vector<Eigen::Triplet<double>> trip;
    const auto& hs = p_.hessian_structure();
    for (std::size_t k = 0; k < hs.size(); ++k) {
      const long r = map[hs.rows[k]], c = map[hs.cols[k]];
      if (r < 0 || c < 0) continue;
      trip.emplace_back(std::max(r, c), std::min(r, c), hess_[k]);
    }
    SpMat K(nf, nf);
    K.setFromTriplets(trip.begin(), trip.end());
    if (m_ > 0 && mu > 0.0) {
      std::vector<Eigen::Triplet<double>> jt;
      const auto& js = p_.jacobian_structure();
      for (std::size_t k = 0; k < js.size(); ++k)
        if (map[js.cols[k]] >= 0) jt.emplace_back(js.rows[k], map[js.cols[k]], jac_[k]);
      SpMat J(static_cast<long>(m_), nf);
      J.setFromTriplets(jt.begin(), jt.end());
      SpMat JtJ = (J.transpose() * J).pruned();
      K += mu * SpMat(JtJ.triangularView<Eigen::Lower>());
    }
    Vec rhs(nf);
    for (std::size_t j = 0; j < n_; ++j)
      if (map[j] >= 0) rhs[map[j]] = -grad_[j];

    double diag_max = 1.0;
    for (long k = 0; k < K.outerSize(); ++k)
      for (SpMat::InnerIterator it(K, k); it; ++it)
        if (it.row() == it.col()) diag_max = std::max(diag_max, std::abs(it.value()));
    SpMat I(nf, nf);
    I.setIdentity();
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
    double delta = reg_ * diag_max;
    for (int attempt = 0; attempt < 30; ++attempt) {
      SpMat Kd = delta > 0.0 ? SpMat(K + delta * I) : K;
      ldlt.compute(Kd);
      if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 1e-14 * diag_max).all()) {
        Vec s = ldlt.solve(rhs);
        if (s.allFinite()) {
          for (std::size_t j = 0; j < n_; ++j)
            if (map[j] >= 0) d[j] = s[map[j]];
          reg_ = delta / diag_max;
          return d;
        }
      }
      delta = delta == 0.0 ? 1e-8 * diag_max : delta * 10.0;
    }
    return d;  // gradient fallback
  }

  // Returns false when the deadline expired.
  bool minimize_inner(std::vector<double>& x, double mu, double tol, const Deadline& deadline, std::size_t& total) {
    std::vector<double> trial(n_), g(n_);
    for (std::size_t it = 0; it < kMaxInner && total < kMaxTotal; ++it) {
      if (deadline.expired()) return false;
      const double phi = merit(x, mu, true);
      g = grad_;
      const double pg = projected_gradient_norm(x, g);
      if (pg <= tol) return true;
      ++total;
      const double eps = std::min(1e-3, pg);
      std::vector<bool> free(n_, true);
      for (std::size_t j = 0; j < n_; ++j) {
        if (lo_[j] == hi_[j]) free[j] = false;
        else if (x[j] <= lo_[j] + eps && g[j] > 0) free[j] = false;
        else if (x[j] >= hi_[j] - eps && g[j] < 0) free[j] = false;
      }
      std::vector<double> d = newton_direction(x, mu, free);
      double slope = 0.0;
      for (std::size_t j = 0; j < n_; ++j) slope += g[j] * d[j];
      if (!(slope < 0.0)) {
        for (std::size_t j = 0; j < n_; ++j) d[j] = -g[j];
      }
      double dmax = 0.0;
      for (std::size_t j = 0; j < n_; ++j)
        if (free[j]) dmax = std::max(dmax, std::abs(d[j]));
      if (dmax > kMaxStep)
        for (std::size_t j = 0; j < n_; ++j)
          if (free[j]) d[j] *= kMaxStep / dmax;
      bool accepted = false;
      double alpha = 1.0;
      for (int pass = 0; pass < 2 && !accepted; ++pass) {
        alpha = 1.0;
        for (int ls = 0; ls < 50; ++ls, alpha *= 0.5) {
          double decrease = 0.0;
          for (std::size_t j = 0; j < n_; ++j) {
            trial[j] = std::clamp(x[j] + alpha * d[j], lo_[j], hi_[j]);
            decrease += g[j] * (trial[j] - x[j]);
          }
          if (!(decrease < 0.0)) {
            if (decrease == 0.0) break;
            continue;
          }
          const double phi_t = merit(trial, mu, false);
          if (phi_t <= phi + 1e-4 * decrease) {
            accepted = true;
            break;
          }
        }
        if (!accepted && pass == 0)
          for (std::size_t j = 0; j < n_; ++j) d[j] = -g[j];
      }
      if (!accepted) return true;  // no progress possible at this accuracy
      if (alpha == 1.0)
        reg_ = reg_ < 1e-10 ? 0.0 : reg_ / 10.0;
      else if (alpha < 0.1)
        reg_ = std::min(1e6, std::max(1e-6, reg_ * 10.0));
      x = trial;
    }
    return true;
  }

  const NlpProblem& p_;
  const SolveOptions& o_;
  std::size_t n_, m_;
  const std::vector<double>& lo_;
  const std::vector<double>& hi_;
  double sign_ = 1.0;
  double scale_ = 1.0;
  double reg_ = 0.0;  // Levenberg shift relative to the largest diagonal
  std::vector<double> grad_, c_, jac_, hess_, lambda_;
};

}  // namespace

NlpResult solve_nlp(const NlpProblem& problem, const SolveOptions& options, std::span<const double> x0) {
  options.validate();
  Deadline deadline(options.time_limit);
  AugmentedLagrangian al(problem, options);
  return al.run(x0, deadline);
}

}  // namespace scopf
