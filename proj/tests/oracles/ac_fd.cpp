#include "oracles/ac_fd.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace oracle {

namespace {

std::vector<double> lagrangian_gradient(const scopf::AcStage& ac, const std::vector<double>& x,
                                        const std::vector<double>& lambda) {
  std::vector<double> jv(ac.jacobian_structure().size()), g(ac.num_variables(), 0.0);
  ac.eval_jacobian(x, jv);
  const auto& s = ac.jacobian_structure();
  for (std::size_t k = 0; k < s.size(); ++k) g[s.cols[k]] += lambda[s.rows[k]] * jv[k];
  return g;
}

}  // namespace

scopf::AcStageInput initial_input(const scopf::Instance& inst, std::size_t t) {
  scopf::AcStageInput in;
  in.t = t;
  for (const auto& d : inst.devices) {
    in.on.push_back(d.initial.on);
    in.prior_on.push_back(d.initial.on);
    in.prior_p.push_back(d.initial.p);
  }
  return in;
}

std::vector<double> random_point(const scopf::AcStage& ac, std::mt19937& rng) {
  std::vector<double> x(ac.num_variables());
  const auto& lo = ac.lower();
  const auto& hi = ac.upper();
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double a = std::isfinite(lo[k]) ? lo[k] : -0.1;
    const double b = std::isfinite(hi[k]) ? hi[k] : (std::isfinite(lo[k]) ? a + 1e-5 : 0.1);
    x[k] = std::uniform_real_distribution<double>(a, b)(rng);
  }
  return x;
}

double gradient_error(const scopf::AcStage& ac, const std::vector<double>& x, double h) {
  std::vector<double> g(ac.num_variables());
  ac.eval_gradient(x, g);
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    auto xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const double fd = (ac.eval_objective(xp) - ac.eval_objective(xm)) / (2 * h);
    worst = std::max(worst, std::abs(fd - g[k]) / std::max(1.0, std::abs(g[k])));
  }
  return worst;
}

double jacobian_error(const scopf::AcStage& ac, const std::vector<double>& x, double h) {
  const auto& s = ac.jacobian_structure();
  std::vector<double> jv(s.size());
  ac.eval_jacobian(x, jv);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<long>(ac.num_constraints()),
                                            static_cast<long>(ac.num_variables()));
  for (std::size_t k = 0; k < s.size(); ++k) J(static_cast<long>(s.rows[k]), static_cast<long>(s.cols[k])) += jv[k];
  std::vector<double> cp(ac.num_constraints()), cm(ac.num_constraints());
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    auto xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    ac.eval_constraints(xp, cp);
    ac.eval_constraints(xm, cm);
    for (std::size_t r = 0; r < cp.size(); ++r)
      worst = std::max(worst, std::abs((cp[r] - cm[r]) / (2 * h) - J(static_cast<long>(r), static_cast<long>(k))));
  }
  return worst;
}

double hessian_error(const scopf::AcStage& ac, const std::vector<double>& x, const std::vector<double>& lambda,
                     double h) {
  const auto& s = ac.hessian_structure();
  std::vector<double> hv(s.size());
  ac.eval_hessian(x, 0.0, lambda, hv);
  const auto n = static_cast<long>(ac.num_variables());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto r = static_cast<long>(s.rows[k]), c = static_cast<long>(s.cols[k]);
    H(r, c) += hv[k];
    if (r != c) H(c, r) += hv[k];
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    auto xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const auto gp = lagrangian_gradient(ac, xp, lambda), gm = lagrangian_gradient(ac, xm, lambda);
    for (std::size_t r = 0; r < x.size(); ++r)
      worst = std::max(worst, std::abs((gp[r] - gm[r]) / (2 * h) - H(static_cast<long>(r), static_cast<long>(k))));
  }
  return worst;
}

}  // namespace oracle
