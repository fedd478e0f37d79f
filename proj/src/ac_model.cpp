#include "scopf/ac_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "scopf/error.hpp"

namespace scopf {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Lower-triangle slot of local entry (a, b), a >= b.
constexpr std::size_t tri(std::size_t a, std::size_t b) { return a * (a + 1) / 2 + b; }

// a vf² + e vt² + vf vt K(Δ), K = α cosΔ + β sinΔ.
void quantity(double a, double e, double alpha, double beta, double vf, double vt, double c, double s,
              double& value, std::array<double, 4>& g, std::array<double, 10>& h) {
  const double K = alpha * c + beta * s;
  const double K1 = -alpha * s + beta * c;
  const double K2 = -K;
  value = a * vf * vf + e * vt * vt + vf * vt * K;
  g = {2 * a * vf + vt * K, 2 * e * vt + vf * K, vf * vt * K1, -vf * vt * K1};
  h[tri(0, 0)] = 2 * a;
  h[tri(1, 0)] = K;
  h[tri(1, 1)] = 2 * e;
  h[tri(2, 0)] = vt * K1;
  h[tri(2, 1)] = vf * K1;
  h[tri(2, 2)] = vf * vt * K2;
  h[tri(3, 0)] = -vt * K1;
  h[tri(3, 1)] = -vf * K1;
  h[tri(3, 2)] = -vf * vt * K2;
  h[tri(3, 3)] = vf * vt * K2;
}

// Smoothed max(0, u - S²): quadratic over [S², S² + δ], linear beyond.
struct Huber {
  double value, d1, d2;
};
Huber overload_surrogate(double u, double s2) {
  const double delta = 0.05 * s2;
  if (u <= s2) return {0.0, 0.0, 0.0};
  const double e = u - s2;
  if (e <= delta) return {e * e / (2 * delta), e / delta, 1.0 / delta};
  return {e - 0.5 * delta, 1.0, 0.0};
}

}  // namespace

double BlockClassification::fixed_power() const {
  double p = 0.0;
  for (const auto& b : blocks)
    if (b.status == BlockStatus::fixed_at_max) p += b.hi;
  return p;
}

BlockClassification classify_blocks(const Device& d, std::size_t t, bool on, double p_lo, double p_hi) {
  BlockClassification out;
  const auto& blocks = d.cost_blocks.at(t);
  double cap = 0.0;
  for (const auto& b : blocks) cap += b.quantity_max;
  if (on && cap < p_hi - 1e-9)
    throw ContractError("device " + d.id + ": block capacity " + std::to_string(cap) + " below p_hi " +
                        std::to_string(p_hi));
  double filled = 0.0;
  constexpr double eps = 1e-12;
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    const double q = blocks[m].quantity_max;
    BlockState s{m, BlockStatus::fixed_at_zero, 0.0, 0.0};
    if (on) {
      if (filled + q <= p_lo + eps) {
        s = {m, BlockStatus::fixed_at_max, q, q};
      } else if (filled < p_hi - eps) {
        s = {m, BlockStatus::free, std::max(0.0, p_lo - filled), std::min(q, p_hi - filled)};
      }
    }
    filled += q;
    out.blocks.push_back(s);
  }
  return out;
}

std::pair<double, double> ac_power_interval(const Instance& inst, std::size_t t, std::size_t j, bool prior_on,
                                            double prior_p, std::pair<double, double> bound) {
  const Device& d = inst.devices[j];
  const double dur = inst.time_grid.durations[t];
  double lo = std::max(d.p_min[t], bound.first), hi = std::min(d.p_max[t], bound.second);
  if (prior_on) {
    lo = std::max(lo, prior_p - d.ramp_down * dur);
    hi = std::min(hi, prior_p + d.ramp_up * dur);
  } else {
    hi = std::min(hi, d.ramp_up * dur + d.p_min[t]);
  }
  return {lo, hi};
}

BranchLocal branch_local(const Branch& br, double vf, double vt, double thf, double tht) {
  const double z2 = br.r * br.r + br.x * br.x;
  const double g = br.r / z2, b = -br.x / z2, bc = b + 0.5 * br.b_ch;
  const double c = std::cos(thf - tht), s = std::sin(thf - tht);
  BranchLocal out;
  quantity(g, 0.0, -g, -b, vf, vt, c, s, out.value[0], out.grad[0], out.hess[0]);
  quantity(-bc, 0.0, b, -g, vf, vt, c, s, out.value[1], out.grad[1], out.hess[1]);
  quantity(0.0, g, -g, b, vf, vt, c, s, out.value[2], out.grad[2], out.hess[2]);
  quantity(0.0, -bc, b, g, vf, vt, c, s, out.value[3], out.grad[3], out.hess[3]);
  return out;
}

AcStage::AcStage(const Instance& inst, AcStageInput input, bool parallel)
    : inst_(inst), in_(std::move(input)), parallel_(parallel), nb_(inst.buses.size()) {
  const std::size_t D = inst.devices.size(), L = inst.branches.size(), t = in_.t;
  if (t >= inst.horizon()) throw ContractError("ac stage interval outside the time grid");
  if (in_.on.size() != D || in_.prior_on.size() != D || in_.prior_p.size() != D)
    throw ContractError("ac stage input does not cover every device");
  if (!in_.ramp_bounds.empty() && in_.ramp_bounds.size() != D)
    throw ContractError("ac stage ramp bounds do not cover every device");
  const double dur = inst.time_grid.durations[t];
  const double c_p = inst.penalties.mismatch_penalty;

  // Buses.
  const std::size_t ref = inst.reference_bus();
  for (std::size_t i = 0; i < nb_; ++i) {
    lo_.push_back(inst.buses[i].v_min);
    hi_.push_back(inst.buses[i].v_max);
  }
  for (std::size_t i = 0; i < nb_; ++i) {
    lo_.push_back(i == ref ? 0.0 : -kInf);
    hi_.push_back(i == ref ? 0.0 : kInf);
  }

  // Blocks.
  p_const_.assign(nb_, 0.0);
  cls_.resize(D);
  block_cols_.resize(D);
  interval_.assign(D, {0.0, 0.0});
  std::vector<double> obj_blocks;
  for (std::size_t j = 0; j < D; ++j) {
    const Device& d = inst.devices[j];
    const double sign = d.is_producer() ? 1.0 : -1.0;  // injection sign
    double lo = 0.0, hi = 0.0;
    if (in_.on[j]) {
      auto bound = in_.ramp_bounds.empty() ? std::pair<double, double>{-kInf, kInf} : in_.ramp_bounds[j];
      std::tie(lo, hi) = ac_power_interval(inst, t, j, in_.prior_on[j], in_.prior_p[j], bound);
      if (lo > hi + 1e-7)
        throw ContractError("device " + d.id + ": empty power interval [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "] at interval " + std::to_string(t));
      hi = std::max(lo, hi);
    }
    interval_[j] = {lo, hi};
    cls_[j] = classify_blocks(d, t, in_.on[j], lo, hi);
    for (const auto& bs : cls_[j].blocks) {
      const double price = d.cost_blocks[t][bs.block].marginal_price * dur;
      const double value = d.is_producer() ? -price : price;
      if (bs.status == BlockStatus::fixed_at_max) {
        p_const_[d.bus_index] += sign * bs.hi;
        obj_const_ += value * bs.hi;
      } else if (bs.status == BlockStatus::free) {
        block_cols_[j].push_back(lo_.size());
        lo_.push_back(bs.lo);
        hi_.push_back(bs.hi);
        obj_blocks.push_back(value);
      }
    }
  }
  q0_ = lo_.size();
  for (std::size_t j = 0; j < D; ++j) {
    const Device& d = inst.devices[j];
    lo_.push_back(in_.on[j] ? d.q_min[t] : 0.0);
    hi_.push_back(in_.on[j] ? d.q_max[t] : 0.0);
  }
  m0_ = lo_.size();
  for (std::size_t k = 0; k < 4 * nb_; ++k) {
    lo_.push_back(0.0);
    hi_.push_back(kInf);
  }

  obj_lin_.assign(lo_.size(), 0.0);
  std::copy(obj_blocks.begin(), obj_blocks.end(), obj_lin_.begin() + static_cast<long>(2 * nb_));
  for (std::size_t k = 0; k < 4 * nb_; ++k) obj_lin_[m0_ + k] = -c_p * dur;

  g_sh_.assign(nb_, 0.0);
  b_sh_.assign(nb_, 0.0);
  for (const auto& s : inst.shunts) {
    g_sh_[s.bus_index] += s.g_sh[t];
    b_sh_[s.bus_index] += s.b_sh[t];
  }

  closed_.assign(L, false);
  for (std::size_t l = 0; l < L; ++l) {
    closed_[l] = inst.branches[l].initial_closed && !in_.opened.count(l);
    if (closed_[l]) closed_list_.push_back(l);
  }

  // Jacobian structure.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> jmap;
  auto jslot = [&](std::size_t r, std::size_t c) {
    auto [it, fresh] = jmap.emplace(std::make_pair(r, c), jac_.size());
    if (fresh) {
      jac_.rows.push_back(r);
      jac_.cols.push_back(c);
    }
    return it->second;
  };
  for (std::size_t j = 0; j < D; ++j) {
    const Device& d = inst.devices[j];
    const double sign = d.is_producer() ? 1.0 : -1.0;
    for (std::size_t col : block_cols_[j]) {
      jac_lin_.push_back(jslot(d.bus_index, col));
      jac_lin_val_.push_back(sign);
    }
    jac_lin_.push_back(jslot(nb_ + d.bus_index, q_index(j)));
    jac_lin_val_.push_back(sign);
  }
  for (std::size_t i = 0; i < nb_; ++i) {
    const double signs[4] = {1.0, -1.0, 1.0, -1.0};
    for (int k = 0; k < 4; ++k) {
      jac_lin_.push_back(jslot(k < 2 ? i : nb_ + i, mismatch_index(i, k)));
      jac_lin_val_.push_back(signs[k]);
    }
  }
  jac_shunt_p_.assign(nb_, kNone);
  jac_shunt_q_.assign(nb_, kNone);
  for (std::size_t i = 0; i < nb_; ++i) {
    if (g_sh_[i] != 0.0) jac_shunt_p_[i] = jslot(i, v_index(i));
    if (b_sh_[i] != 0.0) jac_shunt_q_[i] = jslot(nb_ + i, v_index(i));
  }
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> hmap;
  auto hslot = [&](std::size_t a, std::size_t b) {
    const auto key = std::make_pair(std::max(a, b), std::min(a, b));
    auto [it, fresh] = hmap.emplace(key, hess_.size());
    if (fresh) {
      hess_.rows.push_back(key.first);
      hess_.cols.push_back(key.second);
    }
    return it->second;
  };
  hess_shunt_.assign(nb_, kNone);
  for (std::size_t i = 0; i < nb_; ++i)
    if (g_sh_[i] != 0.0 || b_sh_[i] != 0.0) hess_shunt_[i] = hslot(v_index(i), v_index(i));
  for (std::size_t l : closed_list_) {
    const Branch& br = inst.branches[l];
    BranchSlots s;
    s.col = {v_index(br.from_index), v_index(br.to_index), theta_index(br.from_index), theta_index(br.to_index)};
    const std::size_t rows[4] = {br.from_index, nb_ + br.from_index, br.to_index, nb_ + br.to_index};
    for (int q = 0; q < 4; ++q)
      for (int k = 0; k < 4; ++k) s.jac[q][k] = jslot(rows[q], s.col[k]);
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b <= a; ++b) s.hess[tri(a, b)] = hslot(s.col[a], s.col[b]);
    slots_.push_back(s);
  }
}

std::string AcStage::variable_name(std::size_t j) const {
  if (j < nb_) return "v_" + inst_.buses[j].id;
  if (j < 2 * nb_) return "th_" + inst_.buses[j - nb_].id;
  if (j < q0_) {
    for (std::size_t d = 0; d < block_cols_.size(); ++d)
      for (std::size_t k = 0; k < block_cols_[d].size(); ++k)
        if (block_cols_[d][k] == j) return "pb_" + inst_.devices[d].id + "_" + std::to_string(k);
  }
  if (j < m0_) return "q_" + inst_.devices[j - q0_].id;
  static const char* kinds[] = {"mp+_", "mp-_", "mq+_", "mq-_"};
  return kinds[(j - m0_) % 4] + inst_.buses[(j - m0_) / 4].id;
}

double AcStage::overload_weight(std::size_t l) const {
  return inst_.penalties.overload_penalty * inst_.time_grid.durations[in_.t] / (2.0 * inst_.branches[l].s_max);
}

void AcStage::eval_branches(std::span<const double> x, std::vector<BranchLocal>& out, bool parallel) const {
  const long n = static_cast<long>(closed_list_.size());
  out.resize(closed_list_.size());
  auto one = [&](long k) {
    const Branch& br = inst_.branches[closed_list_[k]];
    out[k] = branch_local(br, x[v_index(br.from_index)], x[v_index(br.to_index)], x[theta_index(br.from_index)],
                          x[theta_index(br.to_index)]);
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) one(k);
  } else {
    for (long k = 0; k < n; ++k) one(k);
  }
}

double AcStage::device_power(std::span<const double> x, std::size_t j) const {
  double p = cls_[j].fixed_power();
  for (std::size_t col : block_cols_[j]) p += x[col];
  return p;
}

double AcStage::eval_objective(std::span<const double> x) const {
  double f = obj_const_;
  for (std::size_t k = 0; k < x.size(); ++k) f += obj_lin_[k] * x[k];
  std::vector<BranchLocal> bl;
  eval_branches(x, bl, parallel_);
  for (std::size_t k = 0; k < bl.size(); ++k) {
    const std::size_t l = closed_list_[k];
    const double s2 = inst_.branches[l].s_max * inst_.branches[l].s_max, w = overload_weight(l);
    for (int end = 0; end < 2; ++end) {
      const double p = bl[k].value[2 * end], q = bl[k].value[2 * end + 1];
      f -= w * overload_surrogate(p * p + q * q, s2).value;
    }
  }
  if (!std::isfinite(f)) throw NumericError("non-finite AC objective");
  return f;
}

void AcStage::eval_gradient(std::span<const double> x, std::span<double> grad) const {
  std::copy(obj_lin_.begin(), obj_lin_.end(), grad.begin());
  std::vector<BranchLocal> bl;
  eval_branches(x, bl, parallel_);
  for (std::size_t k = 0; k < bl.size(); ++k) {
    const std::size_t l = closed_list_[k];
    const double s2 = inst_.branches[l].s_max * inst_.branches[l].s_max, w = overload_weight(l);
    for (int end = 0; end < 2; ++end) {
      const int qp = 2 * end, qq = qp + 1;
      const double p = bl[k].value[qp], q = bl[k].value[qq];
      const Huber h = overload_surrogate(p * p + q * q, s2);
      if (h.d1 == 0.0) continue;
      for (int a = 0; a < 4; ++a)
        grad[slots_[k].col[a]] -= w * h.d1 * 2.0 * (p * bl[k].grad[qp][a] + q * bl[k].grad[qq][a]);
    }
  }
  check_finite(*this, grad, "gradient");
}

void AcStage::eval_constraints(std::span<const double> x, std::span<double> c) const {
  for (std::size_t i = 0; i < nb_; ++i) {
    const double v2 = x[v_index(i)] * x[v_index(i)];
    c[i] = p_const_[i] - g_sh_[i] * v2 + x[mismatch_index(i, 0)] - x[mismatch_index(i, 1)];
    c[nb_ + i] = b_sh_[i] * v2 + x[mismatch_index(i, 2)] - x[mismatch_index(i, 3)];
  }
  for (std::size_t j = 0; j < inst_.devices.size(); ++j) {
    const Device& d = inst_.devices[j];
    const double sign = d.is_producer() ? 1.0 : -1.0;
    for (std::size_t col : block_cols_[j]) c[d.bus_index] += sign * x[col];
    c[nb_ + d.bus_index] += sign * x[q_index(j)];
  }
  std::vector<BranchLocal> bl;
  eval_branches(x, bl, parallel_);
  for (std::size_t k = 0; k < bl.size(); ++k) {
    const Branch& br = inst_.branches[closed_list_[k]];
    c[br.from_index] -= bl[k].value[0];
    c[nb_ + br.from_index] -= bl[k].value[1];
    c[br.to_index] -= bl[k].value[2];
    c[nb_ + br.to_index] -= bl[k].value[3];
  }
  check_finite(*this, c, "constraints");
}

void AcStage::eval_jacobian(std::span<const double> x, std::span<double> values) const {
  std::fill(values.begin(), values.end(), 0.0);
  for (std::size_t k = 0; k < jac_lin_.size(); ++k) values[jac_lin_[k]] += jac_lin_val_[k];
  for (std::size_t i = 0; i < nb_; ++i) {
    if (jac_shunt_p_[i] != kNone) values[jac_shunt_p_[i]] -= 2.0 * g_sh_[i] * x[v_index(i)];
    if (jac_shunt_q_[i] != kNone) values[jac_shunt_q_[i]] += 2.0 * b_sh_[i] * x[v_index(i)];
  }
  std::vector<BranchLocal> bl;
  eval_branches(x, bl, parallel_);
  for (std::size_t k = 0; k < bl.size(); ++k)
    for (int q = 0; q < 4; ++q)
      for (int a = 0; a < 4; ++a) values[slots_[k].jac[q][a]] -= bl[k].grad[q][a];
  check_finite(*this, values, "jacobian");
}

void AcStage::eval_hessian(std::span<const double> x, double sigma, std::span<const double> lambda,
                           std::span<double> values) const {
  std::fill(values.begin(), values.end(), 0.0);
  for (std::size_t i = 0; i < nb_; ++i)
    if (hess_shunt_[i] != kNone) values[hess_shunt_[i]] += -2.0 * g_sh_[i] * lambda[i] + 2.0 * b_sh_[i] * lambda[nb_ + i];
  std::vector<BranchLocal> bl;
  eval_branches(x, bl, parallel_);
  for (std::size_t k = 0; k < bl.size(); ++k) {
    const std::size_t l = closed_list_[k];
    const Branch& br = inst_.branches[l];
    const std::size_t rows[4] = {br.from_index, nb_ + br.from_index, br.to_index, nb_ + br.to_index};
    std::array<double, 10> local{};
    for (int q = 0; q < 4; ++q) {
      const double lam = lambda[rows[q]];
      if (lam == 0.0) continue;
      for (std::size_t s = 0; s < 10; ++s) local[s] -= lam * bl[k].hess[q][s];
    }
    if (sigma != 0.0) {
      const double s2 = br.s_max * br.s_max, w = overload_weight(l);
      for (int end = 0; end < 2; ++end) {
        const int qp = 2 * end, qq = qp + 1;
        const double p = bl[k].value[qp], q = bl[k].value[qq];
        const Huber h = overload_surrogate(p * p + q * q, s2);
        if (h.d1 == 0.0 && h.d2 == 0.0) continue;
        std::array<double, 4> du;
        for (int a = 0; a < 4; ++a) du[a] = 2.0 * (p * bl[k].grad[qp][a] + q * bl[k].grad[qq][a]);
        for (std::size_t a = 0; a < 4; ++a)
          for (std::size_t b = 0; b <= a; ++b) {
            const std::size_t s = tri(a, b);
            const double d2u = 2.0 * (bl[k].grad[qp][a] * bl[k].grad[qp][b] + p * bl[k].hess[qp][s] +
                                      bl[k].grad[qq][a] * bl[k].grad[qq][b] + q * bl[k].hess[qq][s]);
            local[s] -= sigma * w * (h.d2 * du[a] * du[b] + h.d1 * d2u);
          }
      }
    }
    for (std::size_t s = 0; s < 10; ++s) values[slots_[k].hess[s]] += local[s];
  }
  check_finite(*this, values, "hessian");
}

std::vector<double> AcStage::warm_start() const {
  std::vector<double> x(lo_.size(), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    double mid = 0.0;
    if (k < nb_) mid = 1.0;
    else if (k < 2 * nb_) mid = 0.0;
    else if (k < m0_) mid = 0.5 * (lo_[k] + hi_[k]);
    x[k] = std::clamp(mid, lo_[k], hi_[k]);
  }
  return x;
}

SolutionStep AcStage::extract(std::span<const double> x) const {
  SolutionStep s;
  for (std::size_t j = 0; j < inst_.devices.size(); ++j) {
    DeviceStep d;
    d.on = in_.on[j];
    d.p = in_.on[j] ? device_power(x, j) : 0.0;
    d.q = in_.on[j] ? x[q_index(j)] : 0.0;
    d.start = in_.on[j] && !in_.prior_on[j];
    d.stop = !in_.on[j] && in_.prior_on[j];
    s.devices.push_back(d);
  }
  for (std::size_t i = 0; i < nb_; ++i) s.buses.push_back({x[v_index(i)], x[theta_index(i)]});
  for (std::size_t l = 0; l < inst_.branches.size(); ++l) s.branch_closed.push_back(closed_[l]);
  return s;
}

}  // namespace scopf
