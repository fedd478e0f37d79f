#include "scopf/evaluator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "scopf/error.hpp"
#include "scopf/instance_io.hpp"

namespace scopf {

namespace {

using cplx = std::complex<double>;

constexpr std::size_t kDenseLimit = 2000;
constexpr double kIslandTol = 1e-9;

double merit_value(const std::vector<CostBlock>& blocks, double p) {
  double value = 0.0, lo = 0.0;
  for (const auto& b : blocks) {
    const double hi = lo + b.quantity_max;
    if (p > lo) value += (std::min(p, hi) - lo) * b.marginal_price;
    lo = hi;
  }
  if (p > lo && !blocks.empty()) value += (p - lo) * blocks.back().marginal_price;
  return value;
}

double category_cost(const Device& d, double downtime) {
  const auto& cats = d.startup_categories;
  if (cats.empty()) return 0.0;
  auto it = std::find_if(cats.begin(), cats.end(), [&](const StartupCategory& c) {
    return downtime >= c.downtime_lo - 1e-9 && downtime < c.downtime_hi;
  });
  return it == cats.end() ? cats.back().cost : it->cost;
}

struct BranchAdmittance {
  cplx yff, yft, ytf, ytt;
};

BranchAdmittance admittance(const Branch& br) {
  const cplx y = 1.0 / cplx(br.r, br.x);
  const cplx half(0.0, br.b_ch / 2.0);
  return {y + half, -y, -y, y + half};
}

bool in_zone(const ReserveZone& z, std::size_t bus) {
  return std::find(z.bus_indices.begin(), z.bus_indices.end(), bus) != z.bus_indices.end();
}

std::vector<double> device_net(const Instance& inst, const SolutionStep& st, bool reactive) {
  std::vector<double> net(inst.buses.size(), 0.0);
  for (std::size_t j = 0; j < inst.devices.size(); ++j) {
    if (!st.devices[j].on) continue;
    const double v = reactive ? st.devices[j].q : st.devices[j].p;
    net[inst.devices[j].bus_index] += inst.devices[j].is_producer() ? v : -v;
  }
  return net;
}

std::vector<cplx> branch_end_power(const Instance& inst, const SolutionStep& st, std::size_t l) {
  const Branch& br = inst.branches[l];
  const BranchAdmittance a = admittance(br);
  const cplx vf = std::polar(st.buses[br.from_index].v, st.buses[br.from_index].theta);
  const cplx vt = std::polar(st.buses[br.to_index].v, st.buses[br.to_index].theta);
  return {vf * std::conj(a.yff * vf + a.yft * vt), vt * std::conj(a.ytf * vf + a.ytt * vt)};
}

struct Residuals {
  std::vector<double> p, q;
};

Residuals bus_residuals(const Instance& inst, const SolutionStep& st, std::size_t t) {
  const auto s = network_injections(inst, st, t);
  Residuals r{device_net(inst, st, false), device_net(inst, st, true)};
  for (std::size_t i = 0; i < inst.buses.size(); ++i) {
    r.p[i] -= s[i].real();
    r.q[i] -= s[i].imag();
  }
  return r;
}

double max_end_flow(const Instance& inst, const SolutionStep& st, std::size_t l) {
  const auto s = branch_end_power(inst, st, l);
  return std::max(std::abs(s[0]), std::abs(s[1]));
}

}  // namespace

std::size_t ViolationReport::count(const std::string& rule) const {
  return static_cast<std::size_t>(
      std::count_if(hard.begin(), hard.end(), [&](const HardViolation& v) { return v.rule == rule; }));
}

std::vector<cplx> network_injections(const Instance& inst, const SolutionStep& st, std::size_t t) {
  const std::size_t B = inst.buses.size();
  std::vector<cplx> v(B), out(B);
  for (std::size_t i = 0; i < B; ++i) v[i] = std::polar(st.buses[i].v, st.buses[i].theta);
  std::vector<cplx> diag(B, 0.0);
  for (const auto& sh : inst.shunts) diag[sh.bus_index] += cplx(sh.g_sh[t], sh.b_sh[t]);
  if (B <= kDenseLimit) {
    std::vector<cplx> y(B * B, 0.0);
    for (std::size_t i = 0; i < B; ++i) y[i * B + i] = diag[i];
    for (std::size_t l = 0; l < inst.branches.size(); ++l) {
      if (!st.branch_closed[l]) continue;
      const Branch& br = inst.branches[l];
      const BranchAdmittance a = admittance(br);
      const std::size_t f = br.from_index, to = br.to_index;
      y[f * B + f] += a.yff;
      y[f * B + to] += a.yft;
      y[to * B + f] += a.ytf;
      y[to * B + to] += a.ytt;
    }
    for (std::size_t i = 0; i < B; ++i) {
      cplx cur = 0.0;
      for (std::size_t k = 0; k < B; ++k) cur += y[i * B + k] * v[k];
      out[i] = v[i] * std::conj(cur);
    }
    return out;
  }
  std::vector<cplx> cur(B);
  for (std::size_t i = 0; i < B; ++i) cur[i] = diag[i] * v[i];
  for (std::size_t l = 0; l < inst.branches.size(); ++l) {
    if (!st.branch_closed[l]) continue;
    const Branch& br = inst.branches[l];
    const BranchAdmittance a = admittance(br);
    cur[br.from_index] += a.yff * v[br.from_index] + a.yft * v[br.to_index];
    cur[br.to_index] += a.ytf * v[br.from_index] + a.ytt * v[br.to_index];
  }
  for (std::size_t i = 0; i < B; ++i) out[i] = v[i] * std::conj(cur[i]);
  return out;
}

ScoreBreakdown market_surplus(const Solution& sol, const Instance& inst) {
  check_solution_shape(sol, inst);
  ScoreBreakdown z;
  const auto& dur = inst.time_grid.durations;
  const std::size_t T = inst.horizon();
  for (std::size_t j = 0; j < inst.devices.size(); ++j) {
    const Device& d = inst.devices[j];
    bool prev = d.initial.on;
    double last_off = d.initial.on ? 0.0 : -d.initial.duration;
    for (std::size_t t = 0; t < T; ++t) {
      const DeviceStep& s = sol.steps[t].devices[j];
      if (s.on) {
        const double value = dur[t] * merit_value(d.cost_blocks[t], s.p);
        if (d.is_producer())
          z.producer_cost += value;
        else
          z.consumer_benefit += value;
        z.on_cost += d.on_cost;
        if (!prev) z.startup_cost += category_cost(d, inst.time_grid.start_time(t) - last_off);
      } else if (prev) {
        z.shutdown_cost += d.shutdown_cost;
        last_off = inst.time_grid.start_time(t);
      }
      prev = s.on;
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    const SolutionStep& st = sol.steps[t];
    const Residuals r = bus_residuals(inst, st, t);
    for (std::size_t i = 0; i < inst.buses.size(); ++i)
      z.mismatch_penalty += inst.penalties.mismatch_penalty * dur[t] * (std::abs(r.p[i]) + std::abs(r.q[i]));
    for (std::size_t l = 0; l < inst.branches.size(); ++l)
      if (st.branch_closed[l])
        z.overload_penalty += inst.penalties.overload_penalty * dur[t] *
                              std::max(0.0, max_end_flow(inst, st, l) - inst.branches[l].s_max);
    for (const auto& zone : inst.zones) {
      double up = 0.0, down = 0.0;
      for (std::size_t j = 0; j < inst.devices.size(); ++j)
        if (in_zone(zone, inst.devices[j].bus_index)) {
          up += st.devices[j].reserve_up;
          down += st.devices[j].reserve_down;
        }
      const double gap = std::max(0.0, zone.req_up[t] - up) + std::max(0.0, zone.req_down[t] - down);
      z.reserve_shortfall_penalty += zone.shortfall_penalty * dur[t] * gap;
    }
  }
  z.recompute_total();
  return z;
}

ViolationReport feasibility_report(const Solution& sol, const Instance& inst, double tol) {
  check_solution_shape(sol, inst);
  ViolationReport rep;
  const auto& dur = inst.time_grid.durations;
  const std::size_t T = inst.horizon();
  auto hard = [&](const std::string& id, std::size_t t, const char* rule, double m) {
    rep.hard.push_back({id, t, rule, m});
  };
  auto range = [&](const std::string& id, std::size_t t, const char* rule, double x, double lo, double hi) {
    if (x < lo - tol)
      hard(id, t, rule, lo - x);
    else if (x > hi + tol)
      hard(id, t, rule, x - hi);
  };
  for (std::size_t j = 0; j < inst.devices.size(); ++j) {
    const Device& d = inst.devices[j];
    bool prev = d.initial.on;
    double p_prev = d.initial.on ? d.initial.p : 0.0;
    double in_status = d.initial.duration;
    int starts = 0;
    for (std::size_t t = 0; t < T; ++t) {
      const DeviceStep& s = sol.steps[t].devices[j];
      if (s.on) {
        range(d.id, t, "bounds", s.p, d.p_min[t], d.p_max[t]);
        range(d.id, t, "bounds", s.q, d.q_min[t], d.q_max[t]);
      } else {
        range(d.id, t, "bounds", s.p, 0.0, 0.0);
        range(d.id, t, "bounds", s.q, 0.0, 0.0);
      }
      const double head_up = s.on ? std::max(0.0, std::min(d.p_max[t] - s.p, d.ramp_up * dur[t])) : 0.0;
      const double head_down = s.on ? std::max(0.0, std::min(s.p - d.p_min[t], d.ramp_down * dur[t])) : 0.0;
      range(d.id, t, "reserve", s.reserve_up, 0.0, head_up);
      range(d.id, t, "reserve", s.reserve_down, 0.0, head_down);

      const bool starting = s.on && !prev, stopping = !s.on && prev;
      if (s.start != starting || s.stop != stopping) hard(d.id, t, "commitment", 1.0);
      if (starting && in_status < d.min_downtime - 1e-9) hard(d.id, t, "downtime", d.min_downtime - in_status);
      if (stopping && in_status < d.min_uptime - 1e-9) hard(d.id, t, "uptime", d.min_uptime - in_status);
      if (starting && ++starts > d.max_starts) hard(d.id, t, "max_starts", 1.0);

      const double p_now = s.on ? s.p : 0.0;
      const double rise = p_now - p_prev - (starting ? d.p_min[t] : 0.0);
      const double fall = p_prev - p_now - (stopping ? d.p_min[t == 0 ? 0 : t - 1] : 0.0);
      if (rise > d.ramp_up * dur[t] + tol) hard(d.id, t, "ramp", rise - d.ramp_up * dur[t]);
      if (fall > d.ramp_down * dur[t] + tol) hard(d.id, t, "ramp", fall - d.ramp_down * dur[t]);

      in_status = (starting || stopping) ? dur[t] : in_status + dur[t];
      prev = s.on;
      p_prev = p_now;
    }
    for (const auto& w : d.energy_windows) {
      double e = 0.0;
      for (std::size_t t = w.t_start; t <= w.t_end && t < T; ++t)
        if (sol.steps[t].devices[j].on) e += dur[t] * sol.steps[t].devices[j].p;
      range(d.id, w.t_end, "energy", e, w.e_min, w.e_max);
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    const SolutionStep& st = sol.steps[t];
    for (std::size_t i = 0; i < inst.buses.size(); ++i)
      range(inst.buses[i].id, t, "voltage", st.buses[i].v, inst.buses[i].v_min, inst.buses[i].v_max);
    for (std::size_t l = 0; l < inst.branches.size(); ++l) {
      const Branch& br = inst.branches[l];
      if (!br.switchable && st.branch_closed[l] != br.initial_closed) hard(br.id, t, "switching", 1.0);
      if (!st.branch_closed[l]) continue;
      const double over = max_end_flow(inst, st, l) - br.s_max;
      if (over > tol) rep.soft.push_back({br.id, t, "overload", over});
    }
    const Residuals r = bus_residuals(inst, st, t);
    for (std::size_t i = 0; i < inst.buses.size(); ++i) {
      if (std::abs(r.p[i]) > tol) rep.soft.push_back({inst.buses[i].id, t, "p_mismatch", std::abs(r.p[i])});
      if (std::abs(r.q[i]) > tol) rep.soft.push_back({inst.buses[i].id, t, "q_mismatch", std::abs(r.q[i])});
    }
    for (const auto& zone : inst.zones) {
      double up = 0.0, down = 0.0;
      for (std::size_t j = 0; j < inst.devices.size(); ++j)
        if (in_zone(zone, inst.devices[j].bus_index)) {
          up += st.devices[j].reserve_up;
          down += st.devices[j].reserve_down;
        }
      if (zone.req_up[t] - up > tol) rep.soft.push_back({zone.id, t, "reserve_up", zone.req_up[t] - up});
      if (zone.req_down[t] - down > tol) rep.soft.push_back({zone.id, t, "reserve_down", zone.req_down[t] - down});
    }
  }
  return rep;
}

std::size_t ContingencyReport::overload_count() const {
  std::size_t n = 0;
  for (const auto& o : outages) n += o.overloads.size();
  return n;
}

std::size_t ContingencyReport::unscreenable_count() const {
  return static_cast<std::size_t>(
      std::count_if(outages.begin(), outages.end(), [](const OutageResult& o) { return !o.screenable; }));
}

std::vector<std::size_t> all_single_outages(const Instance& inst) {
  std::vector<std::size_t> out(inst.branches.size());
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = l;
  return out;
}

ContingencyReport contingency_screen(const Solution& sol, const Instance& inst,
                                     const std::vector<std::size_t>& outages, bool parallel) {
  check_solution_shape(sol, inst);
  const std::size_t B = inst.buses.size(), L = inst.branches.size();
  for (std::size_t k : outages)
    if (k >= L) throw ContractError("outage index " + std::to_string(k) + " out of range");
  const std::size_t ref = inst.reference_bus();
  std::vector<long> reduced(B, -1);
  long n = 0;
  for (std::size_t i = 0; i < B; ++i)
    if (i != ref) reduced[i] = n++;
  ContingencyReport rep;
  for (std::size_t t = 0; t < inst.horizon(); ++t) {
    const SolutionStep& st = sol.steps[t];
    Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> base(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
      if (!st.branch_closed[l]) continue;
      const Branch& br = inst.branches[l];
      const double b = 1.0 / br.x;
      base[l] = b * (st.buses[br.from_index].theta - st.buses[br.to_index].theta);
      const long f = reduced[br.from_index], to = reduced[br.to_index];
      if (f >= 0) bmat(f, f) += b;
      if (to >= 0) bmat(to, to) += b;
      if (f >= 0 && to >= 0) {
        bmat(f, to) -= b;
        bmat(to, f) -= b;
      }
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(bmat);
    const bool connected = lu.isInvertible();
    std::vector<OutageResult> res(outages.size());
    const long m = static_cast<long>(outages.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long idx = 0; idx < m; ++idx) {
      const std::size_t k = outages[idx];
      OutageResult& o = res[idx];
      o.outage = k;
      o.t = t;
      o.flows.assign(L, 0.0);
      if (!st.branch_closed[k]) {
        for (std::size_t l = 0; l < L; ++l) o.flows[l] = base[l];
        continue;
      }
      const Branch& bk = inst.branches[k];
      if (!connected) {
        o.screenable = false;
        continue;
      }
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
      if (reduced[bk.from_index] >= 0) rhs(reduced[bk.from_index]) += 1.0;
      if (reduced[bk.to_index] >= 0) rhs(reduced[bk.to_index]) -= 1.0;
      const Eigen::VectorXd th = lu.solve(rhs);
      auto angle = [&](std::size_t bus) { return reduced[bus] >= 0 ? th(reduced[bus]) : 0.0; };
      auto ptdf = [&](std::size_t l) {
        const Branch& br = inst.branches[l];
        return (angle(br.from_index) - angle(br.to_index)) / br.x;
      };
      const double denom = 1.0 - ptdf(k);
      if (std::abs(denom) < kIslandTol) {
        o.screenable = false;
        continue;
      }
      for (std::size_t l = 0; l < L; ++l) {
        if (l == k || !st.branch_closed[l]) continue;
        o.flows[l] = base[l] + ptdf(l) / denom * base[k];
        if (std::abs(o.flows[l]) > inst.branches[l].s_max + 1e-9)
          o.overloads.push_back({l, o.flows[l], inst.branches[l].s_max});
      }
    }
    for (auto& o : res) rep.outages.push_back(std::move(o));
  }
  return rep;
}

double scaled_score(double score, double best) {
  if (!(best > 0.0)) throw ContractError("best score must be positive, got " + std::to_string(best));
  return score / best;
}

}  // namespace scopf
