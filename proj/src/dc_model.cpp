#include "scopf/dc_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "scopf/error.hpp"
#include "scopf/lp_solver.hpp"
#include "scopf/transforms.hpp"

namespace scopf {

namespace {

constexpr double kEps = 1e-9;
constexpr std::size_t kSplitThreshold = 100;
constexpr std::size_t kSplitChunk = 50;

std::string tag(const std::string& id, std::size_t t) { return id + "_t" + std::to_string(t); }

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

std::size_t components(const Instance& inst, const std::set<std::size_t>& opened) {
  UnionFind uf(inst.buses.size());
  for (std::size_t k = 0; k < inst.branches.size(); ++k) {
    const Branch& b = inst.branches[k];
    if (b.initial_closed && !opened.count(k)) uf.unite(b.from_index, b.to_index);
  }
  std::set<std::size_t> roots;
  for (std::size_t i = 0; i < inst.buses.size(); ++i) roots.insert(uf.find(i));
  return roots.size();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Effective on-state bounds of device j at global interval t.
std::pair<double, double> on_bounds(const Device& d, const DcStageSpec& spec, std::size_t j, std::size_t t) {
  double lo = d.p_min[t], hi = d.p_max[t];
  if (!spec.bound_overrides.empty() && !spec.bound_overrides[j].empty()) {
    const auto& [olo, ohi] = spec.bound_overrides[j][t - spec.first];
    lo = std::max(lo, olo);
    hi = std::min(hi, ohi);
  }
  return {lo, hi};
}

void check_spec(const Instance& inst, const DcStageSpec& spec) {
  if (spec.count == 0 || spec.end() > inst.horizon())
    throw ContractError("dc stage window [" + std::to_string(spec.first) + ", " + std::to_string(spec.end()) +
                        ") lies outside the time grid");
  if (spec.boundary.size() != inst.devices.size())
    throw ContractError("dc stage boundary does not cover every device");
  if (!spec.bound_overrides.empty()) {
    if (spec.bound_overrides.size() != inst.devices.size())
      throw ContractError("dc stage bound overrides do not cover every device");
    for (const auto& o : spec.bound_overrides)
      if (!o.empty() && o.size() != spec.count) throw ContractError("dc stage bound overrides do not match the window");
  }
  if (spec.first == 0)
    for (std::size_t j = 0; j < inst.devices.size(); ++j) {
      const auto& b = spec.boundary[j];
      const auto& init = inst.devices[j].initial;
      if (b.on != init.on || std::abs(b.duration - init.duration) > kEps || std::abs(b.p - init.p) > kEps ||
          b.starts_used != 0)
        throw ContractError("dc stage boundary of " + inst.devices[j].id + " differs from the initial state");
    }
}

void check_boundary_ramp(const Instance& inst, const DcStageSpec& spec) {
  const std::size_t t = spec.first;
  const double d = inst.time_grid.durations[t];
  for (std::size_t j = 0; j < inst.devices.size(); ++j) {
    const Device& dev = inst.devices[j];
    const DeviceBoundary& b = spec.boundary[j];
    if (!b.on) continue;
    const auto [lo, hi] = on_bounds(dev, spec, j, t);
    const bool stay = std::max(lo, b.p - dev.ramp_down * d) <= std::min(hi, b.p + dev.ramp_up * d) + 1e-7;
    const double pmin_prev = dev.p_min[t > 0 ? t - 1 : 0];
    const bool stop = b.duration >= dev.min_uptime - kEps && b.p <= dev.ramp_down * d + pmin_prev + 1e-7;
    if (!stay && !stop)
      throw SemanticError("device " + dev.id + ": boundary power " + std::to_string(b.p) +
                          " cannot be ramped to any legal state in interval " + std::to_string(t));
  }
}

}  // namespace

std::vector<VarRef> DcVarMap::all() const {
  std::vector<VarRef> out;
  auto add2 = [&](const std::vector<std::vector<VarRef>>& a) {
    for (const auto& r : a) out.insert(out.end(), r.begin(), r.end());
  };
  auto add3 = [&](const std::vector<std::vector<std::vector<VarRef>>>& a) {
    for (const auto& r : a) add2(r);
  };
  add2(p);
  add2(on);
  add2(start);
  add2(stop);
  add3(blocks);
  add2(theta);
  add2(v);
  add2(vsq);
  add2(flow);
  add2(overload);
  add2(mismatch_pos);
  add2(mismatch_neg);
  add2(energy_short);
  // Single-category startups reuse the start indicator, so they are not listed separately.
  for (const auto& dev : startup)
    for (const auto& t : dev)
      if (t.size() > 1) out.insert(out.end(), t.begin(), t.end());
  return out;
}

DcStageSpec initial_stage_spec(const Instance& inst, std::size_t first, std::size_t count) {
  DcStageSpec s;
  s.first = first;
  s.count = count;
  for (const auto& d : inst.devices) s.boundary.push_back({d.initial.on, d.initial.duration, d.initial.on ? d.initial.p : 0.0, 0});
  return s;
}

std::set<std::size_t> line_switching_heuristic(const Instance& inst, double rho) {
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < inst.branches.size(); ++k) {
    const Branch& b = inst.branches[k];
    if (!b.initial_closed || b.from_index == b.to_index) continue;
    groups[{std::min(b.from_index, b.to_index), std::max(b.from_index, b.to_index)}].push_back(k);
  }
  std::set<std::size_t> opened;
  const std::size_t base_components = components(inst, opened);
  for (const auto& [key, members] : groups) {
    if (members.size() < 2) continue;
    std::vector<double> xs;
    for (std::size_t k : members) xs.push_back(std::abs(inst.branches[k].x));
    const double med = median(xs);
    if (med <= 0.0) continue;
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t k : members) order.emplace_back(std::abs(std::abs(inst.branches[k].x) - med) / med, k);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::size_t closed = members.size();
    for (const auto& [dev, k] : order) {
      if (dev <= rho || closed <= 1) break;
      if (!inst.branches[k].switchable) continue;
      opened.insert(k);
      if (components(inst, opened) > base_components) {
        opened.erase(k);
        continue;
      }
      --closed;
    }
  }
  return opened;
}

DcModel build_dc_model(const Instance& inst, const DcStageSpec& spec, const std::set<std::size_t>& opened) {
  check_spec(inst, spec);
  check_boundary_ramp(inst, spec);
  const std::size_t W = spec.count, B = inst.buses.size(), D = inst.devices.size(), L = inst.branches.size();
  const auto& dur = inst.time_grid.durations;
  const double c_p = inst.penalties.mismatch_penalty, c_s = inst.penalties.overload_penalty;

  DcModel out{Model(inst.header.name + "_" + spec.name), {}};
  Model& m = out.model;
  DcVarMap& vm = out.vars;
  m.set_objective_sense(ObjSense::maximize);

  std::vector<double> start_times(W);
  for (std::size_t k = 0; k < W; ++k) start_times[k] = inst.time_grid.start_time(spec.first + k);

  // Capacity scale bounding flows, overloads and mismatches.
  std::vector<double> cap(W, 1.0);
  for (std::size_t k = 0; k < W; ++k) {
    const std::size_t t = spec.first + k;
    for (const auto& d : inst.devices) cap[k] += std::abs(d.p_max[t]);
    for (const auto& s : inst.shunts) cap[k] += std::abs(s.g_sh[t]) * inst.buses[s.bus_index].v_max * inst.buses[s.bus_index].v_max;
  }

  // Buses.
  const std::size_t ref = inst.reference_bus();
  vm.theta.resize(B);
  vm.v.resize(B);
  vm.vsq.resize(B);
  for (std::size_t i = 0; i < B; ++i) {
    const Bus& bus = inst.buses[i];
    for (std::size_t k = 0; k < W; ++k) {
      const std::size_t t = spec.first + k;
      const double th = i == ref ? 0.0 : kInf;
      vm.theta[i].push_back(m.add_variable("th_" + tag(bus.id, t), -th, th));
      VarRef v = m.add_variable("v_" + tag(bus.id, t), bus.v_min, bus.v_max);
      VarRef w = m.add_variable("vsq_" + tag(bus.id, t), bus.v_min * bus.v_min, bus.v_max * bus.v_max);
      envelope_square(m, w, v, bus.v_min, bus.v_max);
      vm.v[i].push_back(v);
      vm.vsq[i].push_back(w);
    }
  }
  std::vector<std::vector<LinExpr>> withdrawal(B, std::vector<LinExpr>(W));

  // Devices.
  vm.p.resize(D);
  vm.on.resize(D);
  vm.start.resize(D);
  vm.stop.resize(D);
  vm.blocks.resize(D);
  vm.startup.resize(D);
  vm.energy_short.resize(D);
  for (std::size_t j = 0; j < D; ++j) {
    const Device& dev = inst.devices[j];
    const DeviceBoundary& bd = spec.boundary[j];
    const double sgn = dev.is_producer() ? -1.0 : 1.0;  // objective sign of block value
    for (std::size_t k = 0; k < W; ++k) {
      const std::size_t t = spec.first + k;
      const std::string tg = tag(dev.id, t);
      const auto [lo, hi] = on_bounds(dev, spec, j, t);
      if (lo > hi + 1e-9)
        throw SemanticError("device " + dev.id + ": empty power interval [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "] in interval " + std::to_string(t));
      VarRef p = m.add_variable("p_" + tg, 0.0, std::max({0.0, lo, hi}));
      VarRef u = m.add_variable("u_" + tg, 0.0, 1.0, Integrality::binary);
      VarRef su = m.add_variable("st_" + tg, 0.0, 1.0, Integrality::binary);
      VarRef sd = m.add_variable("sd_" + tg, 0.0, 1.0, Integrality::binary);
      onoff_to_bounds(m, p, u, std::max(0.0, lo), std::max({0.0, lo, hi}));
      vm.p[j].push_back(p);
      vm.on[j].push_back(u);
      vm.start[j].push_back(su);
      vm.stop[j].push_back(sd);

      LinExpr split(p, 1.0);
      std::vector<VarRef> blocks;
      for (std::size_t b = 0; b < dev.cost_blocks[t].size(); ++b) {
        const CostBlock& cb = dev.cost_blocks[t][b];
        VarRef pb = m.add_variable("pb" + std::to_string(b) + "_" + tg, 0.0, cb.quantity_max);
        split.add(pb, -1.0);
        m.add_objective(LinExpr(pb, sgn * cb.marginal_price * dur[t]));
        blocks.push_back(pb);
      }
      m.add_constraint(split, RowSense::eq, 0.0, "blk_" + tg);
      vm.blocks[j].push_back(blocks);

      LinExpr trans = LinExpr(u) - LinExpr(su) + LinExpr(sd);
      if (k > 0) trans.add(vm.on[j][k - 1], -1.0);
      m.add_constraint(trans, RowSense::eq, k > 0 ? 0.0 : (bd.on ? 1.0 : 0.0), "tr_" + tg);
      m.add_constraint(LinExpr(su) + LinExpr(sd), RowSense::le, 1.0, "ss_" + tg);
      if (dev.on_cost != 0.0) m.add_objective(LinExpr(u, -dev.on_cost));
      if (dev.shutdown_cost != 0.0) m.add_objective(LinExpr(sd, -dev.shutdown_cost));

      // Ramping with start/stop allowances of p_min.
      const double pmin_prev = dev.p_min[t > 0 ? t - 1 : 0];
      if (std::isfinite(dev.ramp_up)) {
        LinExpr up = LinExpr(p) - LinExpr(su, dev.p_min[t]);
        if (k > 0) up.add(vm.p[j][k - 1], -1.0);
        m.add_constraint(up, RowSense::le, dev.ramp_up * dur[t] + (k > 0 ? 0.0 : bd.p), "ru_" + tg);
      }
      if (std::isfinite(dev.ramp_down)) {
        LinExpr down = LinExpr(p, -1.0) - LinExpr(sd, pmin_prev);
        if (k > 0) down.add(vm.p[j][k - 1], 1.0);
        m.add_constraint(down, RowSense::le, dev.ramp_down * dur[t] - (k > 0 ? 0.0 : bd.p), "rd_" + tg);
      }

      // Minimum up and down time windows.
      if (dev.min_uptime > 0.0) {
        LinExpr row(u, -1.0);
        for (std::size_t s = 0; s <= k; ++s)
          if (start_times[k] - start_times[s] < dev.min_uptime - kEps) row.add(vm.start[j][s], 1.0);
        if (row.size() > 1) m.add_constraint(row, RowSense::le, 0.0, "ut_" + tg);
        if (bd.on && start_times[k] - start_times[0] < dev.min_uptime - bd.duration - kEps) m.set_bounds(u, 1.0, 1.0);
      }
      if (dev.min_downtime > 0.0) {
        LinExpr row(u, 1.0);
        for (std::size_t s = 0; s <= k; ++s)
          if (start_times[k] - start_times[s] < dev.min_downtime - kEps) row.add(vm.stop[j][s], 1.0);
        if (row.size() > 1) m.add_constraint(row, RowSense::le, 1.0, "dt_" + tg);
        if (!bd.on && start_times[k] - start_times[0] < dev.min_downtime - bd.duration - kEps)
          m.set_bounds(u, 0.0, 0.0);
      }

      LinExpr& wd = withdrawal[dev.bus_index][k];
      wd.add(p, dev.is_producer() ? -1.0 : 1.0);
    }

    if (dev.max_starts != std::numeric_limits<int>::max()) {
      LinExpr starts;
      for (VarRef s : vm.start[j]) starts.add(s, 1.0);
      m.add_constraint(starts, RowSense::le, std::max(0, dev.max_starts - bd.starts_used), "ms_" + dev.id);
    }

    for (std::size_t e = 0; e < dev.energy_windows.size(); ++e) {
      const EnergyWindow& ew = dev.energy_windows[e];
      const std::size_t a = std::max(ew.t_start, spec.first), b = std::min(ew.t_end + 1, spec.end());
      if (a >= b) continue;
      LinExpr energy;
      for (std::size_t t = a; t < b; ++t) energy.add(vm.p[j][t - spec.first], dur[t]);
      const std::string en = "en" + std::to_string(e) + "_" + dev.id;
      if (std::isfinite(ew.e_max)) m.add_constraint(energy, RowSense::le, ew.e_max, en + "_max");
      if (ew.e_min > 0.0 && ew.t_start >= spec.first && ew.t_end < spec.end()) {
        VarRef sh = m.add_variable(en + "_short", 0.0, ew.e_min);
        m.add_objective(LinExpr(sh, -c_p));
        m.add_constraint(energy + LinExpr(sh), RowSense::ge, ew.e_min, en + "_min");
        vm.energy_short[j].push_back(sh);
      }
    }

    if (!dev.startup_categories.empty()) {
      std::optional<double> off_since;
      if (!bd.on) off_since = start_times[0] - bd.duration;
      auto cl = clique_startup(m, dev.startup_categories, dev.min_downtime, start_times, off_since, vm.stop[j],
                               vm.start[j], "su_" + dev.id);
      vm.startup[j] = cl.delta;
    }
  }

  // Shunts through the v² surrogate.
  for (const auto& sh : inst.shunts)
    for (std::size_t k = 0; k < W; ++k) {
      const double g = sh.g_sh[spec.first + k];
      if (g != 0.0) withdrawal[sh.bus_index][k].add(vm.vsq[sh.bus_index][k], g);
    }

  // Branches.
  vm.flow.resize(L);
  vm.overload.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const Branch& br = inst.branches[l];
    const bool closed = br.initial_closed && !opened.count(l);
    for (std::size_t k = 0; k < W; ++k) {
      const std::size_t t = spec.first + k;
      const std::string tg = tag(br.id, t);
      const double F = closed ? br.s_max + 2.0 * cap[k] : 0.0;
      VarRef f = m.add_variable("f_" + tg, -F, F);
      VarRef z = m.add_variable("ov_" + tg, 0.0, closed ? 2.0 * cap[k] : 0.0);
      vm.flow[l].push_back(f);
      vm.overload[l].push_back(z);
      if (!closed) continue;
      m.add_constraint(LinExpr(f, br.x) - LinExpr(vm.theta[br.from_index][k]) + LinExpr(vm.theta[br.to_index][k]),
                       RowSense::eq, 0.0, "pf_" + tg);
      m.add_constraint(LinExpr(f) - LinExpr(z), RowSense::le, br.s_max, "fl+_" + tg);
      m.add_constraint(LinExpr(f, -1.0) - LinExpr(z), RowSense::le, br.s_max, "fl-_" + tg);
      relax_quadratic_row(m, soc_to_quadratic(1.0, 0.0, 1.0, br.s_max, f, f, z));
      m.add_objective(LinExpr(z, -c_s * dur[t]));
      withdrawal[br.from_index][k].add(f, 1.0);
      withdrawal[br.to_index][k].add(f, -1.0);
    }
  }

  // Bus balance with signed penalized mismatch.
  vm.mismatch_pos.resize(B);
  vm.mismatch_neg.resize(B);
  vm.balance_rows.resize(B);
  for (std::size_t i = 0; i < B; ++i)
    for (std::size_t k = 0; k < W; ++k) {
      const std::size_t t = spec.first + k;
      const std::string tg = tag(inst.buses[i].id, t);
      LinExpr e = withdrawal[i][k];
      e.normalize();
      if (e.size() > kSplitThreshold) {
        auto sp = split_long_expression(m, e, kSplitChunk, "bal_" + tg);
        e = LinExpr(*sp.value);
      }
      const std::size_t row = m.add_constraint(e, RowSense::eq, 0.0, "bal_" + tg);
      auto slack = add_penalized_slack(m, row, c_p * dur[t]);
      // Row reads e - pos + neg = 0, so pos is a net withdrawal the network did not supply.
      vm.mismatch_pos[i].push_back(slack.slack);
      vm.mismatch_neg[i].push_back(*slack.lower);
      m.set_bounds(slack.slack, 0.0, 2.0 * cap[k] * (1.0 + B));
      m.set_bounds(*slack.lower, 0.0, 2.0 * cap[k] * (1.0 + B));
      vm.balance_rows[i].push_back(row);
    }
  return out;
}

void check_commitment(const Instance& inst, const DcStageSpec& spec, const CommitmentSchedule& sched) {
  if (sched.steps.size() != inst.devices.size()) throw SemanticError("commitment schedule does not cover every device");
  const auto& dur = inst.time_grid.durations;
  for (std::size_t j = 0; j < inst.devices.size(); ++j) {
    const Device& dev = inst.devices[j];
    if (sched.steps[j].size() != spec.count) throw SemanticError("commitment schedule of " + dev.id + " has wrong length");
    bool prev = spec.boundary[j].on;
    double in_status = spec.boundary[j].duration;
    int starts = spec.boundary[j].starts_used;
    for (std::size_t k = 0; k < spec.count; ++k) {
      const CommitmentStep& s = sched.steps[j][k];
      const std::size_t t = spec.first + k;
      const bool start = s.on && !prev, stop = !s.on && prev;
      if (s.start != start || s.stop != stop)
        throw SemanticError("device " + dev.id + ": start/stop flags inconsistent with status at interval " +
                            std::to_string(t));
      if (start && in_status < dev.min_downtime - kEps)
        throw SemanticError("device " + dev.id + ": minimum downtime violated at interval " + std::to_string(t));
      if (stop && in_status < dev.min_uptime - kEps)
        throw SemanticError("device " + dev.id + ": minimum uptime violated at interval " + std::to_string(t));
      if (start || stop) in_status = 0.0;
      in_status += dur[t];
      starts += start ? 1 : 0;
      prev = s.on;
    }
    if (starts > dev.max_starts) throw SemanticError("device " + dev.id + ": start limit exceeded");
  }
}

CommitmentSchedule extract_commitment(std::span<const double> x, const DcVarMap& vm, const Instance& inst,
                                      const DcStageSpec& spec) {
  auto bit = [&](VarRef r) {
    if (r.index >= x.size()) throw ContractError("extract_commitment: solution vector too short");
    const double v = x[r.index], b = std::round(v);
    if (std::abs(v - b) > 1e-6 || (b != 0.0 && b != 1.0))
      throw ContractError("extract_commitment: fractional binary value " + std::to_string(v));
    return b == 1.0;
  };
  CommitmentSchedule s;
  s.first = spec.first;
  s.steps.resize(inst.devices.size());
  for (std::size_t j = 0; j < inst.devices.size(); ++j)
    for (std::size_t k = 0; k < spec.count; ++k) {
      CommitmentStep st{bit(vm.on[j][k]), bit(vm.start[j][k]), bit(vm.stop[j][k]), -1};
      if (st.start && !vm.startup[j].empty())
        for (std::size_t c = 0; c < vm.startup[j][k].size(); ++c)
          if (bit(vm.startup[j][k][c])) st.category = static_cast<int>(c);
      s.steps[j].push_back(st);
    }
  check_commitment(inst, spec, s);
  return s;
}

CommitmentSchedule hold_commitment(const Instance& inst, const DcStageSpec& spec) {
  CommitmentSchedule s;
  s.first = spec.first;
  for (std::size_t j = 0; j < inst.devices.size(); ++j)
    s.steps.emplace_back(spec.count, CommitmentStep{spec.boundary[j].on, false, false, -1});
  return s;
}

CommitmentSchedule minimal_commitment(const Instance& inst, const DcStageSpec& spec) {
  CommitmentSchedule s;
  s.first = spec.first;
  const auto& dur = inst.time_grid.durations;
  for (std::size_t j = 0; j < inst.devices.size(); ++j) {
    const Device& dev = inst.devices[j];
    bool on = spec.boundary[j].on;
    double in_status = spec.boundary[j].duration, p = spec.boundary[j].p;
    std::vector<CommitmentStep> steps;
    for (std::size_t k = 0; k < spec.count; ++k) {
      const std::size_t t = spec.first + k;
      CommitmentStep st{on, false, false, -1};
      if (on) {
        const double pmin_prev = dev.p_min[t > 0 ? t - 1 : 0];
        const bool can_stop = in_status >= dev.min_uptime - kEps && p <= dev.ramp_down * dur[t] + pmin_prev + 1e-9;
        if (can_stop) {
          st = {false, false, true, -1};
          on = false;
          in_status = 0.0;
          p = 0.0;
        } else {
          const auto [lo, hi] = on_bounds(dev, spec, j, t);
          p = std::clamp(p - dev.ramp_down * dur[t], lo, std::max(lo, hi));
        }
      }
      in_status += dur[t];
      steps.push_back(st);
    }
    s.steps.push_back(std::move(steps));
  }
  return s;
}

std::optional<std::vector<double>> dc_point_for(const Model& model, const DcVarMap& vm,
                                                const CommitmentSchedule& sched, double time_limit) {
  SimplexSolver lp(model);
  std::vector<std::pair<std::size_t, double>> fixes;
  for (std::size_t j = 0; j < sched.steps.size(); ++j)
    for (std::size_t k = 0; k < sched.steps[j].size(); ++k) {
      const CommitmentStep& st = sched.steps[j][k];
      fixes.emplace_back(vm.on[j][k].index, st.on);
      fixes.emplace_back(vm.start[j][k].index, st.start);
      fixes.emplace_back(vm.stop[j][k].index, st.stop);
      if (!vm.startup[j].empty() && vm.startup[j][k].size() > 1) {
        const auto& cats = vm.startup[j][k];
        for (std::size_t c = 0; c < cats.size(); ++c)
          fixes.emplace_back(cats[c].index, st.start && c + 1 == cats.size() ? 1.0 : 0.0);
      }
    }
  for (const auto& [col, v] : fixes) {
    const Variable& var = model.variable(col);
    if (v < var.lo || v > var.hi) return std::nullopt;
    lp.set_column_bounds(col, v, v);
  }
  SolveOptions o;
  o.time_limit = time_limit;
  auto r = lp.solve(o, Deadline(time_limit));
  if (r.status != LpStatus::optimal) return std::nullopt;
  for (const auto& [col, v] : fixes) r.x[col] = v;
  if (model.max_violation(r.x, true) > 1e-6) return std::nullopt;
  return r.x;
}

bool set_dc_start(Model& model, const DcVarMap& vm, const Instance& inst, const DcStageSpec& spec,
                  double time_limit) {
  std::optional<std::vector<double>> best;
  double best_value = -kInf;
  for (const auto& sched : {minimal_commitment(inst, spec), hold_commitment(inst, spec)}) {
    auto x = dc_point_for(model, vm, sched, time_limit / 2);
    if (!x) continue;
    const double v = model.objective_value(*x);
    if (!best || v > best_value) {
      best = std::move(x);
      best_value = v;
    }
  }
  if (!best) return false;
  model.set_start(std::move(*best));
  return true;
}

}  // namespace scopf
