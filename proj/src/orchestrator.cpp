#include "scopf/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <ostream>
#include <sstream>

#include "scopf/ac_model.hpp"
#include "scopf/error.hpp"
#include "scopf/instance_io.hpp"
#include "scopf/lp_solver.hpp"
#include "scopf/milp_solver.hpp"
#include "scopf/mps.hpp"
#include "scopf/nlp_solver.hpp"

namespace scopf {

namespace {

constexpr double kEps = 1e-9;
constexpr double kMinDcSeconds = 1.0;  // below this the DC phase is not attempted

double block_value(const std::vector<CostBlock>& blocks, double p) {
  double left = std::max(0.0, p), value = 0.0;
  for (const auto& b : blocks) {
    const double take = std::min(left, b.quantity_max);
    value += take * b.marginal_price;
    left -= take;
    if (left <= 0.0) break;
  }
  if (left > 0.0 && !blocks.empty()) value += left * blocks.back().marginal_price;
  return value;
}

double price_at(const std::vector<CostBlock>& blocks, double p) {
  double filled = 0.0;
  for (const auto& b : blocks) {
    filled += b.quantity_max;
    if (filled > p + 1e-12) return b.marginal_price;
  }
  return blocks.empty() ? 0.0 : blocks.back().marginal_price;
}

double startup_cost_for(const Device& d, double downtime) {
  if (d.startup_categories.empty()) return 0.0;
  for (const auto& c : d.startup_categories)
    if (downtime >= c.downtime_lo - kEps && downtime < c.downtime_hi) return c.cost;
  return d.startup_categories.back().cost;
}

void log_phase(std::ostream* log, std::size_t stage, const char* phase, double elapsed, double obj,
               const std::string& flag) {
  if (!log) return;
  *log << "stage=" << stage << " phase=" << phase << " elapsed_s=" << elapsed << " obj=" << obj
       << " flag=" << (flag.empty() ? "none" : flag) << "\n";
}

void fill_ids(Solution& s, const Instance& inst) {
  for (const auto& d : inst.devices) s.device_ids.push_back(d.id);
  for (const auto& b : inst.buses) s.bus_ids.push_back(b.id);
  for (const auto& b : inst.branches) s.branch_ids.push_back(b.id);
}

void add_flag(Solution& s, const std::string& flag) {
  if (!s.has_flag(flag)) s.flags.push_back(flag);
}

}  // namespace

TransitionLimits uniform_limits(double ramp_up, double ramp_down, const std::vector<double>& durations) {
  TransitionLimits l;
  for (double d : durations) {
    l.up.push_back(ramp_up * d);
    l.down.push_back(ramp_down * d);
  }
  return l;
}

BoundArrays propagate_bounds_stage1(BoundArrays b, const TransitionLimits& lim) {
  const std::size_t T = b.hi.size();
  if (b.lo.size() != T || (T > 0 && (lim.up.size() + 1 < T || lim.down.size() + 1 < T)))
    throw ContractError("bound arrays and transition limits disagree in length");
  for (std::size_t t = T; t-- > 1;) {
    b.hi[t - 1] = std::min(b.hi[t - 1], b.hi[t] + lim.down[t - 1]);
    b.lo[t - 1] = std::max(b.lo[t - 1], b.lo[t] - lim.up[t - 1]);
  }
  return b;
}

BoundArrays propagate_bounds_stage2(const BoundArrays& s1, const TransitionLimits& lim, const std::string& what) {
  BoundArrays out = s1;
  const std::size_t T = s1.hi.size();
  if (s1.lo.size() != T || (T > 0 && (lim.up.size() + 1 < T || lim.down.size() + 1 < T)))
    throw ContractError("bound arrays and transition limits disagree in length");
  for (std::size_t t = 1; t < T; ++t) {
    out.hi[t] = std::min(s1.hi[t], s1.hi[t - 1] + lim.up[t - 1]);
    out.lo[t] = std::max(s1.lo[t], s1.lo[t - 1] - lim.down[t - 1]);
  }
  for (std::size_t t = 0; t < T; ++t)
    if (out.lo[t] > out.hi[t] + 1e-9)
      throw SemanticError(what + ": empty ramp interval [" + std::to_string(out.lo[t]) + ", " +
                          std::to_string(out.hi[t]) + "] at position " + std::to_string(t));
  return out;
}

RampBounds ramp_bounds_for(const Instance& inst, const DcStageSpec& spec, const CommitmentSchedule& sched) {
  const auto& dur = inst.time_grid.durations;
  RampBounds out(inst.devices.size());
  for (std::size_t j = 0; j < inst.devices.size(); ++j) {
    const Device& d = inst.devices[j];
    const auto& bd = spec.boundary[j];
    BoundArrays b;
    TransitionLimits lim;
    b.lo.push_back(bd.on ? bd.p : 0.0);
    b.hi.push_back(bd.on ? bd.p : 0.0);
    for (std::size_t k = 0; k < spec.count; ++k) {
      const std::size_t t = spec.first + k;
      const CommitmentStep& s = sched.steps[j][k];
      double lo = d.p_min[t], hi = d.p_max[t];
      if (!spec.bound_overrides.empty() && !spec.bound_overrides[j].empty()) {
        lo = std::max(lo, spec.bound_overrides[j][k].first);
        hi = std::min(hi, spec.bound_overrides[j][k].second);
      }
      b.lo.push_back(s.on ? lo : 0.0);
      b.hi.push_back(s.on ? hi : 0.0);
      const double pmin_prev = d.p_min[t > 0 ? t - 1 : 0];
      lim.up.push_back(d.ramp_up * dur[t] + (s.start ? d.p_min[t] : 0.0));
      lim.down.push_back(d.ramp_down * dur[t] + (s.stop ? pmin_prev : 0.0));
    }
    const BoundArrays fin = propagate_bounds_stage2(propagate_bounds_stage1(b, lim), lim, "device " + d.id);
    for (std::size_t k = 0; k < spec.count; ++k) out[j].emplace_back(fin.lo[k + 1], std::max(fin.lo[k + 1], fin.hi[k + 1]));
  }
  return out;
}

StagePlan plan_stages(const TimeGrid& grid, int category, std::size_t bus_count, std::size_t window_length) {
  if (category < 1 || category > 3) throw ContractError("unknown category " + std::to_string(category));
  if (window_length == 0) throw ContractError("stage window length must be positive");
  const std::size_t T = grid.count();
  if (T == 0) throw ContractError("empty time grid");
  StagePlan plan;
  if (bus_count <= 2000 || T == 1) {
    plan.windows.push_back({0, T});
    return plan;
  }
  for (std::size_t first = 0; first < T; first += window_length)
    plan.windows.push_back({first, std::min(window_length, T - first)});
  return plan;
}

double default_margin(double total) { return std::min(60.0, 0.05 * total); }

TimeBudget allocate_time_budget(double total, double margin, double dc_fraction) {
  if (!(dc_fraction > 0.0 && dc_fraction < 1.0)) throw ContractError("dc fraction must lie in (0, 1)");
  const double usable = total - margin;
  if (!(usable > 0.0) || !std::isfinite(usable) || margin < 0.0)
    throw ContractError("no usable time budget: total " + std::to_string(total) + " s, margin " +
                        std::to_string(margin) + " s");
  TimeBudget b;
  b.total = total;
  b.reserve_margin = margin;
  b.dc = dc_fraction * usable;
  b.ac = usable - b.dc;
  return b;
}

TimeBudget allocate_time_budget(double total) { return allocate_time_budget(total, default_margin(total)); }

std::vector<std::size_t> restrict_commitment_pattern(Model& m, const DcVarMap& vars, const Instance& inst,
                                                     const DcStageSpec& spec, std::size_t j) {
  std::vector<std::size_t> rows;
  const std::size_t K = spec.count;
  if (K <= 1) return rows;
  const Device& d = inst.devices[j];
  const auto& dur = inst.time_grid.durations;
  const std::string tag = d.id + "_" + spec.name;
  LinExpr later;
  for (std::size_t k = 1; k < K; ++k) {
    later.add(vars.start[j][k], 1.0);
    later.add(vars.stop[j][k], 1.0);
  }
  rows.push_back(m.add_constraint(later, RowSense::le, 1.0, "sw_" + tag));
  double elapsed = 0.0;
  for (std::size_t k = 1; k < K; ++k) {
    elapsed += dur[spec.first + k - 1];
    const std::string kt = tag + "_" + std::to_string(k);
    if (elapsed < d.min_uptime - kEps)
      rows.push_back(m.add_constraint(LinExpr(vars.on[j][k]) - LinExpr(vars.start[j][0]), RowSense::ge, 0.0,
                                      "swu_" + kt));
    if (elapsed < d.min_downtime - kEps)
      rows.push_back(m.add_constraint(LinExpr(vars.on[j][k]) + LinExpr(vars.stop[j][0]), RowSense::le, 1.0,
                                      "swd_" + kt));
  }
  return rows;
}

void postprocess_reserves(Solution& sol, const Instance& inst) {
  const std::size_t T = inst.horizon(), D = inst.devices.size();
  for (std::size_t t = 0; t < T; ++t) {
    const double d_t = inst.time_grid.durations[t];
    std::vector<double> up(D, 0.0), down(D, 0.0);
    for (std::size_t j = 0; j < D; ++j) {
      auto& s = sol.steps[t].devices[j];
      s.reserve_up = s.reserve_down = 0.0;
      const Device& dev = inst.devices[j];
      if (!s.on || !dev.is_producer()) continue;
      up[j] = std::max(0.0, std::min(dev.p_max[t] - s.p, dev.ramp_up * d_t));
      down[j] = std::max(0.0, std::min(s.p - dev.p_min[t], dev.ramp_down * d_t));
    }
    for (const auto& z : inst.zones) {
      std::vector<std::size_t> members;
      for (std::size_t j = 0; j < D; ++j)
        if (std::find(z.bus_indices.begin(), z.bus_indices.end(), inst.devices[j].bus_index) != z.bus_indices.end())
          members.push_back(j);
      std::vector<double> price(D, 0.0);
      for (std::size_t j : members) price[j] = price_at(inst.devices[j].cost_blocks[t], sol.steps[t].devices[j].p);
      std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) { return price[a] < price[b]; });
      double need_up = z.req_up[t], need_down = z.req_down[t];
      for (std::size_t j : members) {
        auto& s = sol.steps[t].devices[j];
        const double a = std::min(need_up, up[j]);
        s.reserve_up += a;
        up[j] -= a;
        need_up -= a;
        const double b = std::min(need_down, down[j]);
        s.reserve_down += b;
        down[j] -= b;
        need_down -= b;
      }
    }
  }
}

ScoreBreakdown pipeline_objective(const Solution& sol, const Instance& inst) {
  ScoreBreakdown sb;
  const std::size_t T = inst.horizon(), B = inst.buses.size();
  const auto& dur = inst.time_grid.durations;
  const double c_p = inst.penalties.mismatch_penalty, c_s = inst.penalties.overload_penalty;
  for (std::size_t j = 0; j < inst.devices.size(); ++j) {
    const Device& dev = inst.devices[j];
    bool on = dev.initial.on;
    double off_since = dev.initial.on ? 0.0 : -dev.initial.duration;
    for (std::size_t t = 0; t < T; ++t) {
      const auto& s = sol.steps[t].devices[j];
      const double now = inst.time_grid.start_time(t);
      if (s.on) {
        const double v = dur[t] * block_value(dev.cost_blocks[t], s.p);
        (dev.is_producer() ? sb.producer_cost : sb.consumer_benefit) += v;
        sb.on_cost += dev.on_cost;
      }
      if (s.on && !on) sb.startup_cost += startup_cost_for(dev, now - off_since);
      if (!s.on && on) {
        sb.shutdown_cost += dev.shutdown_cost;
        off_since = now;
      }
      on = s.on;
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    const auto& st = sol.steps[t];
    std::vector<double> P(B, 0.0), Q(B, 0.0);
    for (std::size_t j = 0; j < inst.devices.size(); ++j) {
      const Device& dev = inst.devices[j];
      const double sign = dev.is_producer() ? 1.0 : -1.0;
      if (!st.devices[j].on) continue;
      P[dev.bus_index] += sign * st.devices[j].p;
      Q[dev.bus_index] += sign * st.devices[j].q;
    }
    for (const auto& sh : inst.shunts) {
      const double v2 = st.buses[sh.bus_index].v * st.buses[sh.bus_index].v;
      P[sh.bus_index] -= sh.g_sh[t] * v2;
      Q[sh.bus_index] += sh.b_sh[t] * v2;
    }
    for (std::size_t l = 0; l < inst.branches.size(); ++l) {
      if (!st.branch_closed[l]) continue;
      const Branch& br = inst.branches[l];
      const auto& f = st.buses[br.from_index];
      const auto& to = st.buses[br.to_index];
      const BranchLocal bl = branch_local(br, f.v, to.v, f.theta, to.theta);
      P[br.from_index] -= bl.value[0];
      Q[br.from_index] -= bl.value[1];
      P[br.to_index] -= bl.value[2];
      Q[br.to_index] -= bl.value[3];
      const double s = std::max(std::hypot(bl.value[0], bl.value[1]), std::hypot(bl.value[2], bl.value[3]));
      sb.overload_penalty += dur[t] * c_s * std::max(0.0, s - br.s_max);
    }
    for (std::size_t i = 0; i < B; ++i) sb.mismatch_penalty += dur[t] * c_p * (std::abs(P[i]) + std::abs(Q[i]));
    for (const auto& z : inst.zones) {
      double up = 0.0, down = 0.0;
      for (std::size_t j = 0; j < inst.devices.size(); ++j)
        if (std::find(z.bus_indices.begin(), z.bus_indices.end(), inst.devices[j].bus_index) != z.bus_indices.end()) {
          up += st.devices[j].reserve_up;
          down += st.devices[j].reserve_down;
        }
      sb.reserve_shortfall_penalty +=
          dur[t] * z.shortfall_penalty * (std::max(0.0, z.req_up[t] - up) + std::max(0.0, z.req_down[t] - down));
    }
  }
  sb.recompute_total();
  return sb;
}

std::vector<std::string> ramp_violations(const Solution& sol, const Instance& inst, double tol) {
  std::vector<std::string> out;
  const auto& dur = inst.time_grid.durations;
  for (std::size_t j = 0; j < inst.devices.size(); ++j) {
    const Device& d = inst.devices[j];
    bool on = d.initial.on;
    double p = d.initial.on ? d.initial.p : 0.0;
    for (std::size_t t = 0; t < sol.steps.size(); ++t) {
      const auto& s = sol.steps[t].devices[j];
      const double start = s.on && !on ? d.p_min[t] : 0.0;
      const double stop = !s.on && on ? d.p_min[t > 0 ? t - 1 : 0] : 0.0;
      if (s.p - p - start > d.ramp_up * dur[t] + tol || p - s.p - stop > d.ramp_down * dur[t] + tol)
        out.push_back(d.id + "@" + std::to_string(t));
      on = s.on;
      p = s.on ? s.p : 0.0;
    }
  }
  return out;
}

namespace {

// Least-energy ramp-feasible profile meeting the device's energy windows under
// a fixed commitment. Empty when no such profile exists.
std::optional<std::vector<double>> energy_profile(const Instance& inst, const DcStageSpec& spec,
                                                  const CommitmentSchedule& sched, std::size_t j) {
  const Device& d = inst.devices[j];
  const auto& dur = inst.time_grid.durations;
  const std::size_t T = spec.count;
  Model m("fallback_energy");
  std::vector<VarRef> p;
  for (std::size_t t = 0; t < T; ++t) {
    const bool on = sched.steps[j][t].on;
    p.push_back(m.add_variable("p" + std::to_string(t), on ? d.p_min[t] : 0.0, on ? d.p_max[t] : 0.0));
  }
  const double p0 = spec.boundary[j].on ? spec.boundary[j].p : 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const CommitmentStep& s = sched.steps[j][t];
    const double up = d.ramp_up * dur[t] + (s.start ? d.p_min[t] : 0.0);
    const double down = d.ramp_down * dur[t] + (s.stop ? d.p_min[t > 0 ? t - 1 : 0] : 0.0);
    LinExpr step(p[t]);
    const double base = t > 0 ? 0.0 : p0;
    if (t > 0) step.add(p[t - 1], -1.0);
    if (std::isfinite(up)) m.add_constraint(step, RowSense::le, base + up);
    if (std::isfinite(down)) m.add_constraint(step, RowSense::ge, base - down);
  }
  LinExpr energy;
  for (const auto& w : d.energy_windows) {
    LinExpr e;
    for (std::size_t t = w.t_start; t <= w.t_end && t < T; ++t) e.add(p[t], dur[t]);
    if (std::isfinite(w.e_min)) m.add_constraint(e, RowSense::ge, w.e_min);
    if (std::isfinite(w.e_max)) m.add_constraint(e, RowSense::le, w.e_max);
  }
  for (std::size_t t = 0; t < T; ++t) energy.add(p[t], dur[t]);
  m.add_objective(energy);
  m.set_objective_sense(ObjSense::minimize);
  m.freeze();
  SolveOptions o;
  o.time_limit = 1.0;
  const LpResult r = solve_lp(m, o);
  if (r.status != LpStatus::optimal) return std::nullopt;
  std::vector<double> out(T);
  for (std::size_t t = 0; t < T; ++t) out[t] = std::clamp(r.x[p[t].index], m.variable(p[t]).lo, m.variable(p[t]).hi);
  return out;
}

}  // namespace

Solution fallback_solution(const Instance& inst) {
  Solution sol;
  fill_ids(sol, inst);
  const std::size_t T = inst.horizon();
  const DcStageSpec spec = initial_stage_spec(inst, 0, T);
  CommitmentSchedule sched = minimal_commitment(inst, spec);
  std::vector<double> prev(inst.devices.size());
  for (std::size_t j = 0; j < inst.devices.size(); ++j) prev[j] = spec.boundary[j].p;
  for (std::size_t t = 0; t < T; ++t) {
    SolutionStep st;
    for (std::size_t j = 0; j < inst.devices.size(); ++j) {
      const Device& d = inst.devices[j];
      const CommitmentStep& c = sched.steps[j][t];
      DeviceStep ds;
      ds.on = c.on;
      ds.start = c.start;
      ds.stop = c.stop;
      if (c.on) {
        ds.p = std::min(d.p_max[t], std::max(d.p_min[t], prev[j] - d.ramp_down * inst.time_grid.durations[t]));
        ds.q = std::clamp(0.0, d.q_min[t], d.q_max[t]);
      }
      prev[j] = ds.p;
      st.devices.push_back(ds);
    }
    for (std::size_t i = 0; i < inst.buses.size(); ++i)
      st.buses.push_back({std::clamp(1.0, inst.buses[i].v_min, inst.buses[i].v_max), 0.0});
    for (const auto& b : inst.branches) st.branch_closed.push_back(b.initial_closed);
    sol.steps.push_back(std::move(st));
  }
  for (std::size_t j = 0; j < inst.devices.size(); ++j) {
    const Device& d = inst.devices[j];
    if (d.energy_windows.empty()) continue;
    auto prof = energy_profile(inst, spec, sched, j);
    if (!prof && d.initial.on) {
      for (auto& c : sched.steps[j]) c = {true, false, false};
      prof = energy_profile(inst, spec, sched, j);
    }
    if (!prof) continue;
    for (std::size_t t = 0; t < T; ++t) {
      DeviceStep& ds = sol.steps[t].devices[j];
      const CommitmentStep& c = sched.steps[j][t];
      ds.on = c.on;
      ds.start = c.start;
      ds.stop = c.stop;
      ds.p = (*prof)[t];
      ds.q = c.on ? std::clamp(0.0, d.q_min[t], d.q_max[t]) : 0.0;
    }
  }
  sol.flags.push_back("fallback");
  sol.objective = pipeline_objective(sol, inst);
  return sol;
}

PipelineResult run_pipeline(const Instance& inst, const PipelineOptions& opt) {
  const Deadline overall(opt.time_limit);
  PipelineResult res;
  const double margin = opt.reserve_margin < 0.0 ? default_margin(opt.time_limit) : opt.reserve_margin;
  res.budget = allocate_time_budget(opt.time_limit, margin, opt.dc_fraction);
  auto finish_fallback = [&](const std::string& why) {
    res.solution = fallback_solution(inst);
    add_flag(res.solution, why);
    res.fallback = true;
    res.total_seconds = overall.elapsed();
    log_phase(opt.log, 0, "dc", overall.elapsed(), res.solution.objective.total, "fallback");
    return res;
  };
  if (res.budget.dc < kMinDcSeconds) return finish_fallback("budget_below_minimum");

  const std::size_t T = inst.horizon(), D = inst.devices.size();
  const bool force = opt.force_windows && T > 1;
  const StagePlan plan =
      plan_stages(inst.time_grid, opt.category, force ? static_cast<std::size_t>(-1) : inst.buses.size(),
                  opt.window_length);
  const std::set<std::size_t> opened = line_switching_heuristic(inst, opt.switch_threshold);
  const auto& dur = inst.time_grid.durations;

  Solution& sol = res.solution;
  fill_ids(sol, inst);
  sol.steps.resize(T);
  std::vector<DeviceBoundary> boundary = initial_stage_spec(inst, 0, T).boundary;

  for (std::size_t s = 0; s < plan.windows.size(); ++s) {
    const StageWindow& w = plan.windows[s];
    DcStageSpec spec;
    spec.first = w.first;
    spec.count = w.count;
    spec.boundary = boundary;
    spec.name = "s" + std::to_string(s);

    // DC phase.
    const double dc_start = overall.elapsed();
    const double dc_share = res.budget.dc * static_cast<double>(w.first + w.count) / static_cast<double>(T) - res.dc_seconds;
    const Deadline dc_deadline = overall.sub(std::max(0.0, dc_share));
    DcModel dc = build_dc_model(inst, spec, opened);
    if (plan.sequential())
      for (std::size_t j = 0; j < D; ++j) restrict_commitment_pattern(dc.model, dc.vars, inst, spec, j);
    bool started = false;
    try {
      started = set_dc_start(dc.model, dc.vars, inst, spec, 0.25 * dc_deadline.remaining());
    } catch (const SemanticError&) {
      started = false;
    }
    dc.model.freeze();
    if (!opt.export_mps_dir.empty()) {
      std::filesystem::create_directories(opt.export_mps_dir);
      write_file((std::filesystem::path(opt.export_mps_dir) / (spec.name + ".mps")).string(), export_mps(dc.model));
    }
    MilpResult mr;
    if (dc_deadline.remaining() > 0.0) {
      SolveOptions mo;
      mo.time_limit = dc_deadline.remaining();
      mo.worker_count = std::max(1, opt.workers);
      mr = solve_milp(dc.model, mo);
    }
    res.dc_seconds += overall.elapsed() - dc_start;
    if (!mr.has_solution()) return finish_fallback(started ? "dc_no_incumbent" : "dc_no_start");
    const CommitmentSchedule sched = extract_commitment(mr.x, dc.vars, inst, spec);
    std::string dc_flag = mr.status == MilpStatus::optimal ? "" : "dc_time_limit";
    if (!dc_flag.empty()) add_flag(sol, dc_flag);
    log_phase(opt.log, s, "dc", overall.elapsed(), mr.objective, dc_flag);

    // Bounds for the sequential AC solves.
    RampBounds rb;
    std::string ac_flag;
    try {
      rb = ramp_bounds_for(inst, spec, sched);
    } catch (const SemanticError&) {
      ac_flag = "ramp_repair";
      add_flag(sol, ac_flag);
    }
    if (!rb.empty())
      for (std::size_t j = 0; j < D; ++j)
        for (const auto& ew : inst.devices[j].energy_windows)
          for (std::size_t k = 0; k < w.count; ++k) {
            const std::size_t t = w.first + k;
            if (t < ew.t_start || t > ew.t_end || !sched.steps[j][k].on) continue;
            const double p_dc = mr.x[dc.vars.p[j][k].index];
            if (ew.e_min > 0.0) rb[j][k].first = std::max(rb[j][k].first, std::min(p_dc, rb[j][k].second));
            if (std::isfinite(ew.e_max)) rb[j][k].second = std::min(rb[j][k].second, std::max(p_dc, rb[j][k].first));
          }

    // AC phase.
    const double ac_start = overall.elapsed();
    std::vector<bool> prior_on(D);
    std::vector<double> prior_p(D);
    for (std::size_t j = 0; j < D; ++j) {
      prior_on[j] = boundary[j].on;
      prior_p[j] = boundary[j].p;
    }
    double ac_obj = 0.0;
    std::vector<double> prev_x;
    for (std::size_t k = 0; k < w.count; ++k) {
      const std::size_t t = w.first + k;
      AcStageInput in;
      in.t = t;
      in.prior_on = prior_on;
      in.prior_p = prior_p;
      in.opened = opened;
      for (std::size_t j = 0; j < D; ++j) in.on.push_back(sched.steps[j][k].on);
      if (!rb.empty())
        for (std::size_t j = 0; j < D; ++j) in.ramp_bounds.push_back(rb[j][k]);
      std::unique_ptr<AcStage> stage;
      try {
        stage = std::make_unique<AcStage>(inst, in, opt.workers > 1);
      } catch (const ContractError&) {
        in.ramp_bounds.clear();
        add_flag(sol, "ramp_repair");
        ac_flag = "ramp_repair";
        stage = std::make_unique<AcStage>(inst, in, opt.workers > 1);
      }
      std::vector<double> x0 = stage->warm_start();
      if (!prev_x.empty())
        for (std::size_t i = 0; i < 2 * inst.buses.size(); ++i)
          x0[i] = std::clamp(prev_x[i], stage->lower()[i], stage->upper()[i]);
      const double ac_share = res.budget.ac * static_cast<double>(t + 1) / static_cast<double>(T) -
                              (res.ac_seconds + overall.elapsed() - ac_start);
      SolveOptions no;
      no.time_limit = std::max(1e-3, std::min(ac_share, overall.remaining() - margin));
      const NlpResult r = solve_nlp(*stage, no, x0);
      if (r.status != NlpStatus::converged) {
        ac_flag = "ac_" + std::string(to_string(r.status)) + "_t" + std::to_string(t);
        add_flag(sol, ac_flag);
      }
      ac_obj += r.objective;
      sol.steps[t] = stage->extract(r.x);
      prev_x = r.x;
      for (std::size_t j = 0; j < D; ++j) {
        if (sol.steps[t].devices[j].on != sched.steps[j][k].on)
          throw ContractError("ac stage changed the commitment of device " + inst.devices[j].id);
        prior_on[j] = sol.steps[t].devices[j].on;
        prior_p[j] = sol.steps[t].devices[j].p;
      }
    }
    res.ac_seconds += overall.elapsed() - ac_start;
    log_phase(opt.log, s, "ac", overall.elapsed(), ac_obj, ac_flag);

    // Carry the AC end state into the next stage.
    for (std::size_t j = 0; j < D; ++j) {
      DeviceBoundary& b = boundary[j];
      for (std::size_t k = 0; k < w.count; ++k) {
        const std::size_t t = w.first + k;
        const bool on = sol.steps[t].devices[j].on;
        if (on != b.on) {
          b.on = on;
          b.duration = 0.0;
        }
        b.duration += dur[t];
        if (sched.steps[j][k].start) ++b.starts_used;
      }
      b.p = b.on ? sol.steps[w.first + w.count - 1].devices[j].p : 0.0;
    }
  }

  if (!ramp_violations(sol, inst).empty()) add_flag(sol, "ramp_violation");
  postprocess_reserves(sol, inst);
  sol.objective = pipeline_objective(sol, inst);
  log_phase(opt.log, plan.windows.size() - 1, "reserve", overall.elapsed(), sol.objective.total, "");
  res.total_seconds = overall.elapsed();
  return res;
}

}  // namespace scopf
