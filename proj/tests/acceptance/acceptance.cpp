#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles/ac_fd.hpp"
#include "oracles/dc_resolve.hpp"
#include "oracles/formulation_oracles.hpp"
#include "oracles/random_models.hpp"
#include "oracles/trajectory_oracle.hpp"
#include "scopf/ac_model.hpp"
#include "scopf/dc_model.hpp"
#include "scopf/error.hpp"
#include "scopf/evaluator.hpp"
#include "scopf/generator.hpp"
#include "scopf/instance_io.hpp"
#include "scopf/lp_solver.hpp"
#include "scopf/milp_solver.hpp"
#include "scopf/mps.hpp"
#include "scopf/nlp_solver.hpp"
#include "scopf/orchestrator.hpp"
#include "scopf/transforms.hpp"

using namespace scopf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string data_path(const std::string& name) { return std::string(SCOPF_DATA_DIR) + "/" + name; }

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("scopf_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct CliRun {
  int exit_code = -1;
  double wall_seconds = 0.0;
  std::map<std::string, std::string> values;
};

CliRun run_solve(const std::string& instance, double budget, const fs::path& out) {
  std::ostringstream cmd;
  cmd << '"' << SCOPF_CLI_PATH << "\" solve --instance \"" << instance << "\" --category 1 --time-limit " << budget
      << " --out \"" << out.string() << "\" --quiet 2>/dev/null";
  CliRun r;
  const auto t0 = Clock::now();
  FILE* pipe = ::popen(cmd.str().c_str(), "r");
  if (!pipe) throw Error("cannot start the command line tool");
  std::string text;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) text += buf;
  const int status = ::pclose(pipe);
  r.wall_seconds = seconds_since(t0);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) r.values[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return r;
}

double value_of(const CliRun& r, const std::string& key) {
  const auto it = r.values.find(key);
  if (it == r.values.end()) throw Error("missing output key " + key);
  return std::stod(it->second);
}

Outcome reformulation_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto pr = oracle::random_onoff_problem(rng, 6);
    Model m = oracle::build_bounds_form(pr);
    SolveOptions o;
    o.mip_gap = 1e-9;
    const auto r = solve_milp(m, o);
    if (r.status != MilpStatus::optimal) return {false, "instance " + std::to_string(k) + " not solved to optimality"};
    worst = std::max(worst, std::abs(r.objective - oracle::bilinear_form_optimum(pr)));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 60.0, "max |gap| " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome relaxation_validity() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 3), t(0, 1);
  const double xl = u(rng), xh = xl + 0.5 + 3 * t(rng), yl = u(rng), yh = yl + 0.5 + 3 * t(rng);
  Model mc, sq;
  {
    auto w = mc.add_variable("w", -100, 100);
    auto x = mc.add_variable("x", xl, xh);
    auto y = mc.add_variable("y", yl, yh);
    mccormick_bilinear(mc, w, x, y, {xl, xh, yl, yh});
    auto s = sq.add_variable("s", -100, 100);
    auto z = sq.add_variable("x", xl, xh);
    envelope_square(sq, s, z, xl, xh);
  }
  double worst_mc = 0.0, worst_sq = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double xv = xl + (xh - xl) * t(rng), yv = yl + (yh - yl) * t(rng);
    worst_mc = std::max(worst_mc, mc.max_violation(std::vector<double>{xv * yv, xv, yv}));
    worst_sq = std::max(worst_sq, sq.max_violation(std::vector<double>{xv * xv, xv}));
  }

  double worst_soc = 0.0, worst_gap = 0.0;
  int lifted = 0;
  std::mt19937_64 prng(8);
  for (int k = 0; k < 20; ++k) {
    const auto pr = oracle::random_soc_problem(prng);
    Model relaxed = oracle::build_relaxed_soc(pr);
    for (int n = 0; n < 500; ++n) {
      const double xv = pr.lo[0] + (pr.hi[0] - pr.lo[0]) * t(prng);
      const double yv = pr.lo[1] + (pr.hi[1] - pr.lo[1]) * t(prng);
      const double zv = pr.lo[2] + (pr.hi[2] - pr.lo[2]) * t(prng);
      if (std::abs(pr.A * xv + pr.B * yv) > pr.C * zv + pr.D) continue;
      ++lifted;
      worst_soc = std::max(worst_soc, relaxed.max_violation(std::vector<double>{xv, yv, zv, xv * xv, yv * yv, zv * zv,
                                                                                 xv * yv}));
    }
    const auto lp = solve_lp(relaxed, SolveOptions{});
    if (lp.status != LpStatus::optimal) return {false, "relaxation " + std::to_string(k) + " not optimal"};
    worst_gap = std::max(worst_gap, oracle::soc_grid_optimum(pr, 31) - lp.objective);
  }
  const bool ok = worst_mc <= 1e-12 && worst_sq <= 1e-12 && worst_soc <= 1e-9 && worst_gap <= 1e-9;
  return {ok, "envelope violations " + fmt(worst_mc) + "/" + fmt(worst_sq) + ", lifted " + std::to_string(lifted) +
                  " points max " + fmt(worst_soc) + ", grid minus relaxed " + fmt(worst_gap)};
}

Outcome balance_tightness() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Instance inst = generate_instance({.buses = 3 + seed % 4, .intervals = 2, .seed = seed, .zones = false});
    for (auto& br : inst.branches) br.s_max = 50.0;
    if (inst.penalties.mismatch_penalty <= inst.max_block_price())
      return {false, "seed " + std::to_string(seed) + " violates the penalty dominance bound"};
    DcStageSpec spec = initial_stage_spec(inst, 0, 2);
    DcModel dc = build_dc_model(inst, spec, {});
    if (!set_dc_start(dc.model, dc.vars, inst, spec)) return {false, "no start for seed " + std::to_string(seed)};
    dc.model.freeze();
    SolveOptions o;
    o.time_limit = 30;
    o.mip_gap = 1e-9;
    const auto r = solve_milp(dc.model, o);
    if (!r.has_solution()) return {false, "no solution for seed " + std::to_string(seed)};
    const auto& vm = dc.vars;
    for (std::size_t i = 0; i < inst.buses.size(); ++i)
      for (std::size_t k = 0; k < 2; ++k) {
        double net = 0.0;
        for (std::size_t j = 0; j < inst.devices.size(); ++j)
          if (inst.devices[j].bus_index == i)
            net += (inst.devices[j].is_producer() ? 1.0 : -1.0) * r.x[vm.p[j][k].index];
        for (const auto& sh : inst.shunts)
          if (sh.bus_index == i) net -= sh.g_sh[k] * r.x[vm.vsq[i][k].index];
        for (std::size_t l = 0; l < inst.branches.size(); ++l) {
          if (inst.branches[l].from_index == i) net -= r.x[vm.flow[l][k].index];
          if (inst.branches[l].to_index == i) net += r.x[vm.flow[l][k].index];
        }
        worst = std::max({worst, std::abs(net), r.x[vm.mismatch_pos[i][k].index], r.x[vm.mismatch_neg[i][k].index]});
      }
  }
  return {worst <= 1e-6, "max imbalance or mismatch " + fmt(worst)};
}

Outcome ramp_recurrences() {
  const auto lim = uniform_limits(2, 2, {1.0, 1.0});
  const BoundArrays out = propagate_bounds_stage2(propagate_bounds_stage1({{10, 3, 10}, {0, 0, 0}}, lim), lim);
  const bool hand = out.hi == std::vector<double>{5, 3, 5} && out.lo == std::vector<double>{0, 0, 0};
  std::mt19937_64 rng(1234);
  const auto r = oracle::check_propagation(rng, 1000);
  std::string detail = std::string("hand example ") + (hand ? "exact" : "wrong") + ", " + std::to_string(r.cases) +
                       " cases, " + std::to_string(r.failures.size()) + " oracle failures";
  if (!r.failures.empty()) detail += " (first: " + r.failures.front() + ")";
  return {hand && r.failures.empty() && r.cases == 1000, detail};
}

Outcome derivative_consistency() {
  const auto t0 = Clock::now();
  const Instance inst = case14_instance(8);
  std::mt19937 rng(21);
  std::normal_distribution<double> N;
  double g = 0.0, j = 0.0, h = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    AcStage ac(inst, oracle::initial_input(inst, trial % 8));
    const auto x = oracle::random_point(ac, rng);
    std::vector<double> lambda(ac.num_constraints());
    for (auto& l : lambda) l = N(rng);
    g = std::max(g, oracle::gradient_error(ac, x));
    j = std::max(j, oracle::jacobian_error(ac, x));
    h = std::max(h, oracle::hessian_error(ac, x, lambda));
  }
  const double secs = seconds_since(t0);
  return {g <= 1e-6 && j <= 1e-6 && h <= 1e-5 && secs < 30.0,
          "gradient " + fmt(g) + ", jacobian " + fmt(j) + ", hessian " + fmt(h) + ", " + fmt(secs) + " s"};
}

Outcome ac_fidelity() {
  Instance inst = fixtures::two_bus(1, 0.5, 1.0);
  for (auto& b : inst.buses) b.v_min = b.v_max = 1.0;
  AcStage ac(inst, oracle::initial_input(inst));
  SolveOptions opt;
  opt.time_limit = 30.0;
  const auto x0 = ac.warm_start();
  const auto r = solve_nlp(ac, opt, x0);
  if (r.status != NlpStatus::converged) return {false, "nonlinear solve did not converge"};
  const double delta = r.x[ac.theta_index(0)] - r.x[ac.theta_index(1)];
  std::vector<double> c(ac.num_constraints());
  ac.eval_constraints(r.x, c);
  double res = 0.0;
  for (double v : c) res = std::max(res, std::abs(v));
  const double err = std::abs(delta - std::asin(0.5));
  return {res <= 1e-6 && err <= 1e-6, "angle " + fmt(delta) + " rad, error " + fmt(err) + ", residual " + fmt(res)};
}

Outcome end_to_end() {
  const std::string path = data_path("case14_t8.json");
  const fs::path out = scratch_dir() / "case14_solution.json";
  const double budget = 600.0;
  const CliRun run = run_solve(path, budget, out);
  if (run.exit_code != 0) return {false, "solve exited with " + std::to_string(run.exit_code)};
  const Instance inst = load_instance(path);
  const Solution sol = read_solution(read_file(out.string()));
  check_solution_shape(sol, inst);
  const ViolationReport rep = feasibility_report(sol, inst);
  const double total = market_surplus(sol, inst).total;
  const double gap = std::abs(total - sol.objective.total);
  const double dc = value_of(run, "dc_seconds");
  const double dc_cap = (budget - default_margin(budget)) / 3.0 * 1.05;
  const auto ramps = ramp_violations(sol, inst);
  const bool ok = rep.hard.empty() && gap <= 1e-4 && dc <= dc_cap && ramps.empty();
  return {ok, std::to_string(rep.hard.size()) + " hard violations, |evaluator - pipeline| " + fmt(gap) + ", dc " +
                  fmt(dc) + " s of " + fmt(dc_cap) + ", " + std::to_string(ramps.size()) + " ramp violations"};
}

Outcome sequential_vs_single() {
  const Instance inst = load_instance(data_path("five_bus_t8.json"));
  PipelineOptions o;
  o.time_limit = 120.0;
  const PipelineResult single = run_pipeline(inst, o);
  o.force_windows = true;
  const PipelineResult seq = run_pipeline(inst, o);
  if (single.fallback || seq.fallback) return {false, "a run fell back"};
  const double a = seq.solution.objective.total, b = single.solution.objective.total;
  const double rel = std::abs(a - b) / std::max(1.0, std::abs(b));
  return {rel <= 0.05, "sequential " + fmt(a) + ", single " + fmt(b) + ", relative " + fmt(rel)};
}

Outcome time_limits() {
  const std::string path = data_path("case14_t8.json");
  const Instance inst = load_instance(path);
  bool ok = true;
  std::string detail;
  for (double budget : {10.0, 60.0, 600.0}) {
    const CliRun run = run_solve(path, budget, scratch_dir() / "budget_solution.json");
    const double reported = value_of(run, "total_seconds");
    const bool within = run.wall_seconds <= 1.05 * budget && reported <= 1.05 * budget && run.exit_code != 1 &&
                        run.exit_code != 2;
    ok = ok && within;
    detail += fmt(budget) + " s budget: " + fmt(run.wall_seconds) + " s wall; ";
  }
  const fs::path out = scratch_dir() / "fallback_solution.json";
  const CliRun tiny = run_solve(path, 1.0, out);
  bool schema_ok = false, flagged = false;
  try {
    const Solution s = read_solution(read_file(out.string()));
    check_solution_shape(s, inst);
    schema_ok = true;
    flagged = s.has_flag("fallback");
  } catch (const Error&) {
  }
  ok = ok && tiny.exit_code == 3 && schema_ok && flagged;
  detail += "1 s budget: exit " + std::to_string(tiny.exit_code) + (schema_ok ? ", valid" : ", invalid") +
            (flagged ? " flagged" : " unflagged") + " fallback";
  return {ok, detail};
}

Outcome mps_round_trip() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  int solved = 0;
  for (int k = 0; k < 20; ++k) {
    Model m = oracle::random_mps_model(rng);
    const std::string text = export_mps(m);
    Model back = import_mps(text);
    const auto a = solve_milp(m, SolveOptions{});
    const auto b = solve_milp(back, SolveOptions{});
    if (a.status != b.status) return {false, "status differs on model " + std::to_string(k)};
    if (!a.has_solution()) continue;
    ++solved;
    worst = std::max(worst, std::abs(a.objective - b.objective) / std::max(1.0, std::abs(a.objective)));
  }
  return {worst <= 1e-6, "20 models, " + std::to_string(solved) + " with solutions, max relative gap " + fmt(worst)};
}

Outcome reserve_postprocessing() {
  Instance inst = fixtures::reserve_instance(2);
  inst.devices[0].cost_blocks[0] = {{10.0, 1.0}};
  inst.devices[1].cost_blocks[0] = {{10.0, 2.0}};
  inst.zones[0].req_up = {5.0};
  Solution s = fixtures::blank_solution(inst);
  s.steps[0].devices[0] = {6.0, 0.0, true};
  s.steps[0].devices[1] = {7.0, 0.0, true};
  postprocess_reserves(s, inst);
  const double r0 = s.steps[0].devices[0].reserve_up, r1 = s.steps[0].devices[1].reserve_up;
  const double shortfall = pipeline_objective(s, inst).reserve_shortfall_penalty;
  const bool hand = std::abs(r0 - 4.0) <= 1e-9 && std::abs(r1 - 1.0) <= 1e-9 && std::abs(shortfall) <= 1e-9;

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double excess = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 4;
    Instance ri = fixtures::reserve_instance(n, 2);
    for (std::size_t j = 0; j < n; ++j) {
      Device& d = ri.devices[j];
      d.p_min.assign(2, 2.0 * u(rng));
      d.ramp_up = 1.0 + 5.0 * u(rng);
      d.ramp_down = 1.0 + 5.0 * u(rng);
      for (auto& b : d.cost_blocks) b = {{10.0, std::floor(10.0 * u(rng))}};
    }
    ri.zones[0].req_up = {15.0 * u(rng), 15.0 * u(rng)};
    ri.zones[0].req_down = {10.0 * u(rng), 10.0 * u(rng)};
    Solution rs = fixtures::blank_solution(ri);
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t j = 0; j < n; ++j) {
        auto& ds = rs.steps[t].devices[j];
        ds.on = u(rng) < 0.8;
        ds.p = ds.on ? ri.devices[j].p_min[t] + (10.0 - ri.devices[j].p_min[t]) * u(rng) : 0.0;
      }
    postprocess_reserves(rs, ri);
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t j = 0; j < n; ++j) {
        const auto& d = ri.devices[j];
        const auto& ds = rs.steps[t].devices[j];
        const double hu = ds.on ? std::min(d.p_max[t] - ds.p, d.ramp_up) : 0.0;
        const double hd = ds.on ? std::min(ds.p - d.p_min[t], d.ramp_down) : 0.0;
        excess = std::max({excess, ds.reserve_up - hu, ds.reserve_down - hd, -ds.reserve_up, -ds.reserve_down});
      }
  }
  return {hand && excess <= 1e-12, "example (" + fmt(r0) + ", " + fmt(r1) + ") shortfall " + fmt(shortfall) +
                                       ", max excess over headroom " + fmt(excess)};
}

Outcome contingency_screening() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> v(0.95, 1.05), th(-0.3, 0.3);
  std::size_t checked = 0, mismatched = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    GeneratorOptions g;
    g.buses = 3 + seed % 8;
    g.intervals = 1;
    g.seed = seed;
    g.parallel_fraction = 0.3;
    const Instance inst = generate_instance(g);
    Solution s = fixtures::blank_solution(inst);
    for (const auto& d : inst.devices) s.device_ids.push_back(d.id);
    for (const auto& b : inst.buses) s.bus_ids.push_back(b.id);
    for (std::size_t l = 0; l < inst.branches.size(); ++l) {
      s.branch_ids.push_back(inst.branches[l].id);
      s.steps[0].branch_closed[l] = inst.branches[l].initial_closed;
    }
    for (std::size_t i = 0; i < inst.buses.size(); ++i)
      s.steps[0].buses[i] = {v(rng), i == inst.reference_bus() ? 0.0 : th(rng)};
    const ContingencyReport rep = contingency_screen(s, inst, all_single_outages(inst));
    for (const auto& o : rep.outages) {
      if (!s.steps[0].branch_closed[o.outage]) continue;
      const auto direct = oracle::resolve_outage(inst, s.steps[0], o.outage);
      if (o.screenable != direct.has_value()) ++mismatched;
      if (!direct || !o.screenable) continue;
      ++checked;
      for (std::size_t l = 0; l < inst.branches.size(); ++l) worst = std::max(worst, std::abs(o.flows[l] - (*direct)[l]));
    }
  }
  return {worst <= 1e-9 && mismatched == 0 && checked > 0,
          std::to_string(checked) + " connected outages, max flow error " + fmt(worst) + ", " +
              std::to_string(mismatched) + " islanding disagreements"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"reformulation equivalence", reformulation_equivalence},
      {"relaxation validity", relaxation_validity},
      {"balance tightness", balance_tightness},
      {"ramp bound recurrences", ramp_recurrences},
      {"derivative consistency", derivative_consistency},
      {"ac two-bus fidelity", ac_fidelity},
      {"end-to-end 14-bus solve", end_to_end},
      {"sequential vs single window", sequential_vs_single},
      {"time-limit compliance", time_limits},
      {"mps round trip", mps_round_trip},
      {"reserve post-processing", reserve_postprocessing},
      {"contingency screening", contingency_screening},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << " " << criteria[k].first << ": " << o.detail
              << std::endl;
  }
  std::error_code ec;
  fs::remove_all(scratch_dir(), ec);
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
