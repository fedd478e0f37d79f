#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "scopf/error.hpp"
#include "scopf/evaluator.hpp"
#include "scopf/generator.hpp"
#include "scopf/instance_io.hpp"
#include "scopf/orchestrator.hpp"

using namespace scopf;

namespace {

constexpr int kOk = 0, kInvalid = 2, kFallback = 3, kHard = 4;

double category_limit(int category) {
  switch (category) {
    case 1: return 600.0;
    case 2: return 7200.0;
    case 3: return 10800.0;
  }
  throw ContractError("category must be 1, 2 or 3");
}

void print_score(std::ostream& os, const ScoreBreakdown& z) {
  os << std::setprecision(12);
  os << "consumer_benefit=" << z.consumer_benefit << "\n"
     << "producer_cost=" << z.producer_cost << "\n"
     << "startup_cost=" << z.startup_cost << "\n"
     << "on_cost=" << z.on_cost << "\n"
     << "shutdown_cost=" << z.shutdown_cost << "\n"
     << "mismatch_penalty=" << z.mismatch_penalty << "\n"
     << "overload_penalty=" << z.overload_penalty << "\n"
     << "reserve_shortfall_penalty=" << z.reserve_shortfall_penalty << "\n"
     << "total=" << z.total << "\n";
}

void print_report(std::ostream& os, const ViolationReport& rep) {
  os << "hard_violations=" << rep.hard.size() << "\n";
  for (const auto& v : rep.hard)
    os << "hard entity=" << v.entity << " t=" << v.t << " rule=" << v.rule << " magnitude=" << v.magnitude << "\n";
  os << "soft_quantities=" << rep.soft.size() << "\n";
  for (const auto& s : rep.soft)
    os << "soft entity=" << s.entity << " t=" << s.t << " kind=" << s.kind << " magnitude=" << s.magnitude << "\n";
}

std::vector<std::size_t> outage_list(const Instance& inst, const std::string& spec) {
  if (spec == "all") return all_single_outages(inst);
  if (spec == "none") return {};
  std::istringstream in(read_file(spec));
  std::vector<std::size_t> out;
  std::string id;
  while (in >> id) {
    std::size_t l = 0;
    while (l < inst.branches.size() && inst.branches[l].id != id) ++l;
    if (l == inst.branches.size()) throw SemanticError("contingency list names unknown branch " + id);
    out.push_back(l);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unit commitment and AC dispatch pipeline"};
  app.require_subcommand(1);

  std::string instance_path, out_path, mps_dir, solution_path, contingencies = "none";
  int category = 1, workers = 1;
  double time_limit = -1.0, dc_fraction = 1.0 / 3.0, switch_threshold = 0.5, best = 0.0;
  std::size_t stage_len = 4, buses = 14, intervals = 8;
  std::uint64_t seed = 1;
  bool case14 = false, quiet = false;

  auto* solve = app.add_subcommand("solve", "Run the DC and AC pipeline on an instance");
  solve->add_option("--instance", instance_path, "Instance file")->required();
  solve->add_option("--category", category, "Problem category")->required()->check(CLI::Range(1, 3));
  solve->add_option("--time-limit", time_limit, "Wall-clock budget in seconds (default: category limit)");
  solve->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  solve->add_option("--dc-fraction", dc_fraction, "Share of the usable budget for the DC phase");
  solve->add_option("--stage-len", stage_len, "Stage window length in intervals")->check(CLI::PositiveNumber);
  solve->add_option("--switch-threshold", switch_threshold, "Relative reactance deviation for line opening");
  solve->add_option("--export-mps", mps_dir, "Directory for stage MILP exports");
  solve->add_option("--out", out_path, "Solution file")->required();
  solve->add_flag("--quiet", quiet, "Suppress the progress log");

  auto* score = app.add_subcommand("score", "Score a solution and check its feasibility");
  score->add_option("--instance", instance_path, "Instance file")->required();
  score->add_option("--solution", solution_path, "Solution file")->required();
  score->add_option("--best", best, "Best known score for the scaled score");
  score->add_option("--contingencies", contingencies, "all, none or a file of branch ids");

  auto* gen = app.add_subcommand("gen", "Write a synthetic instance");
  gen->add_option("--buses", buses, "Bus count")->check(CLI::Range(2, 100000));
  gen->add_option("--intervals", intervals, "Interval count")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "Random seed");
  gen->add_flag("--case14", case14, "Write the bundled 14-bus network instead");
  gen->add_option("--out", out_path, "Instance file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      GeneratorOptions g;
      g.buses = buses;
      g.intervals = intervals;
      g.seed = seed;
      const Instance inst = case14 ? case14_instance(intervals) : generate_instance(g);
      write_file(out_path, write_instance(inst));
      return kOk;
    }

    const Instance inst = load_instance(instance_path);

    if (*solve) {
      const double limit = category_limit(category);
      if (time_limit < 0.0) time_limit = limit;
      if (time_limit > limit)
        throw ContractError("time limit " + std::to_string(time_limit) + " s exceeds the category limit");
      PipelineOptions o;
      o.category = category;
      o.time_limit = time_limit;
      o.dc_fraction = dc_fraction;
      o.window_length = stage_len;
      o.switch_threshold = switch_threshold;
      o.workers = workers;
      o.export_mps_dir = mps_dir;
      o.log = quiet ? nullptr : &std::cerr;
      const PipelineResult r = run_pipeline(inst, o);
      write_file(out_path, write_solution(r.solution, inst));
      const ViolationReport rep = feasibility_report(r.solution, inst);
      std::cout << "dc_seconds=" << r.dc_seconds << "\nac_seconds=" << r.ac_seconds
                << "\ntotal_seconds=" << r.total_seconds << "\n";
      print_score(std::cout, market_surplus(r.solution, inst));
      std::cout << "hard_violations=" << rep.hard.size() << "\nflags=";
      for (std::size_t k = 0; k < r.solution.flags.size(); ++k) std::cout << (k ? "," : "") << r.solution.flags[k];
      std::cout << "\n";
      if (r.fallback) return kFallback;
      return rep.valid() ? kOk : kHard;
    }

    const Solution sol = read_solution(read_file(solution_path));
    check_solution_shape(sol, inst);
    const ScoreBreakdown z = market_surplus(sol, inst);
    const ViolationReport rep = feasibility_report(sol, inst);
    print_score(std::cout, z);
    if (best > 0.0) std::cout << "scaled_score=" << scaled_score(z.total, best) << "\n";
    print_report(std::cout, rep);
    const auto outages = outage_list(inst, contingencies);
    if (!outages.empty()) {
      const ContingencyReport cr = contingency_screen(sol, inst, outages);
      std::cout << "contingencies=" << cr.outages.size() << "\nunscreenable=" << cr.unscreenable_count()
                << "\npost_outage_overloads=" << cr.overload_count() << "\n";
      for (const auto& o : cr.outages) {
        if (!o.screenable)
          std::cout << "outage branch=" << inst.branches[o.outage].id << " t=" << o.t << " unscreenable\n";
        for (const auto& f : o.overloads)
          std::cout << "outage branch=" << inst.branches[o.outage].id << " t=" << o.t
                    << " overloaded=" << inst.branches[f.branch].id << " flow=" << f.flow << " s_max=" << f.s_max
                    << "\n";
      }
    }
    return rep.valid() ? kOk : kHard;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
