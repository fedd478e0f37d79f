#include <benchmark/benchmark.h>

#include <random>

#include "scopf/ac_model.hpp"
#include "scopf/evaluator.hpp"
#include "scopf/generator.hpp"

using namespace scopf;

namespace {

AcStageInput stage_input(const Instance& inst) {
  AcStageInput in;
  for (const auto& d : inst.devices) {
    in.on.push_back(d.initial.on);
    in.prior_on.push_back(d.initial.on);
    in.prior_p.push_back(d.initial.p);
  }
  return in;
}

Solution angle_solution(const Instance& inst) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> th(-0.2, 0.2);
  Solution s;
  for (const auto& d : inst.devices) s.device_ids.push_back(d.id);
  for (const auto& b : inst.buses) s.bus_ids.push_back(b.id);
  for (const auto& b : inst.branches) s.branch_ids.push_back(b.id);
  SolutionStep st;
  st.devices.resize(inst.devices.size());
  for (std::size_t i = 0; i < inst.buses.size(); ++i) st.buses.push_back({1.0, i == inst.reference_bus() ? 0.0 : th(rng)});
  for (const auto& b : inst.branches) st.branch_closed.push_back(b.initial_closed);
  s.steps.push_back(st);
  return s;
}

void branch_kernel(benchmark::State& state, bool parallel) {
  const Instance inst = generate_instance({static_cast<std::size_t>(state.range(0)), 1, 3});
  const AcStage stage(inst, stage_input(inst));
  const std::vector<double> x = stage.warm_start();
  std::vector<BranchLocal> out;
  for (auto _ : state) {
    stage.eval_branches(x, out, parallel);
    benchmark::DoNotOptimize(out.data());
  }
}

void screen_kernel(benchmark::State& state, bool parallel) {
  const Instance inst = generate_instance({static_cast<std::size_t>(state.range(0)), 1, 3});
  const Solution s = angle_solution(inst);
  const auto outages = all_single_outages(inst);
  for (auto _ : state) benchmark::DoNotOptimize(contingency_screen(s, inst, outages, parallel));
}

void bm_branches_serial(benchmark::State& s) { branch_kernel(s, false); }
void bm_branches_omp(benchmark::State& s) { branch_kernel(s, true); }
void bm_screen_serial(benchmark::State& s) { screen_kernel(s, false); }
void bm_screen_omp(benchmark::State& s) { screen_kernel(s, true); }

}  // namespace

BENCHMARK(bm_branches_serial)->Arg(300)->Arg(2000);
BENCHMARK(bm_branches_omp)->Arg(300)->Arg(2000);
BENCHMARK(bm_screen_serial)->Arg(30)->Arg(118);
BENCHMARK(bm_screen_omp)->Arg(30)->Arg(118);

BENCHMARK_MAIN();
