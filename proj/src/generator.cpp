#include "scopf/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "scopf/error.hpp"
#include "scopf/instance_io.hpp"

namespace scopf {

namespace {

Device producer(const std::string& id, const std::string& bus, std::size_t T, double p_min, double p_max,
                double q_min, double q_max, const std::vector<CostBlock>& blocks) {
  Device d;
  d.id = id;
  d.bus = bus;
  d.kind = DeviceKind::producer;
  d.p_min.assign(T, p_min);
  d.p_max.assign(T, p_max);
  d.q_min.assign(T, q_min);
  d.q_max.assign(T, q_max);
  d.cost_blocks.assign(T, blocks);
  d.startup_categories = {{0.0, kInf, 0.0}};
  return d;
}

Device consumer(const std::string& id, const std::string& bus, const std::vector<double>& load, double q_ratio,
                double firm_share, double firm_price, double flex_price) {
  Device d;
  d.id = id;
  d.bus = bus;
  d.kind = DeviceKind::consumer;
  for (double l : load) {
    d.p_min.push_back(0.5 * l);
    d.p_max.push_back(l);
    d.q_min.push_back(q_ratio * l);
    d.q_max.push_back(q_ratio * l);
    d.cost_blocks.push_back({{firm_share * l, firm_price}, {(1.0 - firm_share) * l, flex_price}});
  }
  d.startup_categories = {{0.0, kInf, 0.0}};
  d.initial = {true, 10.0, 0.0};
  return d;
}

Branch branch(const std::string& id, const std::string& from, const std::string& to, double r, double x,
              double b_ch, double s_max) {
  Branch b;
  b.id = id;
  b.from_bus = from;
  b.to_bus = to;
  b.r = r;
  b.x = x;
  b.b_ch = b_ch;
  b.s_max = s_max;
  return b;
}

void finish(Instance& inst) {
  auto unresolved = link(inst);
  if (!unresolved.empty()) throw ContractError("generator produced dangling reference " + unresolved.front());
  auto v = validate(inst);
  if (!v.empty()) throw ContractError("generator produced an invalid instance: " + v.front().entity + " " + v.front().rule);
}

}  // namespace

Instance generate_instance(const GeneratorOptions& o) {
  if (o.buses < 1 || o.intervals < 1) throw ContractError("generate_instance: need at least one bus and interval");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto u = [&](double a, double b) { return a + (b - a) * u01(rng); };
  const std::size_t B = o.buses, T = o.intervals;

  Instance inst;
  inst.header = {"gen_b" + std::to_string(B) + "_t" + std::to_string(T) + "_s" + std::to_string(o.seed),
                 o.interval_hours * static_cast<double>(T), 100.0};
  inst.time_grid.durations.assign(T, o.interval_hours);
  for (std::size_t i = 0; i < B; ++i)
    inst.buses.push_back({"B" + std::to_string(i + 1), 0.94, 1.06, i == 0});

  std::vector<double> profile(T);
  for (std::size_t t = 0; t < T; ++t) profile[t] = 0.85 + 0.15 * std::sin(0.5 + 0.8 * static_cast<double>(t)) + u(-0.03, 0.03);

  // Loads at every bus, producers at about half of them.
  double peak_load = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    const double base = u(0.2, 0.8);
    std::vector<double> load(T);
    for (std::size_t t = 0; t < T; ++t) load[t] = base * profile[t];
    peak_load += *std::max_element(load.begin(), load.end());
    Device c = consumer("D" + std::to_string(i + 1), inst.buses[i].id, load, u(0.1, 0.3), 0.8, u(90, 120), u(40, 70));
    if (o.energy_windows && i == 0 && T >= 2) {
      double e = 0.0;
      for (std::size_t t = 0; t < T; ++t) e += 0.6 * load[t] * o.interval_hours;
      c.energy_windows.push_back({0, T - 1, e, kInf});
    }
    inst.devices.push_back(std::move(c));
  }
  const std::size_t G = std::max<std::size_t>(1, (B + 1) / 2);
  const double per_gen = 1.6 * peak_load / static_cast<double>(G) + 0.2;
  for (std::size_t g = 0; g < G; ++g) {
    const std::size_t bus = g == 0 ? 0 : std::uniform_int_distribution<std::size_t>(0, B - 1)(rng);
    const double pmax = per_gen * u(0.8, 1.2), pmin = pmax * u(0.1, 0.3);
    const double price = u(15, 40);
    std::vector<CostBlock> blocks{{0.5 * pmax, price}, {0.3 * pmax, price + u(2, 8)}, {0.2 * pmax, price + u(10, 20)}};
    Device d = producer("G" + std::to_string(g + 1), inst.buses[bus].id, T, pmin, pmax, -0.5 * pmax, 0.8 * pmax, blocks);
    d.ramp_up = pmax * u(0.4, 1.0);
    d.ramp_down = d.ramp_up;
    d.min_uptime = std::floor(u(0, 3));
    d.min_downtime = std::floor(u(0, 3));
    d.on_cost = u(0, 5);
    d.shutdown_cost = u(0, 2);
    const double hot = u(5, 20);
    d.startup_categories = {{0.0, 4.0, hot}, {4.0, kInf, 2.0 * hot}};
    if (u01(rng) < 0.3) d.max_starts = 1;
    if (g == 0 || u01(rng) < 0.5) {
      d.initial = {true, 8.0, std::min(pmax, pmin + 0.5 * (pmax - pmin))};
    } else {
      d.initial = {false, std::floor(u(1, 8)), 0.0};
    }
    inst.devices.push_back(std::move(d));
  }

  // Spanning tree, a few chords, then parallel copies.
  std::size_t nb = 0;
  auto add_branch = [&](std::size_t a, std::size_t b) {
    const double x = u(0.05, 0.3);
    Branch br = branch("L" + std::to_string(++nb), inst.buses[a].id, inst.buses[b].id, x / u(5, 10), x, u(0, 0.04),
                       u(0.6, 1.5) * std::max(1.0, peak_load / 2));
    br.switchable = u01(rng) < 0.5;
    inst.branches.push_back(br);
  };
  for (std::size_t i = 1; i < B; ++i) add_branch(std::uniform_int_distribution<std::size_t>(0, i - 1)(rng), i);
  for (std::size_t k = 0; k < B / 3; ++k) {
    std::size_t a = std::uniform_int_distribution<std::size_t>(0, B - 1)(rng);
    std::size_t b = std::uniform_int_distribution<std::size_t>(0, B - 1)(rng);
    if (a != b) add_branch(a, b);
  }
  const std::size_t corridors = inst.branches.size();
  for (std::size_t k = 0; k < corridors; ++k)
    if (u01(rng) < o.parallel_fraction) {
      Branch copy = inst.branches[k];
      copy.id = "L" + std::to_string(++nb);
      copy.x *= u01(rng) < 0.5 ? u(0.9, 1.1) : u(2.0, 4.0);
      copy.r = copy.x / 8;
      copy.switchable = true;
      inst.branches.push_back(copy);
    }

  for (std::size_t i = 0; i < B; i += 3) {
    Shunt s;
    s.id = "S" + std::to_string(i + 1);
    s.bus = inst.buses[i].id;
    s.g_sh.assign(T, u(0.0, 0.02));
    s.b_sh.assign(T, u(0.0, 0.1));
    inst.shunts.push_back(s);
  }

  if (o.zones) {
    ReserveZone z;
    z.id = "Z1";
    for (const auto& b : inst.buses) z.buses.push_back(b.id);
    for (std::size_t t = 0; t < T; ++t) {
      z.req_up.push_back(0.1 * peak_load * profile[t]);
      z.req_down.push_back(0.05 * peak_load * profile[t]);
    }
    z.shortfall_penalty = 500.0;
    inst.zones.push_back(z);
  }
  inst.penalties = {1e4, 1e3};
  finish(inst);
  return inst;
}

Instance case14_instance(std::size_t T) {
  if (T < 1) throw ContractError("case14_instance: need at least one interval");
  Instance inst;
  inst.header = {"case14_t" + std::to_string(T), static_cast<double>(T), 100.0};
  inst.time_grid.durations.assign(T, 1.0);
  for (int i = 1; i <= 14; ++i) inst.buses.push_back({"B" + std::to_string(i), 0.94, 1.06, i == 1});

  static const double kProfile[] = {0.85, 0.80, 0.82, 0.90, 1.00, 1.05, 1.00, 0.95};
  struct Load {
    int bus;
    double p, q;
  };
  static const Load kLoads[] = {{2, 21.7, 12.7}, {3, 94.2, 19.0}, {4, 47.8, -3.9}, {5, 7.6, 1.6},
                                {6, 11.2, 7.5},  {9, 29.5, 16.6}, {10, 9.0, 5.8},  {11, 3.5, 1.8},
                                {12, 6.1, 1.6},  {13, 13.5, 5.8}, {14, 14.9, 5.0}};
  for (const auto& l : kLoads) {
    std::vector<double> load(T);
    for (std::size_t t = 0; t < T; ++t) load[t] = l.p / 100.0 * kProfile[t % 8];
    inst.devices.push_back(consumer("D" + std::to_string(l.bus), "B" + std::to_string(l.bus), load, l.q / l.p, 0.8,
                                    6000.0, 4500.0));
  }

  auto gen = [&](const std::string& id, int bus, double pmin, double pmax, double qmin, double qmax,
                 std::vector<CostBlock> blocks, double ramp, double ut, double dt, double on_cost,
                 std::vector<StartupCategory> cats, InitialState init) {
    Device d = producer(id, "B" + std::to_string(bus), T, pmin, pmax, qmin, qmax, blocks);
    d.ramp_up = d.ramp_down = ramp;
    d.min_uptime = ut;
    d.min_downtime = dt;
    d.on_cost = on_cost;
    d.shutdown_cost = 0.5 * on_cost;
    d.startup_categories = std::move(cats);
    d.initial = init;
    inst.devices.push_back(std::move(d));
  };
  gen("G1", 1, 0.3, 3.3, -1.0, 1.5, {{1.0, 2000}, {1.0, 2200}, {1.3, 2500}}, 1.5, 2, 2, 100,
      {{0, kInf, 0}}, {true, 8.0, 1.6});
  gen("G2", 2, 0.2, 1.4, -0.4, 0.8, {{0.7, 2800}, {0.7, 3200}}, 1.0, 2, 2, 80, {{0, kInf, 0}}, {true, 5.0, 0.6});
  gen("G3", 3, 0.1, 1.0, 0.0, 0.4, {{0.5, 3800}, {0.5, 4200}}, 1.0, 1, 1, 60, {{0, 4, 500}, {4, kInf, 1000}},
      {false, 6.0, 0.0});
  gen("G6", 6, 0.1, 1.0, -0.1, 0.3, {{1.0, 3500}}, 0.8, 1, 1, 60, {{0, 2, 300}, {2, kInf, 600}}, {false, 3.0, 0.0});
  gen("G8", 8, 0.1, 1.0, -0.1, 0.3, {{1.0, 4500}}, 0.8, 1, 1, 60, {{0, kInf, 800}}, {false, 10.0, 0.0});

  struct Line {
    int f, t;
    double r, x, b, s;
  };
  static const Line kLines[] = {
      {1, 2, 0.01938, 0.05917, 0.0528, 2.2}, {1, 5, 0.05403, 0.22304, 0.0492, 1.1},
      {2, 3, 0.04699, 0.19797, 0.0438, 1.1}, {2, 4, 0.05811, 0.17632, 0.0340, 0.9},
      {2, 5, 0.05695, 0.17388, 0.0346, 0.7}, {3, 4, 0.06701, 0.17103, 0.0128, 0.6},
      {4, 5, 0.01335, 0.04211, 0.0, 1.0},    {4, 7, 0.0, 0.20912, 0.0, 0.6},
      {4, 9, 0.0, 0.55618, 0.0, 0.4},        {5, 6, 0.0, 0.25202, 0.0, 0.8},
      {6, 11, 0.09498, 0.19890, 0.0, 0.4},   {6, 12, 0.12291, 0.25581, 0.0, 0.4},
      {6, 13, 0.06615, 0.13027, 0.0, 0.5},   {7, 8, 0.0, 0.17615, 0.0, 0.6},
      {7, 9, 0.0, 0.11001, 0.0, 0.6},        {9, 10, 0.03181, 0.08450, 0.0, 0.4},
      {9, 14, 0.12711, 0.27038, 0.0, 0.4},   {10, 11, 0.08205, 0.19207, 0.0, 0.4},
      {12, 13, 0.22092, 0.19988, 0.0, 0.3},  {13, 14, 0.17093, 0.34802, 0.0, 0.4}};
  int n = 0;
  for (const auto& l : kLines)
    inst.branches.push_back(branch("L" + std::to_string(++n), "B" + std::to_string(l.f), "B" + std::to_string(l.t), l.r,
                                   l.x, l.b, l.s));
  // A high-reactance parallel circuit on the 4-5 corridor for the switching heuristic.
  Branch par = branch("L" + std::to_string(++n), "B4", "B5", 0.05, 0.16, 0.0, 0.5);
  par.switchable = true;
  inst.branches.push_back(par);

  Shunt s;
  s.id = "SH9";
  s.bus = "B9";
  s.g_sh.assign(T, 0.0);
  s.b_sh.assign(T, 0.19);
  inst.shunts.push_back(s);

  ReserveZone z;
  z.id = "Z1";
  for (const auto& b : inst.buses) z.buses.push_back(b.id);
  for (std::size_t t = 0; t < T; ++t) {
    z.req_up.push_back(0.25 * kProfile[t % 8]);
    z.req_down.push_back(0.1 * kProfile[t % 8]);
  }
  z.shortfall_penalty = 5000.0;
  inst.zones.push_back(z);
  inst.penalties = {1e6, 5e5};
  finish(inst);
  return inst;
}

}  // namespace scopf
