#pragma once

#include <string>

#include "scopf/instance.hpp"
#include "scopf/instance_io.hpp"
#include "scopf/solution.hpp"

namespace fixtures {

inline const char* kMinimalDocument = R"({
  "header": {"name": "two_bus", "horizon_hours": 2.0, "base_mva": 100},
  "time_grid": {"count": 2, "durations": [1.0, 1.0]},
  "buses": [
    {"id": "B1", "v_min": 0.95, "v_max": 1.05, "is_reference": true},
    {"id": "B2", "v_min": 0.95, "v_max": 1.05}
  ],
  "shunts": [],
  "devices": [
    {"id": "G1", "bus": "B1", "kind": "producer", "p_min": 0.0, "p_max": 5.0,
     "q_min": -5.0, "q_max": 5.0, "ramp_up": null, "ramp_down": null,
     "cost_blocks": [{"quantity_max": 5.0, "marginal_price": 10.0}],
     "initial": {"on": false, "duration": 4.0, "p": 0.0}},
    {"id": "D1", "bus": "B2", "kind": "consumer", "p_min": 0.0, "p_max": [3.0, 2.0],
     "q_min": 0.0, "q_max": 0.0,
     "cost_blocks": [{"quantity_max": 3.0, "marginal_price": 100.0}],
     "initial": {"on": true, "duration": 10.0, "p": 3.0}}
  ],
  "branches": [
    {"id": "L1", "from_bus": "B1", "to_bus": "B2", "r": 0.0, "x": 0.1, "s_max": 10.0}
  ],
  "zones": [],
  "penalties": {"mismatch_penalty": 10000.0, "overload_penalty": 1000.0}
})";

inline scopf::Device make_device(const std::string& id, const std::string& bus, scopf::DeviceKind kind,
                                 std::size_t T, double p_min, double p_max, double price) {
  scopf::Device d;
  d.id = id;
  d.bus = bus;
  d.kind = kind;
  d.p_min.assign(T, p_min);
  d.p_max.assign(T, p_max);
  d.q_min.assign(T, kind == scopf::DeviceKind::producer ? -p_max : 0.0);
  d.q_max.assign(T, kind == scopf::DeviceKind::producer ? p_max : 0.0);
  d.startup_categories = {{0.0, scopf::kInf, 0.0}};
  d.cost_blocks.assign(T, {{p_max, price}});
  return d;
}

/// One bus, one producer (blocks of price `gen_price`) and one consumer with
/// benefit `load_benefit` for up to `demand`.
inline scopf::Instance single_bus(std::size_t T, double gen_pmin, double gen_pmax, double gen_price,
                                  double demand, double load_benefit) {
  using namespace scopf;
  Instance inst;
  inst.header = {"single_bus", static_cast<double>(T), 100.0};
  inst.time_grid.durations.assign(T, 1.0);
  inst.buses.push_back({"B1", 0.95, 1.05, true});
  Device g = make_device("G1", "B1", DeviceKind::producer, T, gen_pmin, gen_pmax, gen_price);
  g.initial = {false, 10.0, 0.0};
  Device c = make_device("D1", "B1", DeviceKind::consumer, T, 0.0, demand, load_benefit);
  c.initial = {true, 10.0, 0.0};
  inst.devices = {g, c};
  link(inst);
  return inst;
}

/// Two buses joined by one lossless line of reactance `x`.
inline scopf::Instance two_bus(std::size_t T, double x, double demand) {
  using namespace scopf;
  Instance inst;
  inst.header = {"two_bus", static_cast<double>(T), 100.0};
  inst.time_grid.durations.assign(T, 1.0);
  inst.buses.push_back({"B1", 0.9, 1.1, true});
  inst.buses.push_back({"B2", 0.9, 1.1, false});
  Device g = make_device("G1", "B1", DeviceKind::producer, T, 0.0, 5.0, 10.0);
  g.q_min.assign(T, -5.0);
  g.q_max.assign(T, 5.0);
  g.initial = {true, 10.0, demand};
  Device c = make_device("D1", "B2", DeviceKind::consumer, T, demand, demand, 100.0);
  c.initial = {true, 10.0, demand};
  inst.devices = {g, c};
  Branch br;
  br.id = "L1";
  br.from_bus = "B1";
  br.to_bus = "B2";
  br.r = 0.0;
  br.x = x;
  br.s_max = 10.0;
  inst.branches = {br};
  link(inst);
  return inst;
}

/// Every step sized to the instance, devices off, branches closed.
inline scopf::Solution blank_solution(const scopf::Instance& inst) {
  using namespace scopf;
  Solution s;
  for (std::size_t t = 0; t < inst.horizon(); ++t) {
    SolutionStep st;
    st.devices.resize(inst.devices.size());
    st.buses.resize(inst.buses.size());
    st.branch_closed.assign(inst.branches.size(), true);
    s.steps.push_back(st);
  }
  return s;
}

/// One bus, `producers` identical 10-unit producers, one small consumer and a
/// zone with zero requirements and shortfall penalty 100.
inline scopf::Instance reserve_instance(std::size_t producers, std::size_t T = 1) {
  using namespace scopf;
  Instance inst = single_bus(T, 0.0, 10.0, 1.0, 0.0, 0.0);
  inst.devices.resize(1);
  for (std::size_t j = 1; j < producers; ++j) {
    Device g = inst.devices[0];
    g.id = "G" + std::to_string(j + 1);
    inst.devices.push_back(g);
  }
  inst.devices.push_back(make_device("D1", "B1", DeviceKind::consumer, T, 0.0, 1.0, 5.0));
  ReserveZone z;
  z.id = "Z1";
  z.buses = {"B1"};
  z.req_up.assign(T, 0.0);
  z.req_down.assign(T, 0.0);
  z.shortfall_penalty = 100.0;
  inst.zones = {z};
  link(inst);
  return inst;
}

}  // namespace fixtures
