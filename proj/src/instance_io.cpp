#include "scopf/instance_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "scopf/error.hpp"

namespace scopf {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// Field access with a path for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const json& value() const { return value_; }
  const std::string& path() const { return path_; }

  bool has(const char* key) const { return value_.is_object() && value_.contains(key); }

  Node at(const char* key) const {
    if (!value_.is_object()) fail("expected object");
    auto it = value_.find(key);
    if (it == value_.end()) throw SchemaError(child_path(key), "missing field");
    return Node(*it, child_path(key));
  }

  Node at(std::size_t i) const { return Node(value_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  std::size_t size() const {
    if (!value_.is_array()) fail("expected array");
    return value_.size();
  }

  double number() const {
    if (!value_.is_number()) fail("expected number");
    double v = value_.get<double>();
    if (!std::isfinite(v)) fail("expected finite number");
    return v;
  }

  // null means unbounded.
  double number_or_inf() const {
    if (value_.is_null()) return kInf;
    return number();
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected string");
    return value_.get<std::string>();
  }

  bool boolean() const {
    if (!value_.is_boolean()) fail("expected boolean");
    return value_.get<bool>();
  }

  long long integer() const {
    if (!value_.is_number_integer()) fail("expected integer");
    return value_.get<long long>();
  }

  std::size_t index() const {
    long long v = integer();
    if (v < 0) fail("expected nonnegative integer");
    return static_cast<std::size_t>(v);
  }

  // A number broadcast across the horizon, or an array with one entry per interval.
  std::vector<double> per_step(std::size_t count) const {
    if (value_.is_number()) return std::vector<double>(count, number());
    if (!value_.is_array()) fail("expected number or per-interval array");
    if (value_.size() != count)
      fail("expected " + std::to_string(count) + " entries, got " + std::to_string(value_.size()));
    std::vector<double> out(count);
    for (std::size_t t = 0; t < count; ++t) out[t] = at(t).number();
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const { throw SchemaError(path_, what); }

 private:
  std::string child_path(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  const json& value_;
  std::string path_;
};

double opt_number(const Node& n, const char* key, double fallback) {
  return n.has(key) ? n.at(key).number() : fallback;
}

double opt_number_or_inf(const Node& n, const char* key, double fallback) {
  return n.has(key) ? n.at(key).number_or_inf() : fallback;
}

bool opt_bool(const Node& n, const char* key, bool fallback) {
  return n.has(key) ? n.at(key).boolean() : fallback;
}

CostBlock parse_block(const Node& n) {
  return {n.at("quantity_max").number(), n.at("marginal_price").number()};
}

std::vector<std::vector<CostBlock>> parse_blocks(const Node& n, std::size_t count) {
  std::size_t len = n.size();
  // A list of block lists is per-interval; a flat list is broadcast.
  bool nested = len > 0 && n.value()[0].is_array();
  if (!nested) {
    std::vector<CostBlock> blocks;
    for (std::size_t m = 0; m < len; ++m) blocks.push_back(parse_block(n.at(m)));
    return std::vector<std::vector<CostBlock>>(count, blocks);
  }
  if (len != count)
    n.fail("expected " + std::to_string(count) + " per-interval block lists, got " +
           std::to_string(len));
  std::vector<std::vector<CostBlock>> out(count);
  for (std::size_t t = 0; t < count; ++t) {
    Node step = n.at(t);
    for (std::size_t m = 0; m < step.size(); ++m) out[t].push_back(parse_block(step.at(m)));
  }
  return out;
}

Device parse_device(const Node& n, std::size_t count) {
  Device d;
  d.id = n.at("id").string();
  d.bus = n.at("bus").string();
  std::string kind = n.at("kind").string();
  if (kind == "producer")
    d.kind = DeviceKind::producer;
  else if (kind == "consumer")
    d.kind = DeviceKind::consumer;
  else
    n.at("kind").fail("expected \"producer\" or \"consumer\"");
  d.p_min = n.at("p_min").per_step(count);
  d.p_max = n.at("p_max").per_step(count);
  d.q_min = n.at("q_min").per_step(count);
  d.q_max = n.at("q_max").per_step(count);
  d.ramp_up = opt_number_or_inf(n, "ramp_up", kInf);
  d.ramp_down = opt_number_or_inf(n, "ramp_down", kInf);
  d.min_uptime = opt_number(n, "min_uptime", 0.0);
  d.min_downtime = opt_number(n, "min_downtime", 0.0);
  if (n.has("max_starts")) {
    Node ms = n.at("max_starts");
    d.max_starts = ms.value().is_null() ? std::numeric_limits<int>::max()
                                        : static_cast<int>(std::clamp<long long>(
                                              ms.integer(), -1, std::numeric_limits<int>::max()));
  }
  d.on_cost = opt_number(n, "on_cost", 0.0);
  d.shutdown_cost = opt_number(n, "shutdown_cost", 0.0);
  if (n.has("startup_categories")) {
    Node cats = n.at("startup_categories");
    for (std::size_t k = 0; k < cats.size(); ++k) {
      Node c = cats.at(k);
      d.startup_categories.push_back({c.at("downtime_lo").number(),
                                      opt_number_or_inf(c, "downtime_hi", kInf),
                                      c.at("cost").number()});
    }
  } else {
    d.startup_categories.push_back({0.0, kInf, 0.0});
  }
  d.cost_blocks = parse_blocks(n.at("cost_blocks"), count);
  if (n.has("energy_windows")) {
    Node ws = n.at("energy_windows");
    for (std::size_t k = 0; k < ws.size(); ++k) {
      Node w = ws.at(k);
      d.energy_windows.push_back({w.at("t_start").index(), w.at("t_end").index(),
                                  w.has("e_min") ? w.at("e_min").number_or_inf() : -kInf,
                                  opt_number_or_inf(w, "e_max", kInf)});
      if (d.energy_windows.back().e_min == kInf) d.energy_windows.back().e_min = -kInf;
    }
  }
  Node init = n.at("initial");
  d.initial.on = init.at("on").boolean();
  d.initial.duration = init.at("duration").number();
  d.initial.p = init.at("p").number();
  return d;
}

Instance parse_unchecked(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw SchemaError("$", std::string("malformed document: ") + e.what());
  }
  Node root(doc, "");
  if (!doc.is_object()) root.fail("expected object at top level");

  Instance inst;
  Node header = root.at("header");
  inst.header.name = header.at("name").string();
  inst.header.horizon_hours = header.at("horizon_hours").number();
  inst.header.base_mva = opt_number(header, "base_mva", 100.0);

  Node grid = root.at("time_grid");
  long long count = grid.at("count").integer();
  if (count < 1) grid.at("count").fail("expected count >= 1");
  if (count > 100000) grid.at("count").fail("count too large");
  std::size_t T = static_cast<std::size_t>(count);
  inst.time_grid.durations = grid.at("durations").per_step(T);

  Node buses = root.at("buses");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    Node b = buses.at(i);
    inst.buses.push_back({b.at("id").string(), b.at("v_min").number(), b.at("v_max").number(),
                          opt_bool(b, "is_reference", false)});
  }

  Node shunts = root.at("shunts");
  for (std::size_t i = 0; i < shunts.size(); ++i) {
    Node s = shunts.at(i);
    Shunt sh;
    sh.id = s.at("id").string();
    sh.bus = s.at("bus").string();
    sh.g_sh = s.at("g_sh").per_step(T);
    sh.b_sh = s.at("b_sh").per_step(T);
    inst.shunts.push_back(std::move(sh));
  }

  Node devices = root.at("devices");
  for (std::size_t i = 0; i < devices.size(); ++i)
    inst.devices.push_back(parse_device(devices.at(i), T));

  Node branches = root.at("branches");
  for (std::size_t i = 0; i < branches.size(); ++i) {
    Node b = branches.at(i);
    Branch br;
    br.id = b.at("id").string();
    br.from_bus = b.at("from_bus").string();
    br.to_bus = b.at("to_bus").string();
    br.r = opt_number(b, "r", 0.0);
    br.x = b.at("x").number();
    br.b_ch = opt_number(b, "b_ch", 0.0);
    br.s_max = b.at("s_max").number();
    br.switchable = opt_bool(b, "switchable", false);
    br.initial_closed = opt_bool(b, "initial_closed", true);
    inst.branches.push_back(std::move(br));
  }

  Node zones = root.at("zones");
  for (std::size_t i = 0; i < zones.size(); ++i) {
    Node z = zones.at(i);
    ReserveZone zone;
    zone.id = z.at("id").string();
    Node members = z.at("buses");
    for (std::size_t k = 0; k < members.size(); ++k) zone.buses.push_back(members.at(k).string());
    zone.req_up = z.at("req_up").per_step(T);
    zone.req_down = z.at("req_down").per_step(T);
    zone.shortfall_penalty = z.at("shortfall_penalty").number();
    inst.zones.push_back(std::move(zone));
  }

  Node pen = root.at("penalties");
  inst.penalties.mismatch_penalty = pen.at("mismatch_penalty").number();
  inst.penalties.overload_penalty = pen.at("overload_penalty").number();
  return inst;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

class ViolationSink {
 public:
  void add(std::string entity, std::string rule, std::string observed) {
    out.push_back({std::move(entity), std::move(rule), std::move(observed)});
  }
  std::vector<Violation> out;
};

bool connected_on_closed(const Instance& inst) {
  std::size_t n = inst.buses.size();
  if (n == 0) return true;
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& b : inst.branches) {
    if (!b.initial_closed || b.from_index >= n || b.to_index >= n) continue;
    adj[b.from_index].push_back(b.to_index);
    adj[b.to_index].push_back(b.from_index);
  }
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop();
    for (std::size_t v : adj[u])
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        q.push(v);
      }
  }
  return reached == n;
}

void check_unique(ViolationSink& sink, const std::string& kind,
                  const std::vector<std::string>& ids) {
  std::set<std::string> seen;
  for (const auto& id : ids)
    if (!seen.insert(id).second) sink.add(kind + " " + id, "unique id", id);
}

}  // namespace

std::vector<Violation> validate(const Instance& inst) {
  ViolationSink sink;
  const std::size_t T = inst.time_grid.count();
  std::size_t nb = inst.buses.size();

  if (T < 1) sink.add("time_grid", "count >= 1", std::to_string(T));
  for (std::size_t t = 0; t < T; ++t)
    if (!(inst.time_grid.durations[t] > 0.0))
      sink.add("time_grid.durations[" + std::to_string(t) + "]", "duration > 0",
               fmt(inst.time_grid.durations[t]));
  if (std::abs(inst.time_grid.horizon() - inst.header.horizon_hours) > 1e-9)
    sink.add("time_grid", "durations sum to horizon",
             fmt(inst.time_grid.horizon()) + " vs " + fmt(inst.header.horizon_hours));

  auto ids_of = [](const auto& items) {
    std::vector<std::string> ids;
    for (const auto& it : items) ids.push_back(it.id);
    return ids;
  };
  check_unique(sink, "bus", ids_of(inst.buses));
  check_unique(sink, "shunt", ids_of(inst.shunts));
  check_unique(sink, "device", ids_of(inst.devices));
  check_unique(sink, "branch", ids_of(inst.branches));
  check_unique(sink, "zone", ids_of(inst.zones));

  int refs = 0;
  for (const auto& b : inst.buses) {
    if (!(b.v_min > 0.0)) sink.add("bus " + b.id, "v_min > 0", fmt(b.v_min));
    if (!(b.v_min <= b.v_max)) sink.add("bus " + b.id, "v_min ≤ v_max", fmt(b.v_min) + " > " + fmt(b.v_max));
    refs += b.is_reference ? 1 : 0;
  }
  if (refs != 1) sink.add("buses", "exactly one reference bus", std::to_string(refs));

  auto bus_ok = [&](const std::string& id, std::size_t idx) {
    return idx < nb && inst.buses[idx].id == id;
  };

  for (const auto& s : inst.shunts) {
    if (!bus_ok(s.bus, s.bus_index)) sink.add("shunt " + s.id, "bus exists", s.bus);
    if (s.g_sh.size() != T || s.b_sh.size() != T)
      sink.add("shunt " + s.id, "per-interval shape", std::to_string(s.g_sh.size()));
    for (double g : s.g_sh)
      if (!std::isfinite(g)) sink.add("shunt " + s.id, "finite g_sh", fmt(g));
    for (double b : s.b_sh)
      if (!std::isfinite(b)) sink.add("shunt " + s.id, "finite b_sh", fmt(b));
  }

  for (const auto& d : inst.devices) {
    std::string ent = "device " + d.id;
    if (!bus_ok(d.bus, d.bus_index)) sink.add(ent, "bus exists", d.bus);
    if (d.p_min.size() != T || d.p_max.size() != T || d.q_min.size() != T ||
        d.q_max.size() != T || d.cost_blocks.size() != T) {
      sink.add(ent, "per-interval shape", std::to_string(d.p_min.size()));
      continue;
    }
    for (std::size_t t = 0; t < T; ++t) {
      if (!(0.0 <= d.p_min[t] && d.p_min[t] <= d.p_max[t]))
        sink.add(ent, "0 ≤ p_min ≤ p_max", "t=" + std::to_string(t) + " " + fmt(d.p_min[t]) + "," + fmt(d.p_max[t]));
      if (!(d.q_min[t] <= d.q_max[t]))
        sink.add(ent, "q_min ≤ q_max", "t=" + std::to_string(t) + " " + fmt(d.q_min[t]) + "," + fmt(d.q_max[t]));
      const auto& blocks = d.cost_blocks[t];
      double cap = 0.0;
      for (std::size_t m = 0; m < blocks.size(); ++m) {
        if (!(blocks[m].quantity_max >= 0.0))
          sink.add(ent, "block quantity ≥ 0", fmt(blocks[m].quantity_max));
        cap += blocks[m].quantity_max;
        if (m > 0) {
          double prev = blocks[m - 1].marginal_price, cur = blocks[m].marginal_price;
          bool ordered = d.is_producer() ? prev <= cur : prev >= cur;
          if (!ordered)
            sink.add(ent, "block merit order", "t=" + std::to_string(t) + " block " + std::to_string(m));
        }
      }
      if (cap < d.p_max[t] - 1e-9)
        sink.add(ent, "block capacity ≥ p_max", "t=" + std::to_string(t) + " " + fmt(cap));
    }
    if (!(d.ramp_up >= 0.0) || !(d.ramp_down >= 0.0))
      sink.add(ent, "ramp rates ≥ 0", fmt(d.ramp_up) + "," + fmt(d.ramp_down));
    if (!(d.min_uptime >= 0.0) || !(d.min_downtime >= 0.0) || !std::isfinite(d.min_uptime) ||
        !std::isfinite(d.min_downtime))
      sink.add(ent, "min up/down times ≥ 0", fmt(d.min_uptime) + "," + fmt(d.min_downtime));
    if (d.max_starts < 0) sink.add(ent, "max_starts ≥ 0", std::to_string(d.max_starts));
    if (!(d.on_cost >= 0.0) || !(d.shutdown_cost >= 0.0))
      sink.add(ent, "commitment costs ≥ 0", fmt(d.on_cost) + "," + fmt(d.shutdown_cost));

    const auto& cats = d.startup_categories;
    if (cats.empty()) {
      sink.add(ent, "startup categories cover [min_downtime, ∞)", "none");
    } else {
      bool ordered = true;
      for (std::size_t k = 0; k < cats.size(); ++k) {
        if (!(cats[k].downtime_lo < cats[k].downtime_hi)) ordered = false;
        if (k > 0 && cats[k].downtime_lo < cats[k - 1].downtime_hi) ordered = false;
      }
      if (!ordered) sink.add(ent, "startup categories ascending and disjoint", std::to_string(cats.size()));
      bool covers = cats.front().downtime_lo <= d.min_downtime + 1e-9 &&
                    cats.back().downtime_hi == kInf;
      for (std::size_t k = 1; k < cats.size(); ++k)
        if (cats[k].downtime_lo > cats[k - 1].downtime_hi) covers = false;
      if (!covers)
        sink.add(ent, "startup categories cover [min_downtime, ∞)", fmt(cats.front().downtime_lo));
      for (std::size_t k = 1; k < cats.size(); ++k)
        if (cats[k].cost < cats[k - 1].cost)
          sink.add(ent, "startup costs nondecreasing in downtime", std::to_string(k));
    }
    for (const auto& w : d.energy_windows)
      if (!(w.t_start <= w.t_end && w.t_end < T && w.e_min <= w.e_max))
        sink.add(ent, "energy window range", std::to_string(w.t_start) + ".." + std::to_string(w.t_end));
    if (!(d.initial.duration >= 0.0) || !(d.initial.p >= 0.0) ||
        (!d.initial.on && d.initial.p != 0.0))
      sink.add(ent, "initial state", fmt(d.initial.p));
  }

  for (const auto& b : inst.branches) {
    std::string ent = "branch " + b.id;
    if (!bus_ok(b.from_bus, b.from_index)) sink.add(ent, "bus exists", b.from_bus);
    if (!bus_ok(b.to_bus, b.to_index)) sink.add(ent, "bus exists", b.to_bus);
    if (b.from_bus == b.to_bus) sink.add(ent, "from ≠ to", b.from_bus);
    if (b.x == 0.0) sink.add(ent, "x ≠ 0", fmt(b.x));
    if (!(b.s_max > 0.0)) sink.add(ent, "s_max > 0", fmt(b.s_max));
  }
  if (!connected_on_closed(inst)) sink.add("branches", "closed network connected", "disconnected");

  for (const auto& z : inst.zones) {
    std::string ent = "zone " + z.id;
    for (std::size_t k = 0; k < z.buses.size(); ++k)
      if (k >= z.bus_indices.size() || !bus_ok(z.buses[k], z.bus_indices[k]))
        sink.add(ent, "bus exists", z.buses[k]);
    if (z.req_up.size() != T || z.req_down.size() != T) {
      sink.add(ent, "per-interval shape", std::to_string(z.req_up.size()));
      continue;
    }
    for (std::size_t t = 0; t < T; ++t)
      if (!(z.req_up[t] >= 0.0) || !(z.req_down[t] >= 0.0))
        sink.add(ent, "requirements ≥ 0", "t=" + std::to_string(t));
    if (!(z.shortfall_penalty >= 0.0)) sink.add(ent, "shortfall penalty ≥ 0", fmt(z.shortfall_penalty));
  }

  if (!(inst.penalties.mismatch_penalty > inst.max_block_price()))
    sink.add("penalties", "penalty dominance",
             fmt(inst.penalties.mismatch_penalty) + " ≤ " + fmt(inst.max_block_price()));
  if (!(inst.penalties.overload_penalty >= 0.0))
    sink.add("penalties", "overload penalty ≥ 0", fmt(inst.penalties.overload_penalty));
  return std::move(sink.out);
}

Instance parse_instance(std::string_view text) {
  Instance inst = parse_unchecked(text);
  auto missing = link(inst);
  if (!missing.empty()) throw SemanticError("unknown bus reference \"" + missing.front() + "\"");
  auto violations = validate(inst);
  if (!violations.empty()) {
    const auto& v = violations.front();
    std::string msg = v.entity + ": " + v.rule + " (" + v.observed + ")";
    if (violations.size() > 1) msg += " and " + std::to_string(violations.size() - 1) + " more";
    throw SemanticError(msg);
  }
  return inst;
}

Instance load_instance(const std::string& path) { return parse_instance(read_file(path)); }

namespace {

ordered_json num_or_null(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

// Writes a broadcast scalar when every entry is identical.
ordered_json per_step_json(const std::vector<double>& values) {
  if (!values.empty() &&
      std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; }))
    return values[0];
  return values;
}

ordered_json blocks_json(const std::vector<CostBlock>& blocks) {
  ordered_json out = ordered_json::array();
  for (const auto& b : blocks)
    out.push_back({{"quantity_max", b.quantity_max}, {"marginal_price", b.marginal_price}});
  return out;
}

}  // namespace

std::string write_instance(const Instance& inst) {
  ordered_json doc;
  doc["header"] = {{"name", inst.header.name},
                   {"horizon_hours", inst.header.horizon_hours},
                   {"base_mva", inst.header.base_mva}};
  doc["time_grid"] = {{"count", inst.time_grid.count()},
                      {"durations", per_step_json(inst.time_grid.durations)}};
  ordered_json buses = ordered_json::array();
  for (const auto& b : inst.buses)
    buses.push_back({{"id", b.id}, {"v_min", b.v_min}, {"v_max", b.v_max},
                     {"is_reference", b.is_reference}});
  doc["buses"] = std::move(buses);
  ordered_json shunts = ordered_json::array();
  for (const auto& s : inst.shunts)
    shunts.push_back({{"id", s.id}, {"bus", s.bus}, {"g_sh", per_step_json(s.g_sh)},
                      {"b_sh", per_step_json(s.b_sh)}});
  doc["shunts"] = std::move(shunts);
  ordered_json devices = ordered_json::array();
  for (const auto& d : inst.devices) {
    ordered_json j;
    j["id"] = d.id;
    j["bus"] = d.bus;
    j["kind"] = d.is_producer() ? "producer" : "consumer";
    j["p_min"] = per_step_json(d.p_min);
    j["p_max"] = per_step_json(d.p_max);
    j["q_min"] = per_step_json(d.q_min);
    j["q_max"] = per_step_json(d.q_max);
    j["ramp_up"] = num_or_null(d.ramp_up);
    j["ramp_down"] = num_or_null(d.ramp_down);
    j["min_uptime"] = d.min_uptime;
    j["min_downtime"] = d.min_downtime;
    if (d.max_starts == std::numeric_limits<int>::max())
      j["max_starts"] = nullptr;
    else
      j["max_starts"] = d.max_starts;
    j["on_cost"] = d.on_cost;
    j["shutdown_cost"] = d.shutdown_cost;
    ordered_json cats = ordered_json::array();
    for (const auto& c : d.startup_categories)
      cats.push_back({{"downtime_lo", c.downtime_lo}, {"downtime_hi", num_or_null(c.downtime_hi)},
                      {"cost", c.cost}});
    j["startup_categories"] = std::move(cats);
    bool uniform = std::all_of(d.cost_blocks.begin(), d.cost_blocks.end(), [&](const auto& b) {
      return b.size() == d.cost_blocks[0].size() &&
             std::equal(b.begin(), b.end(), d.cost_blocks[0].begin(), [](const CostBlock& x, const CostBlock& y) {
               return x.quantity_max == y.quantity_max && x.marginal_price == y.marginal_price;
             });
    });
    if (uniform && !d.cost_blocks.empty()) {
      j["cost_blocks"] = blocks_json(d.cost_blocks[0]);
    } else {
      ordered_json per = ordered_json::array();
      for (const auto& b : d.cost_blocks) per.push_back(blocks_json(b));
      j["cost_blocks"] = std::move(per);
    }
    ordered_json windows = ordered_json::array();
    for (const auto& w : d.energy_windows)
      windows.push_back({{"t_start", w.t_start}, {"t_end", w.t_end},
                         {"e_min", std::isinf(w.e_min) ? ordered_json(nullptr) : ordered_json(w.e_min)},
                         {"e_max", num_or_null(w.e_max)}});
    j["energy_windows"] = std::move(windows);
    j["initial"] = {{"on", d.initial.on}, {"duration", d.initial.duration}, {"p", d.initial.p}};
    devices.push_back(std::move(j));
  }
  doc["devices"] = std::move(devices);
  ordered_json branches = ordered_json::array();
  for (const auto& b : inst.branches)
    branches.push_back({{"id", b.id}, {"from_bus", b.from_bus}, {"to_bus", b.to_bus},
                        {"r", b.r}, {"x", b.x}, {"b_ch", b.b_ch}, {"s_max", b.s_max},
                        {"switchable", b.switchable}, {"initial_closed", b.initial_closed}});
  doc["branches"] = std::move(branches);
  ordered_json zones = ordered_json::array();
  for (const auto& z : inst.zones)
    zones.push_back({{"id", z.id}, {"buses", z.buses}, {"req_up", per_step_json(z.req_up)},
                     {"req_down", per_step_json(z.req_down)},
                     {"shortfall_penalty", z.shortfall_penalty}});
  doc["zones"] = std::move(zones);
  doc["penalties"] = {{"mismatch_penalty", inst.penalties.mismatch_penalty},
                      {"overload_penalty", inst.penalties.overload_penalty}};
  return doc.dump(1) + "\n";
}

void check_solution_shape(const Solution& s, const Instance& inst) {
  auto fail = [](const std::string& what) { throw ContractError("solution shape mismatch: " + what); };
  if (s.steps.size() != inst.horizon())
    fail(std::to_string(s.steps.size()) + " timesteps, instance has " + std::to_string(inst.horizon()));
  if (s.device_ids.size() != inst.devices.size()) fail("device count");
  if (s.bus_ids.size() != inst.buses.size()) fail("bus count");
  if (s.branch_ids.size() != inst.branches.size()) fail("branch count");
  for (std::size_t j = 0; j < inst.devices.size(); ++j)
    if (s.device_ids[j] != inst.devices[j].id) fail("device id " + s.device_ids[j]);
  for (std::size_t i = 0; i < inst.buses.size(); ++i)
    if (s.bus_ids[i] != inst.buses[i].id) fail("bus id " + s.bus_ids[i]);
  for (std::size_t k = 0; k < inst.branches.size(); ++k)
    if (s.branch_ids[k] != inst.branches[k].id) fail("branch id " + s.branch_ids[k]);
  for (std::size_t t = 0; t < s.steps.size(); ++t) {
    const auto& st = s.steps[t];
    if (st.devices.size() != inst.devices.size() || st.buses.size() != inst.buses.size() ||
        st.branch_closed.size() != inst.branches.size())
      fail("entity count at t=" + std::to_string(t));
  }
}

namespace {

const char* kBreakdownKeys[] = {"consumer_benefit", "producer_cost",     "startup_cost",
                                "on_cost",          "shutdown_cost",     "mismatch_penalty",
                                "overload_penalty", "reserve_shortfall_penalty", "total"};

double* breakdown_field(ScoreBreakdown& b, std::size_t i) {
  double* fields[] = {&b.consumer_benefit, &b.producer_cost,    &b.startup_cost,
                      &b.on_cost,          &b.shutdown_cost,    &b.mismatch_penalty,
                      &b.overload_penalty, &b.reserve_shortfall_penalty, &b.total};
  return fields[i];
}

void require_finite(double v, const std::string& where) {
  if (!std::isfinite(v)) throw ContractError("non-finite value at " + where);
}

}  // namespace

std::string write_solution(const Solution& s, const Instance& inst) {
  check_solution_shape(s, inst);
  ordered_json doc;
  ordered_json obj;
  ScoreBreakdown b = s.objective;
  for (std::size_t i = 0; i < std::size(kBreakdownKeys); ++i) {
    double v = *breakdown_field(b, i);
    require_finite(v, std::string("objective.") + kBreakdownKeys[i]);
    obj[kBreakdownKeys[i]] = v;
  }
  doc["objective"] = std::move(obj);
  doc["flags"] = s.flags;
  ordered_json steps = ordered_json::array();
  for (std::size_t t = 0; t < s.steps.size(); ++t) {
    const auto& st = s.steps[t];
    std::string where = "timesteps[" + std::to_string(t) + "]";
    ordered_json devices = ordered_json::object();
    for (std::size_t j = 0; j < st.devices.size(); ++j) {
      const auto& d = st.devices[j];
      for (double v : {d.p, d.q, d.reserve_up, d.reserve_down}) require_finite(v, where + "." + s.device_ids[j]);
      devices[s.device_ids[j]] = {{"p", d.p},           {"q", d.q},
                                  {"on", d.on},         {"start", d.start},
                                  {"stop", d.stop},     {"reserve_up", d.reserve_up},
                                  {"reserve_down", d.reserve_down}};
    }
    ordered_json buses = ordered_json::object();
    for (std::size_t i = 0; i < st.buses.size(); ++i) {
      require_finite(st.buses[i].v, where + "." + s.bus_ids[i]);
      require_finite(st.buses[i].theta, where + "." + s.bus_ids[i]);
      buses[s.bus_ids[i]] = {{"v", st.buses[i].v}, {"theta", st.buses[i].theta}};
    }
    ordered_json branches = ordered_json::object();
    for (std::size_t k = 0; k < st.branch_closed.size(); ++k)
      branches[s.branch_ids[k]] = {{"closed", static_cast<bool>(st.branch_closed[k])}};
    steps.push_back({{"t", t}, {"devices", std::move(devices)}, {"buses", std::move(buses)},
                     {"branches", std::move(branches)}});
  }
  doc["timesteps"] = std::move(steps);
  return doc.dump(1) + "\n";
}

Solution read_solution(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text.begin(), text.end());
  } catch (const ordered_json::exception& e) {
    throw SchemaError("$", std::string("malformed document: ") + e.what());
  }
  auto num = [](const ordered_json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError(path, "expected number");
    return j.get<double>();
  };
  auto boolean = [](const ordered_json& j, const std::string& path) {
    if (!j.is_boolean()) throw SchemaError(path, "expected boolean");
    return j.get<bool>();
  };
  auto field = [](const ordered_json& j, const char* key, const std::string& path) -> const ordered_json& {
    if (!j.is_object()) throw SchemaError(path, "expected object");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path + "." + key, "missing field");
    return *it;
  };

  Solution s;
  const auto& obj = field(doc, "objective", "");
  for (std::size_t i = 0; i < std::size(kBreakdownKeys); ++i)
    *breakdown_field(s.objective, i) =
        num(field(obj, kBreakdownKeys[i], "objective"), std::string("objective.") + kBreakdownKeys[i]);
  if (doc.contains("flags")) {
    const auto& flags = doc["flags"];
    if (!flags.is_array()) throw SchemaError("flags", "expected array");
    for (const auto& f : flags) {
      if (!f.is_string()) throw SchemaError("flags", "expected string");
      s.flags.push_back(f.get<std::string>());
    }
  }
  const auto& steps = field(doc, "timesteps", "");
  if (!steps.is_array()) throw SchemaError("timesteps", "expected array");
  for (std::size_t t = 0; t < steps.size(); ++t) {
    std::string path = "timesteps[" + std::to_string(t) + "]";
    const auto& st = steps[t];
    SolutionStep step;
    const auto& devices = field(st, "devices", path);
    const auto& buses = field(st, "buses", path);
    const auto& branches = field(st, "branches", path);
    if (!devices.is_object() || !buses.is_object() || !branches.is_object())
      throw SchemaError(path, "expected entity maps");
    std::vector<std::string> dev_ids, bus_ids, br_ids;
    for (auto it = devices.begin(); it != devices.end(); ++it) {
      std::string p = path + ".devices." + it.key();
      DeviceStep d;
      d.p = num(field(*it, "p", p), p + ".p");
      d.q = num(field(*it, "q", p), p + ".q");
      d.on = boolean(field(*it, "on", p), p + ".on");
      d.start = boolean(field(*it, "start", p), p + ".start");
      d.stop = boolean(field(*it, "stop", p), p + ".stop");
      d.reserve_up = num(field(*it, "reserve_up", p), p + ".reserve_up");
      d.reserve_down = num(field(*it, "reserve_down", p), p + ".reserve_down");
      step.devices.push_back(d);
      dev_ids.push_back(it.key());
    }
    for (auto it = buses.begin(); it != buses.end(); ++it) {
      std::string p = path + ".buses." + it.key();
      step.buses.push_back({num(field(*it, "v", p), p + ".v"), num(field(*it, "theta", p), p + ".theta")});
      bus_ids.push_back(it.key());
    }
    for (auto it = branches.begin(); it != branches.end(); ++it) {
      std::string p = path + ".branches." + it.key();
      step.branch_closed.push_back(boolean(field(*it, "closed", p), p + ".closed"));
      br_ids.push_back(it.key());
    }
    if (t == 0) {
      s.device_ids = std::move(dev_ids);
      s.bus_ids = std::move(bus_ids);
      s.branch_ids = std::move(br_ids);
    } else if (dev_ids != s.device_ids || bus_ids != s.bus_ids || br_ids != s.branch_ids) {
      throw SchemaError(path, "entity ids differ from first timestep");
    }
    s.steps.push_back(std::move(step));
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

}  // namespace scopf
