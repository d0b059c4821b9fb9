#include "nashflow/instance.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

#include "nashflow/maxflow.hpp"
#include "json.hpp"

namespace nashflow {

using json = nlohmann::ordered_json;

int Instance::node_index(const std::string& id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == id) return static_cast<int>(i);
  return -1;
}

int Instance::arc_index(const std::string& id) const {
  for (std::size_t i = 0; i < arcs.size(); ++i)
    if (arcs[i].id == id) return static_cast<int>(i);
  return -1;
}

std::vector<int> Instance::out_arcs(int v) const {
  std::vector<int> r;
  for (std::size_t i = 0; i < arcs.size(); ++i)
    if (arcs[i].tail == v) r.push_back(static_cast<int>(i));
  return r;
}

std::vector<int> Instance::in_arcs(int v) const {
  std::vector<int> r;
  for (std::size_t i = 0; i < arcs.size(); ++i)
    if (arcs[i].head == v) r.push_back(static_cast<int>(i));
  return r;
}

namespace {

Rat parse_rat_field(const json& j, const std::string& what) {
  if (j.is_number_integer())
    return Rat(static_cast<long>(j.get<long long>()));
  if (j.is_string()) {
    try {
      return Rat::parse(j.get<std::string>());
    } catch (const std::exception& e) {
      throw std::runtime_error(what + ": " + e.what());
    }
  }
  throw std::runtime_error(what + ": expected rational string or integer");
}

}  // namespace

Instance parse_instance(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("instance is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("instance must be a JSON object");

  Instance inst;
  if (!j.contains("nodes") || !j["nodes"].is_array())
    throw std::runtime_error("missing or invalid 'nodes' array");
  std::set<std::string> seen_nodes;
  for (const auto& n : j["nodes"]) {
    if (!n.is_string()) throw std::runtime_error("node ids must be strings");
    std::string id = n.get<std::string>();
    if (!seen_nodes.insert(id).second)
      throw std::runtime_error("duplicate node id '" + id + "'");
    inst.nodes.push_back(id);
  }
  if (!j.contains("source") || !j["source"].is_string())
    throw std::runtime_error("missing source");
  if (!j.contains("sink") || !j["sink"].is_string())
    throw std::runtime_error("missing sink");
  inst.source = inst.node_index(j["source"].get<std::string>());
  inst.sink = inst.node_index(j["sink"].get<std::string>());
  if (inst.source < 0) throw std::runtime_error("unknown source node '" + j["source"].get<std::string>() + "'");
  if (inst.sink < 0) throw std::runtime_error("unknown sink node '" + j["sink"].get<std::string>() + "'");
  if (!j.contains("inflow")) throw std::runtime_error("missing inflow");
  inst.inflow = parse_rat_field(j["inflow"], "inflow");

  if (!j.contains("arcs") || !j["arcs"].is_array())
    throw std::runtime_error("missing or invalid 'arcs' array");
  std::set<std::string> seen_arcs;
  for (const auto& a : j["arcs"]) {
    if (!a.is_object()) throw std::runtime_error("arc entries must be objects");
    Arc arc;
    for (const char* k : {"id", "tail", "head", "capacity", "delay"})
      if (!a.contains(k)) throw std::runtime_error(std::string("arc missing field '") + k + "'");
    arc.id = a["id"].get<std::string>();
    if (!seen_arcs.insert(arc.id).second)
      throw std::runtime_error("duplicate arc id '" + arc.id + "'");
    arc.tail = inst.node_index(a["tail"].get<std::string>());
    arc.head = inst.node_index(a["head"].get<std::string>());
    if (arc.tail < 0) throw std::runtime_error("arc '" + arc.id + "': unknown tail node '" + a["tail"].get<std::string>() + "'");
    if (arc.head < 0) throw std::runtime_error("arc '" + arc.id + "': unknown head node '" + a["head"].get<std::string>() + "'");
    arc.capacity = parse_rat_field(a["capacity"], "arc '" + arc.id + "' capacity");
    arc.delay = parse_rat_field(a["delay"], "arc '" + arc.id + "' delay");
    arc.initial_queue = a.contains("initial_queue")
                            ? parse_rat_field(a["initial_queue"], "arc '" + arc.id + "' initial_queue")
                            : Rat(0);
    inst.arcs.push_back(std::move(arc));
  }
  if (j.contains("metadata")) inst.metadata_json = j["metadata"].dump();
  return inst;
}

std::string emit_instance(const Instance& inst) {
  json j;
  j["nodes"] = json::array();
  for (const auto& n : inst.nodes) j["nodes"].push_back(n);
  j["source"] = inst.node_id(inst.source);
  j["sink"] = inst.node_id(inst.sink);
  j["inflow"] = inst.inflow.str();
  j["arcs"] = json::array();
  for (const auto& a : inst.arcs) {
    json ja;
    ja["id"] = a.id;
    ja["tail"] = inst.node_id(a.tail);
    ja["head"] = inst.node_id(a.head);
    ja["capacity"] = a.capacity.str();
    ja["delay"] = a.delay.str();
    if (!a.initial_queue.is_zero()) ja["initial_queue"] = a.initial_queue.str();
    j["arcs"].push_back(std::move(ja));
  }
  if (!inst.metadata_json.empty()) j["metadata"] = json::parse(inst.metadata_json);
  return j.dump(2) + "\n";
}

namespace {

// Reachability over a filtered arc set.
std::vector<bool> reachable_from(const Instance& inst, int start, bool forward,
                                 const std::vector<bool>* arc_mask = nullptr) {
  std::vector<bool> seen(inst.nodes.size(), false);
  std::queue<int> q;
  seen[static_cast<std::size_t>(start)] = true;
  q.push(start);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
      if (arc_mask && !(*arc_mask)[i]) continue;
      const Arc& a = inst.arcs[i];
      int from = forward ? a.tail : a.head;
      int to = forward ? a.head : a.tail;
      if (from == v && !seen[static_cast<std::size_t>(to)]) {
        seen[static_cast<std::size_t>(to)] = true;
        q.push(to);
      }
    }
  }
  return seen;
}

// Detects a directed cycle among zero-delay arcs.
bool has_zero_delay_cycle(const Instance& inst, std::vector<std::string>* cycle_nodes) {
  int n = static_cast<int>(inst.nodes.size());
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& a : inst.arcs)
    if (a.delay.is_zero()) adj[static_cast<std::size_t>(a.tail)].push_back(a.head);
  std::vector<int> state(static_cast<std::size_t>(n), 0);  // 0 new, 1 on stack, 2 done
  std::vector<int> stack;
  // Iterative DFS with an explicit stack of (node, next-child) frames.
  for (int r = 0; r < n; ++r) {
    if (state[static_cast<std::size_t>(r)] != 0) continue;
    std::vector<std::pair<int, std::size_t>> frames{{r, 0}};
    state[static_cast<std::size_t>(r)] = 1;
    stack.push_back(r);
    while (!frames.empty()) {
      auto& [v, ci] = frames.back();
      if (ci < adj[static_cast<std::size_t>(v)].size()) {
        int w = adj[static_cast<std::size_t>(v)][ci++];
        if (state[static_cast<std::size_t>(w)] == 1) {
          if (cycle_nodes) {
            cycle_nodes->clear();
            auto it = std::find(stack.begin(), stack.end(), w);
            for (; it != stack.end(); ++it) cycle_nodes->push_back(inst.node_id(*it));
          }
          return true;
        }
        if (state[static_cast<std::size_t>(w)] == 0) {
          state[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
          frames.push_back({w, 0});
        }
      } else {
        state[static_cast<std::size_t>(v)] = 2;
        stack.pop_back();
        frames.pop_back();
      }
    }
  }
  return false;
}

}  // namespace

Validation validate(const Instance& inst) {
  Validation v;
  if (inst.nodes.empty()) v.errors.push_back("instance has no nodes");
  if (inst.source == inst.sink)
    v.errors.push_back("source and sink must differ");
  if (inst.inflow.sign() <= 0) v.errors.push_back("inflow must be positive");
  for (const auto& a : inst.arcs) {
    if (a.capacity.sign() <= 0)
      v.errors.push_back("arc '" + a.id + "': capacity must be positive");
    if (a.delay.sign() < 0)
      v.errors.push_back("arc '" + a.id + "': delay must be nonnegative");
    if (a.initial_queue.sign() < 0)
      v.errors.push_back("arc '" + a.id + "': initial_queue must be nonnegative");
  }
  std::vector<std::string> cyc;
  if (has_zero_delay_cycle(inst, &cyc)) {
    std::string msg = "zero-delay cycle through nodes:";
    for (const auto& n : cyc) msg += " " + n;
    v.errors.push_back(msg);
  }
  if (!v.errors.empty()) return v;

  auto from_s = reachable_from(inst, inst.source, true);
  auto to_t = reachable_from(inst, inst.sink, false);
  if (!from_s[static_cast<std::size_t>(inst.sink)])
    v.errors.push_back("sink unreachable from source");
  for (std::size_t i = 0; i < inst.nodes.size(); ++i) {
    if (static_cast<int>(i) == inst.source || static_cast<int>(i) == inst.sink) continue;
    if (!from_s[i])
      v.warnings.push_back("node '" + inst.nodes[i] + "' unreachable from source");
  }
  for (const auto& a : inst.arcs) {
    bool on_path = from_s[static_cast<std::size_t>(a.tail)] && to_t[static_cast<std::size_t>(a.head)];
    if (!on_path)
      v.warnings.push_back("arc '" + a.id + "' lies on no source-sink path");
  }
  return v;
}

void require_valid(const Instance& inst) {
  Validation v = validate(inst);
  if (!v.ok()) {
    std::string msg = "invalid instance:";
    for (const auto& e : v.errors) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }
}

std::string instance_digest(const Instance& inst) {
  std::string text = emit_instance(inst);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CutReport min_queuing_cut(const Instance& inst) {
  MaxFlow mf(static_cast<int>(inst.nodes.size()), inst.source, inst.sink);
  for (const auto& a : inst.arcs) mf.add_arc(a.tail, a.head, a.capacity);
  CutReport r;
  r.capacity = mf.solve();
  auto side = mf.residual_source_side();
  for (std::size_t v = 0; v < inst.nodes.size(); ++v)
    if (side[v]) r.source_side.push_back(static_cast<int>(v));
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    const Arc& a = inst.arcs[i];
    if (side[static_cast<std::size_t>(a.tail)] && !side[static_cast<std::size_t>(a.head)])
      r.cut_arcs.push_back(static_cast<int>(i));
  }
  return r;
}

}  // namespace nashflow
