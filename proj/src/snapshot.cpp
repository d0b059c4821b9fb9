#include "nashflow/snapshot.hpp"

#include <queue>
#include <stdexcept>

namespace nashflow {

Rat exit_time(const Rat& entry, const Rat& queue, const Arc& arc) {
  if (queue.sign() < 0) throw std::invalid_argument("exit_time: negative queue");
  return entry + queue / arc.capacity + arc.delay;
}

Snapshot initial_snapshot(const Instance& inst) {
  Snapshot snap;
  snap.theta = Rat(0);
  snap.labels.assign(inst.nodes.size(), std::nullopt);
  snap.entry_queues.assign(inst.arcs.size(), Rat(0));
  snap.static_flows.assign(inst.arcs.size(), Rat(0));

  // Dijkstra with exact rational keys; arc cost tau_e + z_e(0)/nu_e.
  using Item = std::pair<Rat, int>;
  auto cmp = [](const Item& a, const Item& b) { return b.first < a.first; };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> pq(cmp);
  std::vector<bool> done(inst.nodes.size(), false);
  snap.labels[static_cast<std::size_t>(inst.source)] = Rat(0);
  pq.push({Rat(0), inst.source});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (done[static_cast<std::size_t>(v)]) continue;
    done[static_cast<std::size_t>(v)] = true;
    for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
      const Arc& a = inst.arcs[i];
      if (a.tail != v) continue;
      Rat nd = exit_time(d, a.initial_queue, a);
      auto& lab = snap.labels[static_cast<std::size_t>(a.head)];
      if (!lab.has_value() || nd < *lab) {
        lab = nd;
        pq.push({nd, a.head});
      }
    }
  }
  if (!snap.reachable(inst.sink)) throw std::runtime_error("sink unreachable from source");

  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    const Arc& a = inst.arcs[i];
    if (!snap.reachable(a.tail)) {
      if (a.initial_queue.sign() > 0)
        throw std::runtime_error("arc '" + a.id + "': initial queue on arc unreachable from source");
      continue;
    }
    snap.entry_queues[i] = a.initial_queue;
  }
  // Positive initial queues must sit on shortest-path arcs, otherwise the
  // entry-time queue tracking is not well defined for the equilibrium.
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    const Arc& a = inst.arcs[i];
    if (snap.entry_queues[i].sign() <= 0 || !snap.reachable(a.tail)) continue;
    Rat through = exit_time(snap.label(a.tail), snap.entry_queues[i], a);
    if (through != snap.label(a.head))
      throw std::runtime_error("arc '" + a.id +
                               "': positive initial queue on a non-shortest-path arc is unsupported");
  }
  return snap;
}

ArcClassification classify_arcs(const Instance& inst, const Snapshot& snap) {
  ArcClassification cls;
  cls.active.assign(inst.arcs.size(), false);
  cls.queued.assign(inst.arcs.size(), false);
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    const Arc& a = inst.arcs[i];
    if (!snap.reachable(a.tail)) {
      if (snap.entry_queues[i].sign() != 0)
        throw std::runtime_error("corrupted snapshot: queue on unreachable arc '" + a.id + "'");
      continue;
    }
    const Rat& z = snap.entry_queues[i];
    if (z.sign() < 0)
      throw std::runtime_error("corrupted snapshot: negative queue on arc '" + a.id + "'");
    Rat slack = exit_time(snap.label(a.tail), z, a) - snap.label(a.head);
    if (slack.sign() < 0)
      throw std::runtime_error("corrupted snapshot: negative slack on arc '" + a.id + "'");
    cls.active[i] = slack.is_zero();
    cls.queued[i] = z.sign() > 0;
    if (cls.queued[i] && !cls.active[i])
      throw std::runtime_error("corrupted snapshot: queued inactive arc '" + a.id + "'");
  }
  return cls;
}

}  // namespace nashflow
