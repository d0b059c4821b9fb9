#include "nashflow/potential.hpp"

#include <algorithm>

#include "nashflow/steady_state.hpp"

namespace nashflow {

PseudoBounds pseudo_bounds(const Instance& inst) {
  PseudoBounds b;
  std::vector<Rat> caps{inst.inflow};
  for (const auto& a : inst.arcs) caps.push_back(a.capacity);
  b.K = lcm_of_denominators(caps);
  b.M = Rat(0);
  b.T = Rat(0);
  for (const auto& a : inst.arcs) {
    b.M += a.capacity;
    b.T += a.delay + a.initial_queue / a.capacity;
  }
  Rat k{mpz_class(b.K)};
  b.time_bound = Rat(2) * k * k * b.M * b.M * b.T;
  b.queue_bound = Rat(2) * inst.inflow * k * k * k * b.M * b.M * b.T;
  return b;
}

Rat phi(const Instance& inst, const Snapshot& snap) {
  Rat total = inst.inflow * (snap.label(inst.sink) - snap.label(inst.source));
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) total -= snap.entry_queues[i];
  return total;
}

Rat phi_rate(const Instance& inst, const ArcClassification& cls, const InstantDerivatives& d) {
  Rat rate = inst.inflow * (d.label_deriv[static_cast<std::size_t>(inst.sink)] -
                            d.label_deriv[static_cast<std::size_t>(inst.source)]);
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    const Arc& a = inst.arcs[i];
    bool in_plus = cls.queued[i] || (cls.active[i] && d.flow_deriv[i].sign() > 0);
    if (!in_plus) continue;
    rate -= a.capacity * (d.label_deriv[static_cast<std::size_t>(a.head)] -
                          d.label_deriv[static_cast<std::size_t>(a.tail)]);
  }
  return rate;
}

Rat phi_rate_oracle(const Instance& inst, const ArcClassification& cls, const InstantDerivatives& d) {
  // Arcs of the circulation: E+ = E* plus flow-carrying active arcs, plus the
  // sink-to-source return arc of capacity u0.
  struct Edge {
    Rat lv, lw, cap;
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    const Arc& a = inst.arcs[i];
    bool in_plus = cls.queued[i] || (cls.active[i] && d.flow_deriv[i].sign() > 0);
    if (!in_plus) continue;
    edges.push_back({d.label_deriv[static_cast<std::size_t>(a.tail)],
                     d.label_deriv[static_cast<std::size_t>(a.head)], a.capacity});
  }
  edges.push_back({d.label_deriv[static_cast<std::size_t>(inst.sink)],
                   d.label_deriv[static_cast<std::size_t>(inst.source)], inst.inflow});

  std::vector<Rat> levels{Rat(0)};
  for (std::size_t v = 0; v < inst.nodes.size(); ++v) levels.push_back(d.label_deriv[v]);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  Rat integral(0);
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    // On (levels[k], levels[k+1]) the sub-level set V_z is constant; an edge
    // crosses out of it iff lv <= levels[k] < lw, into it iff lw <= levels[k] < lv.
    const Rat& z = levels[k];
    Rat imbalance(0);
    for (const Edge& e : edges) {
      if (e.lv <= z && z < e.lw) imbalance += e.cap;
      if (e.lw <= z && z < e.lv) imbalance -= e.cap;
    }
    integral += (levels[k + 1] - z) * imbalance;
  }
  return -integral;
}

PotentialTrace potential_trace(const Trajectory& traj) {
  PotentialTrace tr;
  for (const Phase& ph : traj.phases)
    tr.points.push_back({ph.theta_start, phi(traj.instance, ph.start),
                         phi_rate(traj.instance, ph.classification, ph.derivs)});
  CutReport cut = min_queuing_cut(traj.instance);
  if (traj.instance.inflow <= cut.capacity) tr.alpha = solve_primal(traj.instance).cost;
  return tr;
}

}  // namespace nashflow
