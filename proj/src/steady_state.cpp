#include "nashflow/steady_state.hpp"

#include <stdexcept>

#include "nashflow/maxflow.hpp"

namespace nashflow {

namespace {

struct ResidualEdge {
  int to;
  Rat cap;
  Rat cost;
  std::size_t rev;
};

}  // namespace

SteadyFlow solve_primal(const Instance& inst) {
  std::size_t n = inst.nodes.size();
  std::vector<std::vector<ResidualEdge>> g(n);
  std::vector<std::pair<int, std::size_t>> arc_edge;
  for (const Arc& a : inst.arcs) {
    auto& fwd = g[static_cast<std::size_t>(a.tail)];
    auto& bwd = g[static_cast<std::size_t>(a.head)];
    fwd.push_back({a.head, a.capacity, a.delay, bwd.size()});
    bwd.push_back({a.tail, Rat(0), -a.delay, fwd.size() - 1});
    arc_edge.push_back({a.tail, fwd.size() - 1});
  }

  Rat remaining = inst.inflow;
  SteadyFlow out;
  out.cost = Rat(0);
  while (remaining.sign() > 0) {
    // Bellman-Ford on the residual network (costs may be negative on
    // reverse edges; no negative cycles since augmentations use shortest paths).
    std::vector<std::optional<Rat>> dist(n);
    std::vector<std::pair<int, int>> pred(n, {-1, -1});
    dist[static_cast<std::size_t>(inst.source)] = Rat(0);
    for (std::size_t round = 0; round + 1 < n || round == 0; ++round) {
      bool any = false;
      for (std::size_t v = 0; v < n; ++v) {
        if (!dist[v]) continue;
        for (std::size_t k = 0; k < g[v].size(); ++k) {
          const ResidualEdge& e = g[v][k];
          if (e.cap.sign() <= 0) continue;
          Rat nd = *dist[v] + e.cost;
          auto& dw = dist[static_cast<std::size_t>(e.to)];
          if (!dw || nd < *dw) {
            dw = nd;
            pred[static_cast<std::size_t>(e.to)] = {static_cast<int>(v), static_cast<int>(k)};
            any = true;
          }
        }
      }
      if (!any) break;
    }
    if (!dist[static_cast<std::size_t>(inst.sink)])
      throw std::runtime_error("steady flow infeasible: inflow exceeds the minimum queuing capacity");

    Rat push = remaining;
    for (int v = inst.sink; v != inst.source;) {
      auto [pv, pk] = pred[static_cast<std::size_t>(v)];
      push = min(push, g[static_cast<std::size_t>(pv)][static_cast<std::size_t>(pk)].cap);
      v = pv;
    }
    for (int v = inst.sink; v != inst.source;) {
      auto [pv, pk] = pred[static_cast<std::size_t>(v)];
      ResidualEdge& e = g[static_cast<std::size_t>(pv)][static_cast<std::size_t>(pk)];
      e.cap -= push;
      g[static_cast<std::size_t>(e.to)][e.rev].cap += push;
      out.cost += push * e.cost;
      v = pv;
    }
    remaining -= push;
  }

  out.flow.assign(inst.arcs.size(), Rat(0));
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    auto [v, k] = arc_edge[i];
    out.flow[i] = inst.arcs[i].capacity - g[static_cast<std::size_t>(v)][static_cast<std::size_t>(k)].cap;
  }
  return out;
}

DualSolution extract_dual(const Instance& inst, const SteadyFlow& primal) {
  // Shortest distances from the source where saturated arcs stay usable at a
  // surcharge larger than any path cost; the surcharge surfaces as q_e > 0
  // exactly on saturated arcs.
  std::size_t n = inst.nodes.size();
  Rat big(1);
  for (const Arc& a : inst.arcs) big += a.delay;
  struct E {
    int from, to;
    Rat cost;
  };
  std::vector<E> edges;
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    const Arc& a = inst.arcs[i];
    if (primal.flow[i] < a.capacity) edges.push_back({a.tail, a.head, a.delay});
    else edges.push_back({a.tail, a.head, a.delay + big});
    if (primal.flow[i].sign() > 0) edges.push_back({a.head, a.tail, -a.delay});
  }
  std::vector<std::optional<Rat>> dist(n);
  dist[static_cast<std::size_t>(inst.source)] = Rat(0);
  for (std::size_t round = 0; round < n; ++round) {
    bool any = false;
    for (const E& e : edges) {
      if (!dist[static_cast<std::size_t>(e.from)]) continue;
      Rat nd = *dist[static_cast<std::size_t>(e.from)] + e.cost;
      auto& dw = dist[static_cast<std::size_t>(e.to)];
      if (!dw || nd < *dw) {
        dw = nd;
        any = true;
      }
    }
    if (!any) break;
  }

  DualSolution dual;
  dual.dist.assign(n, Rat(0));
  for (std::size_t v = 0; v < n; ++v) {
    if (!dist[v]) throw std::logic_error("dual extraction: node unreachable in surcharge graph");
    dual.dist[v] = *dist[v];
  }
  dual.queue_time.assign(inst.arcs.size(), Rat(0));
  dual.objective = inst.inflow * dual.dist[static_cast<std::size_t>(inst.sink)];
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    const Arc& a = inst.arcs[i];
    Rat gap = dual.dist[static_cast<std::size_t>(a.head)] - dual.dist[static_cast<std::size_t>(a.tail)] - a.delay;
    if (gap.sign() > 0) dual.queue_time[i] = gap;
    dual.objective -= a.capacity * dual.queue_time[i];
  }
  return dual;
}

bool verify_optimal_pair(const Instance& inst, const SteadyFlow& flow, const DualSolution& dual) {
  if (flow.flow.size() != inst.arcs.size() || dual.queue_time.size() != inst.arcs.size() ||
      dual.dist.size() != inst.nodes.size())
    return false;
  if (!dual.dist[static_cast<std::size_t>(inst.source)].is_zero()) return false;

  // Primal feasibility: capacities and conservation of value u0.
  for (std::size_t v = 0; v < inst.nodes.size(); ++v) {
    Rat net(0);
    for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
      if (flow.flow[i].sign() < 0 || flow.flow[i] > inst.arcs[i].capacity) return false;
      if (inst.arcs[i].tail == static_cast<int>(v)) net += flow.flow[i];
      if (inst.arcs[i].head == static_cast<int>(v)) net -= flow.flow[i];
    }
    Rat want(0);
    if (static_cast<int>(v) == inst.source) want = inst.inflow;
    if (static_cast<int>(v) == inst.sink) want = -inst.inflow;
    if (net != want) return false;
  }
  Rat cost(0);
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) cost += inst.arcs[i].delay * flow.flow[i];
  if (cost != flow.cost) return false;

  // Dual feasibility and complementary slackness.
  Rat objective = inst.inflow * dual.dist[static_cast<std::size_t>(inst.sink)];
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    const Arc& a = inst.arcs[i];
    const Rat& q = dual.queue_time[i];
    if (q.sign() < 0) return false;
    Rat slack = dual.dist[static_cast<std::size_t>(a.tail)] + a.delay + q -
                dual.dist[static_cast<std::size_t>(a.head)];
    if (slack.sign() < 0) return false;
    if (q.sign() > 0 && flow.flow[i] != a.capacity) return false;
    if (flow.flow[i].sign() > 0 && !slack.is_zero()) return false;
    objective -= a.capacity * q;
  }
  if (objective != dual.objective) return false;
  return objective == flow.cost;
}

SteadyReport steady_report(const Trajectory& traj) {
  if (traj.status != TrajectoryStatus::SteadyState || traj.phases.empty() || !traj.steady_theta)
    throw std::invalid_argument("steady_report: trajectory did not reach a steady state");
  const Instance& inst = traj.instance;
  const Phase& last = traj.phases.back();

  SteadyReport rep;
  rep.steady_theta = *traj.steady_theta;
  rep.steady_queues = last.start.entry_queues;
  rep.steady_queue_times.assign(inst.arcs.size(), Rat(0));
  for (std::size_t i = 0; i < inst.arcs.size(); ++i)
    rep.steady_queue_times[i] = rep.steady_queues[i] / inst.arcs[i].capacity;
  rep.label_offsets.assign(inst.nodes.size(), Rat(0));
  for (std::size_t v = 0; v < inst.nodes.size(); ++v)
    if (last.start.labels[v].has_value())
      rep.label_offsets[v] = *last.start.labels[v] - last.theta_start;

  rep.max_transient_queue.assign(inst.arcs.size(), Rat(0));
  for (const Phase& ph : traj.phases)
    for (std::size_t i = 0; i < inst.arcs.size(); ++i)
      rep.max_transient_queue[i] = max(rep.max_transient_queue[i], ph.start.entry_queues[i]);

  rep.lp_primal = solve_primal(inst);
  rep.lp_dual = extract_dual(inst, rep.lp_primal);

  // Dual candidate read off the simulation.
  DualSolution sim;
  sim.dist = rep.label_offsets;
  sim.queue_time = rep.steady_queue_times;
  sim.objective = inst.inflow * sim.dist[static_cast<std::size_t>(inst.sink)];
  for (std::size_t i = 0; i < inst.arcs.size(); ++i)
    sim.objective -= inst.arcs[i].capacity * sim.queue_time[i];
  rep.simulated_dual_objective = sim.objective;

  rep.dual_feasible = true;
  if (!sim.dist[static_cast<std::size_t>(inst.source)].is_zero()) rep.dual_feasible = false;
  for (std::size_t i = 0; i < inst.arcs.size() && rep.dual_feasible; ++i) {
    const Arc& a = inst.arcs[i];
    if (!traj.initial.reachable(a.tail)) continue;
    if (sim.queue_time[i].sign() < 0 ||
        sim.dist[static_cast<std::size_t>(a.head)] >
            sim.dist[static_cast<std::size_t>(a.tail)] + a.delay + sim.queue_time[i])
      rep.dual_feasible = false;
  }
  rep.dual_optimal = rep.dual_feasible && sim.objective == rep.lp_primal.cost;

  Rat steady_cost(0);
  for (std::size_t i = 0; i < inst.arcs.size(); ++i)
    steady_cost += inst.arcs[i].delay * last.derivs.flow_deriv[i];
  rep.matches_lp_objective = steady_cost == rep.lp_primal.cost;
  return rep;
}

}  // namespace nashflow
