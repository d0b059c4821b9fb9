#pragma once

#include <optional>
#include <vector>

#include "nashflow/instance.hpp"

namespace nashflow {

// System state at one source time theta, in the entry-time parametrization:
// entry_queues[e] is z_e evaluated at the local time ell_v(theta) at which a
// particle departing the source at theta enters e = vw. Within a phase this
// quantity evolves linearly, which keeps event detection rational-exact.
struct Snapshot {
  Rat theta;
  std::vector<std::optional<Rat>> labels;  // per node; nullopt = unreachable
  std::vector<Rat> entry_queues;           // per arc, zero for unreachable tails
  std::vector<Rat> static_flows;           // cumulative x_e(theta)

  bool reachable(int v) const { return labels[static_cast<std::size_t>(v)].has_value(); }
  const Rat& label(int v) const { return *labels[static_cast<std::size_t>(v)]; }
};

struct ArcClassification {
  std::vector<bool> active;  // E': tight in the dynamic Bellman recursion
  std::vector<bool> queued;  // E*: positive entry-time queue (subset of E')
};

// Exit time of a particle entering the arc at local time `entry` against
// queue volume z: entry + z/nu + tau.
Rat exit_time(const Rat& entry, const Rat& queue, const Arc& arc);

// Snapshot at theta = 0: labels are earliest arrival times under per-arc cost
// tau_e + z_e(0)/nu_e (Dijkstra), entry queues are the initial queues, static
// flows are zero. Throws if the sink is unreachable or if a positive initial
// queue sits on a non-shortest-path (inactive) arc, which the equilibrium
// model here does not support.
Snapshot initial_snapshot(const Instance& inst);

// Active = arcs whose Bellman slack is exactly zero; queued = positive entry
// queue. Throws on corrupted snapshots (negative slack/queue, or a queued
// inactive arc).
ArcClassification classify_arcs(const Instance& inst, const Snapshot& snap);

}  // namespace nashflow
