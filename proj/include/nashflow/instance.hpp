#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nashflow/rational.hpp"

namespace nashflow {

// One arc of a fluid queuing network: a FIFO fluid queue of capacity
// `capacity` followed by a link of constant delay `delay`. `initial_queue`
// is the queue volume (flow x time units) present at time zero.
struct Arc {
  std::string id;
  int tail = -1;
  int head = -1;
  Rat capacity;
  Rat delay;
  Rat initial_queue;
};

// Single-commodity fluid queuing network with constant inflow at the source.
// Immutable after construction; node/arc order is the file order and is the
// canonical iteration order everywhere (determinism).
struct Instance {
  std::vector<std::string> nodes;
  std::vector<Arc> arcs;
  int source = -1;
  int sink = -1;
  Rat inflow;
  std::string metadata_json;  // optional free-form block, preserved verbatim

  int node_index(const std::string& id) const;
  const std::string& node_id(int v) const { return nodes[static_cast<std::size_t>(v)]; }
  int arc_index(const std::string& id) const;

  std::vector<int> out_arcs(int v) const;
  std::vector<int> in_arcs(int v) const;
};

struct Validation {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

// Parses the JSON instance format (see README). Throws std::runtime_error
// with a descriptive message on malformed input; structural rules that are
// data-dependent (positivity, cycles, reachability) are left to validate().
Instance parse_instance(const std::string& text);

// Canonical serialization; parse_instance(emit_instance(x)) == x bit-exact.
std::string emit_instance(const Instance& inst);

// Checks all instance invariants: positive capacities and inflow, nonnegative
// delays and initial queues, distinct source/sink, zero-delay cycles
// (rejected), and s->t usefulness of every arc (flagged as warnings).
Validation validate(const Instance& inst);

// Throws std::runtime_error listing all violations unless validate() passes.
void require_valid(const Instance& inst);

// FNV-1a 64-bit over the canonical serialization, as a reproducibility digest.
std::string instance_digest(const Instance& inst);

// Minimum queuing capacity cut. `source_side` is the setwise-minimal
// minimizer containing the source.
struct CutReport {
  Rat capacity;                 // nu-bar
  std::vector<int> cut_arcs;    // arcs leaving source_side
  std::vector<int> source_side;
};

// Exact max-flow value of the network under capacities nu_e equals the
// minimum queuing capacity over all s->t cuts; the source side is the set of
// nodes reachable from s in the residual graph of a maximum flow.
CutReport min_queuing_cut(const Instance& inst);

}  // namespace nashflow
