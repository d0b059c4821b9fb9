#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nashflow/instance.hpp"
#include "nashflow/snapshot.hpp"

namespace nashflow {

// One arc of a thin-flow problem. `reset` marks arcs whose queue is positive,
// where the label derivative of the head is driven by x'/nu alone.
struct TFArc {
  int orig = -1;  // instance arc index (or caller key), for mapping back
  int tail = 0;
  int head = 0;
  Rat capacity;
  bool reset = false;
};

// The derivative system for one phase: the current shortest-path network E'
// (as the arc list), the resetting subset E* (reset flags), capacities, and
// the inflow. Entry label generalizes the normalization ell'_s = 1 so that
// sub-networks can be solved in series.
struct ThinFlowProblem {
  int num_nodes = 0;
  int source = 0;
  int sink = 0;
  Rat inflow;
  Rat entry_label = Rat(1);
  std::vector<TFArc> arcs;
  std::vector<std::string> node_names;  // optional, diagnostics
  std::vector<std::string> arc_names;   // optional, lexicographic flow tie-break
  std::vector<int> orig_node;           // instance node index per problem node

  static ThinFlowProblem from_classification(const Instance& inst, const Snapshot& snap,
                                             const ArcClassification& cls);

  std::string node_name(int v) const;
  std::string arc_name(int e) const;
};

struct ThinFlow {
  std::vector<Rat> label_deriv;  // per problem node
  std::vector<Rat> flow_deriv;   // per problem arc
};

// Cache of solved series-parallel component structures, keyed by component
// shape; one per equilibrium run. Opaque to callers.
struct NtfrCache;
using NtfrCachePtr = std::shared_ptr<NtfrCache>;
NtfrCachePtr make_ntfr_cache();

struct NtfrOptions {
  enum class Method {
    Auto,       // series decomposition + SP solve, enumeration for the rest
    Enumerate,  // force pattern enumeration everywhere
  };
  Method method = Method::Auto;
  // Enumeration-order knobs; the label derivatives are unique, so any order
  // must produce the same labels (tested), and flows are normalized
  // separately to the lexicographically smallest vector.
  bool reverse_enum_order = false;
  int state_rotation = 0;
  int max_enum_arcs = 18;
  NtfrCachePtr cache;
};

// Solves the normalized thin flow with resetting. The label component is the
// unique one; the flow component is the lexicographically smallest (by arc
// name) among flows compatible with those labels. Arcs not on any source-sink
// path within E' carry zero flow and get labels from the zero-flow recursion.
// Throws if E' has no source-sink path or a node unreachable from the source.
ThinFlow solve_ntfr(const ThinFlowProblem& prob, const NtfrOptions& opts = {});

// Exact check of all NTFR conditions; empty list iff `cand` is a valid
// solution. Violations name the offending node/arc.
std::vector<std::string> verify_ntfr(const ThinFlowProblem& prob, const ThinFlow& cand);

}  // namespace nashflow
