#pragma once

#include <vector>

#include "nashflow/rational.hpp"

namespace nashflow {

// Exact max-flow over rational capacities (BFS shortest augmenting paths, so
// the augmentation count is combinatorial and independent of capacity
// magnitudes). Arcs keep their index so callers can map flows back.
class MaxFlow {
 public:
  MaxFlow(int num_nodes, int source, int sink);

  // Returns the arc handle; capacities must be >= 0.
  int add_arc(int tail, int head, const Rat& capacity);

  // Runs (or re-runs, after set_capacity) the computation.
  Rat solve();

  const Rat& flow_on(int arc_handle) const;
  void set_capacity(int arc_handle, const Rat& capacity);

  // Nodes reachable from the source in the residual graph of the last solve;
  // this is the setwise-minimal minimum cut side containing the source.
  std::vector<bool> residual_source_side() const;

 private:
  struct Edge {
    int to;
    Rat cap;   // residual capacity
    int rev;   // index of reverse edge in adj_[to]
    bool forward;
  };
  bool bfs_levels(std::vector<int>& level) const;
  Rat dfs_push(int v, const Rat& limit, std::vector<int>& it, const std::vector<int>& level);

  int n_, s_, t_;
  std::vector<std::vector<Edge>> adj_;
  std::vector<std::pair<int, int>> handles_;  // arc handle -> (node, edge idx)
  std::vector<Rat> original_caps_;
  mutable std::vector<Rat> flow_cache_;
};

}  // namespace nashflow
