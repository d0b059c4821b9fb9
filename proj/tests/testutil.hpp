#pragma once

#include <random>
#include <string>
#include <vector>

#include "nashflow/instance.hpp"
#include "nashflow/thin_flow.hpp"

namespace nashflow::test {

inline Rat Q(const std::string& s) { return Rat::parse(s); }

inline Instance make_instance(std::vector<std::string> nodes, const std::string& source,
                              const std::string& sink, const Rat& inflow,
                              std::vector<std::tuple<std::string, std::string, std::string, Rat, Rat, Rat>> arcs) {
  Instance inst;
  inst.nodes = std::move(nodes);
  inst.inflow = inflow;
  inst.source = inst.node_index(source);
  inst.sink = inst.node_index(sink);
  for (auto& [id, tail, head, cap, delay, q0] : arcs) {
    Arc a;
    a.id = id;
    a.tail = inst.node_index(tail);
    a.head = inst.node_index(head);
    a.capacity = cap;
    a.delay = delay;
    a.initial_queue = q0;
    inst.arcs.push_back(std::move(a));
  }
  return inst;
}

inline Instance single_arc_instance(const Rat& cap, const Rat& delay, const Rat& inflow,
                                    const Rat& q0 = Rat(0)) {
  return make_instance({"s", "t"}, "s", "t", inflow, {{"e", "s", "t", cap, delay, q0}});
}

inline Rat random_positive_rat(std::mt19937_64& rng, long max_num = 6, long max_den = 6) {
  std::uniform_int_distribution<long> num(1, max_num), den(1, max_den);
  return Rat(num(rng), den(rng));
}

// Random thin-flow problem on a small DAG: every node reachable from the
// source, at least one source-sink path, arbitrary resetting subset.
inline ThinFlowProblem random_ntfr_problem(std::mt19937_64& rng, int max_nodes = 6, int max_arcs = 10) {
  std::uniform_int_distribution<int> nn(2, max_nodes);
  int n = nn(rng);
  ThinFlowProblem p;
  p.num_nodes = n;
  p.source = 0;
  p.sink = n - 1;
  p.inflow = random_positive_rat(rng);
  std::uniform_int_distribution<int> coin(0, 3);
  auto add = [&](int a, int b) {
    TFArc e;
    e.orig = static_cast<int>(p.arcs.size());
    e.tail = a;
    e.head = b;
    e.capacity = random_positive_rat(rng);
    e.reset = coin(rng) == 0;
    p.arcs.push_back(e);
  };
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> tail(0, v - 1);
    add(tail(rng), v);
  }
  std::uniform_int_distribution<int> extra(0, max_arcs - n + 1);
  int more = extra(rng);
  for (int i = 0; i < more && static_cast<int>(p.arcs.size()) < max_arcs; ++i) {
    std::uniform_int_distribution<int> a(0, n - 2);
    int t0 = a(rng);
    std::uniform_int_distribution<int> b(t0 + 1, n - 1);
    add(t0, b(rng));
  }
  return p;
}

// Random two-terminal series-parallel problem, for solver cross-checks.
inline ThinFlowProblem random_sp_problem(std::mt19937_64& rng, int max_leaves = 12) {
  ThinFlowProblem p;
  p.inflow = random_positive_rat(rng);
  p.num_nodes = 2;
  p.source = 0;
  p.sink = 1;
  std::uniform_int_distribution<int> coin(0, 3);
  std::uniform_int_distribution<int> split(1, 3);
  // Recursive structure over (entry, exit) pairs with a leaf budget.
  std::function<void(int, int, int)> build = [&](int a, int b, int budget) {
    if (budget <= 1 || coin(rng) == 0) {
      TFArc e;
      e.orig = static_cast<int>(p.arcs.size());
      e.tail = a;
      e.head = b;
      e.capacity = random_positive_rat(rng);
      e.reset = coin(rng) == 0;
      p.arcs.push_back(e);
      return;
    }
    if (coin(rng) < 2) {  // series
      int mid = p.num_nodes++;
      int lb = budget / 2;
      build(a, mid, lb > 0 ? lb : 1);
      build(mid, b, budget - lb > 0 ? budget - lb : 1);
    } else {  // parallel
      int ways = split(rng) + 1;
      for (int i = 0; i < ways; ++i) build(a, b, budget / ways > 0 ? budget / ways : 1);
    }
  };
  build(0, 1, max_leaves);
  return p;
}

}  // namespace nashflow::test
