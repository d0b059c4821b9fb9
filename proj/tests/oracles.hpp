#pragma once

// Independent oracles, deliberately implemented along different algorithmic
// routes than the library: subset enumeration for cuts, plain depth-first
// Ford-Fulkerson for flow values, and vertex enumeration over path variables
// for the min-cost steady flow.

#include <optional>
#include <vector>

#include "nashflow/instance.hpp"

namespace nashflow::test {

// Minimum queuing capacity by enumerating all source sides, together with the
// intersection of all minimizers (the setwise-minimal one).
struct CutOracle {
  Rat value;
  std::vector<int> minimal_source_side;
};

inline CutOracle brute_force_min_cut(const Instance& inst) {
  int n = static_cast<int>(inst.nodes.size());
  if (n > 20) throw std::logic_error("cut oracle: instance too large");
  CutOracle out;
  bool first = true;
  std::vector<bool> inter;
  for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
    if (!(mask >> inst.source & 1) || (mask >> inst.sink & 1)) continue;
    Rat value(0);
    for (const Arc& a : inst.arcs)
      if ((mask >> a.tail & 1) && !(mask >> a.head & 1)) value += a.capacity;
    if (first || value < out.value) {
      out.value = value;
      inter.assign(static_cast<std::size_t>(n), false);
      for (int v = 0; v < n; ++v) inter[static_cast<std::size_t>(v)] = mask >> v & 1;
      first = false;
    } else if (value == out.value) {
      for (int v = 0; v < n; ++v)
        if (!(mask >> v & 1)) inter[static_cast<std::size_t>(v)] = false;
    }
  }
  for (int v = 0; v < n; ++v)
    if (inter[static_cast<std::size_t>(v)]) out.minimal_source_side.push_back(v);
  return out;
}

// Depth-first Ford-Fulkerson max flow value (exact; distinct route from the
// library's level-graph search).
inline Rat dfs_max_flow(const Instance& inst) {
  struct E {
    int to;
    Rat cap;
    std::size_t rev;
  };
  std::size_t n = inst.nodes.size();
  std::vector<std::vector<E>> g(n);
  for (const Arc& a : inst.arcs) {
    g[static_cast<std::size_t>(a.tail)].push_back({a.head, a.capacity, g[static_cast<std::size_t>(a.head)].size()});
    g[static_cast<std::size_t>(a.head)].push_back({a.tail, Rat(0), g[static_cast<std::size_t>(a.tail)].size() - 1});
  }
  Rat total(0);
  while (true) {
    std::vector<int> seen(n, 0);
    std::function<Rat(int, Rat)> dfs = [&](int v, Rat lim) -> Rat {
      if (v == inst.sink) return lim;
      seen[static_cast<std::size_t>(v)] = 1;
      for (auto& e : g[static_cast<std::size_t>(v)]) {
        if (e.cap.sign() <= 0 || seen[static_cast<std::size_t>(e.to)]) continue;
        Rat got = dfs(e.to, min(lim, e.cap));
        if (got.sign() > 0) {
          e.cap -= got;
          g[static_cast<std::size_t>(e.to)][e.rev].cap += got;
          return got;
        }
      }
      return Rat(0);
    };
    Rat lim(1);
    for (const Arc& a : inst.arcs) lim += a.capacity;
    Rat got = dfs(inst.source, lim);
    if (got.sign() == 0) break;
    total += got;
  }
  return total;
}

// Min-cost flow of value u0 by enumerating vertices of the path-flow
// polytope: every vertex is the solution of |paths| tight constraints chosen
// among nonnegativity, the value equation, and arc capacities.
inline std::optional<Rat> path_lp_min_cost(const Instance& inst) {
  std::vector<std::vector<int>> paths;  // arc index sequences
  std::vector<int> cur;
  std::vector<bool> on(inst.nodes.size(), false);
  std::function<void(int)> dfs = [&](int v) {
    if (v == inst.sink) {
      paths.push_back(cur);
      return;
    }
    on[static_cast<std::size_t>(v)] = true;
    for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
      const Arc& a = inst.arcs[i];
      if (a.tail != v || on[static_cast<std::size_t>(a.head)]) continue;
      cur.push_back(static_cast<int>(i));
      dfs(a.head);
      cur.pop_back();
    }
    on[static_cast<std::size_t>(v)] = false;
  };
  dfs(inst.source);
  std::size_t k = paths.size();
  if (k == 0 || k > 8) throw std::logic_error("path LP oracle: unusable path count");

  std::vector<Rat> path_cost(k, Rat(0));
  for (std::size_t p = 0; p < k; ++p)
    for (int e : paths[p]) path_cost[p] += inst.arcs[static_cast<std::size_t>(e)].delay;

  // Constraint rows a.f = b over path variables.
  struct Row {
    std::vector<Rat> a;
    Rat b;
  };
  std::vector<Row> rows;
  {
    Row value{std::vector<Rat>(k, Rat(1)), inst.inflow};
    rows.push_back(value);
  }
  for (std::size_t p = 0; p < k; ++p) {
    Row r{std::vector<Rat>(k, Rat(0)), Rat(0)};
    r.a[p] = Rat(1);
    rows.push_back(r);
  }
  for (std::size_t e = 0; e < inst.arcs.size(); ++e) {
    Row r{std::vector<Rat>(k, Rat(0)), inst.arcs[e].capacity};
    for (std::size_t p = 0; p < k; ++p)
      for (int pe : paths[p])
        if (pe == static_cast<int>(e)) r.a[p] += Rat(1);
    rows.push_back(r);
  }

  std::optional<Rat> best;
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> choose = [&](std::size_t from) {
    if (pick.size() == k) {
      // Solve the square system of tight constraints.
      std::vector<std::vector<Rat>> m(k, std::vector<Rat>(k + 1, Rat(0)));
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) m[i][j] = rows[pick[i]].a[j];
        m[i][k] = rows[pick[i]].b;
      }
      std::vector<Rat> sol(k, Rat(0));
      std::size_t r = 0;
      std::vector<int> piv(k, -1);
      for (std::size_t c = 0; c < k && r < k; ++c) {
        std::size_t pr = r;
        while (pr < k && m[pr][c].is_zero()) ++pr;
        if (pr == k) continue;
        std::swap(m[r], m[pr]);
        Rat inv = Rat(1) / m[r][c];
        for (std::size_t j = c; j <= k; ++j) m[r][j] *= inv;
        for (std::size_t i = 0; i < k; ++i) {
          if (i == r || m[i][c].is_zero()) continue;
          Rat f = m[i][c];
          for (std::size_t j = c; j <= k; ++j) m[i][j] -= f * m[r][j];
        }
        piv[c] = static_cast<int>(r);
        ++r;
      }
      if (r < k) return;  // not a vertex
      for (std::size_t c = 0; c < k; ++c) sol[c] = m[static_cast<std::size_t>(piv[c])][k];
      // Feasibility of the full system.
      Rat total(0);
      for (std::size_t p = 0; p < k; ++p) {
        if (sol[p].sign() < 0) return;
        total += sol[p];
      }
      if (total != inst.inflow) return;
      for (std::size_t e = 0; e < inst.arcs.size(); ++e) {
        Rat load(0);
        for (std::size_t p = 0; p < k; ++p)
          for (int pe : paths[p])
            if (pe == static_cast<int>(e)) load += sol[p];
        if (load > inst.arcs[e].capacity) return;
      }
      Rat cost(0);
      for (std::size_t p = 0; p < k; ++p) cost += path_cost[p] * sol[p];
      if (!best || cost < *best) best = cost;
      return;
    }
    if (from >= rows.size()) return;
    if (rows.size() - from < k - pick.size()) return;
    pick.push_back(from);
    choose(from + 1);
    pick.pop_back();
    choose(from + 1);
  };
  choose(0);
  return best;
}

}  // namespace nashflow::test
