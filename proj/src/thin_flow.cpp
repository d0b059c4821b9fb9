#include "nashflow/thin_flow.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "nashflow/cone_fn.hpp"
#include "nashflow/maxflow.hpp"

namespace nashflow {

std::string ThinFlowProblem::node_name(int v) const {
  if (v >= 0 && static_cast<std::size_t>(v) < node_names.size() && !node_names[static_cast<std::size_t>(v)].empty())
    return node_names[static_cast<std::size_t>(v)];
  return "#" + std::to_string(v);
}

std::string ThinFlowProblem::arc_name(int e) const {
  if (e >= 0 && static_cast<std::size_t>(e) < arc_names.size() && !arc_names[static_cast<std::size_t>(e)].empty())
    return arc_names[static_cast<std::size_t>(e)];
  return "#" + std::to_string(e);
}

ThinFlowProblem ThinFlowProblem::from_classification(const Instance& inst, const Snapshot& snap,
                                                     const ArcClassification& cls) {
  ThinFlowProblem p;
  std::vector<int> local(inst.nodes.size(), -1);
  for (std::size_t v = 0; v < inst.nodes.size(); ++v) {
    if (!snap.reachable(static_cast<int>(v))) continue;
    local[v] = p.num_nodes++;
    p.orig_node.push_back(static_cast<int>(v));
    p.node_names.push_back(inst.nodes[v]);
  }
  p.source = local[static_cast<std::size_t>(inst.source)];
  p.sink = local[static_cast<std::size_t>(inst.sink)];
  p.inflow = inst.inflow;
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    if (!cls.active[i]) continue;
    const Arc& a = inst.arcs[i];
    p.arcs.push_back({static_cast<int>(i), local[static_cast<std::size_t>(a.tail)],
                      local[static_cast<std::size_t>(a.head)], a.capacity, cls.queued[i]});
    p.arc_names.push_back(a.id);
  }
  return p;
}

namespace {

Rat rho_of(const TFArc& a, const Rat& lv, const Rat& x) {
  Rat byflow = x / a.capacity;
  return a.reset ? byflow : max(lv, byflow);
}

std::optional<std::vector<int>> topo_order(int n, const std::vector<TFArc>& arcs) {
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  for (const auto& a : arcs) indeg[static_cast<std::size_t>(a.head)]++;
  std::vector<int> order;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int step = 0; step < n; ++step) {
    int pick = -1;
    for (int v = 0; v < n; ++v)
      if (!used[static_cast<std::size_t>(v)] && indeg[static_cast<std::size_t>(v)] == 0) {
        pick = v;
        break;
      }
    if (pick < 0) return std::nullopt;  // cycle
    used[static_cast<std::size_t>(pick)] = true;
    order.push_back(pick);
    for (const auto& a : arcs)
      if (a.tail == pick) indeg[static_cast<std::size_t>(a.head)]--;
  }
  return order;
}

// ------------------------------------------------------------------
// Exact dense linear solve (reduced row echelon form).
// ------------------------------------------------------------------

struct LinSolve {
  bool consistent = false;
  bool labels_unique = false;     // the first `num_labels` variables are pinned
  bool fully_unique = false;
  std::vector<Rat> particular;    // free variables set to zero
};

LinSolve solve_linear(std::vector<std::vector<Rat>> m, int num_vars, int num_labels) {
  int rows = static_cast<int>(m.size());
  std::vector<int> pivot_col_of_row;
  int r = 0;
  for (int c = 0; c < num_vars && r < rows; ++c) {
    int pr = -1;
    for (int i = r; i < rows; ++i)
      if (!m[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].is_zero()) {
        pr = i;
        break;
      }
    if (pr < 0) continue;
    std::swap(m[static_cast<std::size_t>(r)], m[static_cast<std::size_t>(pr)]);
    Rat inv = Rat(1) / m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    for (int j = c; j <= num_vars; ++j) m[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] *= inv;
    for (int i = 0; i < rows; ++i) {
      if (i == r) continue;
      Rat f = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
      if (f.is_zero()) continue;
      for (int j = c; j <= num_vars; ++j)
        m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -=
            f * m[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
    }
    pivot_col_of_row.push_back(c);
    ++r;
  }
  LinSolve out;
  for (int i = r; i < rows; ++i)
    if (!m[static_cast<std::size_t>(i)][static_cast<std::size_t>(num_vars)].is_zero()) return out;
  out.consistent = true;

  std::vector<bool> is_pivot(static_cast<std::size_t>(num_vars), false);
  for (int c : pivot_col_of_row) is_pivot[static_cast<std::size_t>(c)] = true;
  out.fully_unique = (r == num_vars);

  out.labels_unique = true;
  for (int c = 0; c < num_labels; ++c)
    if (!is_pivot[static_cast<std::size_t>(c)]) out.labels_unique = false;
  if (out.labels_unique && !out.fully_unique) {
    for (int i = 0; i < r; ++i) {
      if (pivot_col_of_row[static_cast<std::size_t>(i)] >= num_labels) continue;
      for (int j = 0; j < num_vars; ++j)
        if (!is_pivot[static_cast<std::size_t>(j)] &&
            !m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].is_zero())
          out.labels_unique = false;
    }
  }

  out.particular.assign(static_cast<std::size_t>(num_vars), Rat(0));
  for (int i = 0; i < r; ++i)
    out.particular[static_cast<std::size_t>(pivot_col_of_row[static_cast<std::size_t>(i)])] =
        m[static_cast<std::size_t>(i)][static_cast<std::size_t>(num_vars)];
  return out;
}

// ------------------------------------------------------------------
// Components of the pruned network between consecutive cut nodes.
// ------------------------------------------------------------------

struct Component {
  int entry = -1, exit = -1;         // problem node ids
  std::vector<int> arcs;             // problem arc indices
  std::vector<int> nodes;            // problem node ids, entry first, exit last
  std::vector<int> local_of_node;    // per problem node, -1 if absent
  std::vector<TFArc> local_arcs;     // relabeled to local node ids
};

// The flow boxes induced by fixed labels: outside them no flow assignment can
// satisfy the NTFR conditions.
void flow_box(const TFArc& a, const std::vector<Rat>& labels, Rat& lo, Rat& hi) {
  const Rat& lv = labels[static_cast<std::size_t>(a.tail)];
  const Rat& lw = labels[static_cast<std::size_t>(a.head)];
  if (a.reset || lv < lw) {
    lo = hi = a.capacity * lw;
  } else if (lv == lw) {
    lo = Rat(0);
    hi = a.capacity * lw;
  } else {
    lo = hi = Rat(0);
  }
}

// Feasible flow within per-arc bounds [lo, hi] carrying `value` from entry to
// exit; standard lower-bound reduction to max-flow.
std::optional<std::vector<Rat>> feasible_box_flow(int n, const std::vector<TFArc>& arcs,
                                                  const std::vector<Rat>& lo, const std::vector<Rat>& hi,
                                                  int entry, int exit, const Rat& value) {
  int ss = n, tt = n + 1;
  MaxFlow mf(n + 2, ss, tt);
  std::vector<int> handle(arcs.size(), -1);
  Rat total_lo(0);
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    if (lo[i].sign() < 0 || hi[i] < lo[i]) return std::nullopt;
    handle[i] = mf.add_arc(arcs[i].tail, arcs[i].head, hi[i] - lo[i]);
    if (lo[i].sign() > 0) {
      mf.add_arc(ss, arcs[i].head, lo[i]);
      mf.add_arc(arcs[i].tail, tt, lo[i]);
      total_lo += lo[i];
    }
  }
  // Return arc exit -> entry with fixed value.
  if (value.sign() > 0) {
    mf.add_arc(ss, entry, value);
    mf.add_arc(exit, tt, value);
    total_lo += value;
  }
  if (mf.solve() != total_lo) return std::nullopt;
  std::vector<Rat> x(arcs.size());
  for (std::size_t i = 0; i < arcs.size(); ++i) x[i] = lo[i] + mf.flow_on(handle[i]);
  return x;
}

// ------------------------------------------------------------------
// Series-parallel decomposition and the cone-function solve.
// ------------------------------------------------------------------

struct SpTree {
  struct Node {
    enum Kind { Leaf, Series, Parallel } kind;
    int arc = -1;                // Leaf: problem arc index
    int left = -1, right = -1;   // Series
    int junction = -1;           // Series: problem node between left and right
    std::vector<int> children;   // Parallel
    ConeFn fn = ConeFn::arc(Rat(1), true);  // placeholder until built
  };
  std::vector<Node> nodes;
  int root = -1;
};

// Two-terminal series-parallel recognition by reduction; returns the
// decomposition tree with cone functions attached, or nullopt.
std::optional<SpTree> sp_decompose(const Component& comp, const std::vector<TFArc>& prob_arcs) {
  struct Edge {
    int from, to, tree;
  };
  SpTree tree;
  std::vector<Edge> edges;
  for (int ai : comp.arcs) {
    const TFArc& a = prob_arcs[static_cast<std::size_t>(ai)];
    SpTree::Node leaf;
    leaf.kind = SpTree::Node::Leaf;
    leaf.arc = ai;
    leaf.fn = ConeFn::arc(a.capacity, a.reset);
    tree.nodes.push_back(std::move(leaf));
    edges.push_back({a.tail, a.head, static_cast<int>(tree.nodes.size()) - 1});
  }
  bool changed = true;
  while (changed && edges.size() > 1) {
    changed = false;
    // Parallel: merge all edges sharing endpoints, keeping first position.
    for (std::size_t i = 0; i < edges.size() && !changed; ++i) {
      std::vector<std::size_t> group{i};
      for (std::size_t j = i + 1; j < edges.size(); ++j)
        if (edges[j].from == edges[i].from && edges[j].to == edges[i].to) group.push_back(j);
      if (group.size() < 2) continue;
      SpTree::Node par;
      par.kind = SpTree::Node::Parallel;
      std::vector<const ConeFn*> fns;
      for (std::size_t j : group) {
        par.children.push_back(edges[j].tree);
        fns.push_back(&tree.nodes[static_cast<std::size_t>(edges[j].tree)].fn);
      }
      par.fn = ConeFn::parallel(fns);
      tree.nodes.push_back(std::move(par));
      edges[i].tree = static_cast<int>(tree.nodes.size()) - 1;
      for (std::size_t k = group.size(); k-- > 1;)
        edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(group[k]));
      changed = true;
    }
    if (changed) continue;
    // Series: contract an interior node of in/out degree one.
    for (int v : comp.nodes) {
      if (v == comp.entry || v == comp.exit) continue;
      int in = -1, out = -1, ins = 0, outs = 0;
      for (std::size_t j = 0; j < edges.size(); ++j) {
        if (edges[j].to == v) { in = static_cast<int>(j); ++ins; }
        if (edges[j].from == v) { out = static_cast<int>(j); ++outs; }
      }
      if (ins != 1 || outs != 1) continue;
      SpTree::Node ser;
      ser.kind = SpTree::Node::Series;
      ser.left = edges[static_cast<std::size_t>(in)].tree;
      ser.right = edges[static_cast<std::size_t>(out)].tree;
      ser.junction = v;
      ser.fn = ConeFn::series(tree.nodes[static_cast<std::size_t>(ser.left)].fn,
                              tree.nodes[static_cast<std::size_t>(ser.right)].fn);
      tree.nodes.push_back(std::move(ser));
      edges[static_cast<std::size_t>(in)] = {edges[static_cast<std::size_t>(in)].from,
                                             edges[static_cast<std::size_t>(out)].to,
                                             static_cast<int>(tree.nodes.size()) - 1};
      edges.erase(edges.begin() + out);
      changed = true;
      break;
    }
  }
  if (edges.size() != 1 || edges[0].from != comp.entry || edges[0].to != comp.exit)
    return std::nullopt;
  tree.root = edges[0].tree;
  return tree;
}

void sp_recover(const SpTree& tree, int node_id, const Rat& c, const Rat& u,
                std::vector<Rat>& labels, std::vector<Rat>& flows) {
  const SpTree::Node& nd = tree.nodes[static_cast<std::size_t>(node_id)];
  switch (nd.kind) {
    case SpTree::Node::Leaf:
      flows[static_cast<std::size_t>(nd.arc)] = u;
      return;
    case SpTree::Node::Series: {
      Rat mid = tree.nodes[static_cast<std::size_t>(nd.left)].fn.eval(c, u);
      labels[static_cast<std::size_t>(nd.junction)] = mid;
      sp_recover(tree, nd.left, c, u, labels, flows);
      sp_recover(tree, nd.right, mid, u, labels, flows);
      return;
    }
    case SpTree::Node::Parallel: {
      Rat level = nd.fn.eval(c, u);
      std::size_t k = nd.children.size();
      std::vector<Rat> up(k), low(k);
      Rat low_sum(0);
      for (std::size_t i = 0; i < k; ++i) {
        const ConeFn& f = tree.nodes[static_cast<std::size_t>(nd.children[i])].fn;
        up[i] = f.max_uptake(c, level);
        low[i] = up[i].is_zero() ? Rat(0) : f.min_uptake(c, level);
        low_sum += low[i];
      }
      Rat rem = u - low_sum;
      if (rem.sign() < 0) throw std::logic_error("thin flow: parallel split below plateau sum");
      for (std::size_t i = 0; i < k; ++i) {
        Rat give = min(up[i] - low[i], rem);
        Rat share = low[i] + give;
        rem -= give;
        sp_recover(tree, nd.children[i], c, share, labels, flows);
      }
      if (rem.sign() != 0) throw std::logic_error("thin flow: parallel split does not exhaust flow");
      return;
    }
  }
}

// ------------------------------------------------------------------
// Pattern enumeration for small general components.
// ------------------------------------------------------------------

ThinFlowProblem component_as_problem(const Component& comp, const Rat& entry_label, const Rat& inflow) {
  ThinFlowProblem sub;
  sub.num_nodes = static_cast<int>(comp.nodes.size());
  sub.source = comp.local_of_node[static_cast<std::size_t>(comp.entry)];
  sub.sink = comp.local_of_node[static_cast<std::size_t>(comp.exit)];
  sub.inflow = inflow;
  sub.entry_label = entry_label;
  sub.arcs = comp.local_arcs;
  return sub;
}

struct ComponentSolution {
  std::vector<Rat> labels;  // per component-local node
  std::vector<Rat> flows;   // per component arc (comp.arcs order)
};

std::optional<ComponentSolution> try_pattern(const Component& comp, const Rat& entry_label,
                                             const Rat& inflow, const std::vector<int>& state,
                                             const std::vector<int>& branchable) {
  int n = static_cast<int>(comp.nodes.size());
  int m = static_cast<int>(comp.local_arcs.size());
  int vars = n + m;
  int entry = comp.local_of_node[static_cast<std::size_t>(comp.entry)];
  int exit = comp.local_of_node[static_cast<std::size_t>(comp.exit)];

  std::vector<std::vector<Rat>> rows;
  auto new_row = [&]() -> std::vector<Rat>& {
    rows.emplace_back(static_cast<std::size_t>(vars + 1), Rat(0));
    return rows.back();
  };
  {
    auto& r = new_row();  // entry label
    r[static_cast<std::size_t>(entry)] = Rat(1);
    r[static_cast<std::size_t>(vars)] = entry_label;
  }
  std::vector<int> state_of_arc(static_cast<std::size_t>(m), -1);
  for (std::size_t bi = 0; bi < branchable.size(); ++bi)
    state_of_arc[static_cast<std::size_t>(branchable[bi])] = state[bi];
  for (int e = 0; e < m; ++e) {
    const TFArc& a = comp.local_arcs[static_cast<std::size_t>(e)];
    auto& r = new_row();
    if (a.reset || state_of_arc[static_cast<std::size_t>(e)] == 2) {
      // x_e = nu * ell_head
      r[static_cast<std::size_t>(n + e)] = Rat(1);
      r[static_cast<std::size_t>(a.head)] = -a.capacity;
    } else if (state_of_arc[static_cast<std::size_t>(e)] == 0) {
      r[static_cast<std::size_t>(n + e)] = Rat(1);  // x_e = 0
    } else {
      r[static_cast<std::size_t>(a.head)] = Rat(1);  // ell_head = ell_tail
      r[static_cast<std::size_t>(a.tail)] = -Rat(1);
    }
  }
  for (int v = 0; v < n; ++v) {
    if (v == exit) continue;
    auto& r = new_row();
    for (int e = 0; e < m; ++e) {
      const TFArc& a = comp.local_arcs[static_cast<std::size_t>(e)];
      if (a.tail == v) r[static_cast<std::size_t>(n + e)] += Rat(1);
      if (a.head == v) r[static_cast<std::size_t>(n + e)] -= Rat(1);
    }
    if (v == entry) r[static_cast<std::size_t>(vars)] = inflow;
  }

  LinSolve sol = solve_linear(std::move(rows), vars, n);
  if (!sol.consistent || !sol.labels_unique) return std::nullopt;

  ComponentSolution out;
  out.labels.assign(sol.particular.begin(), sol.particular.begin() + n);
  for (const Rat& l : out.labels)
    if (l.sign() < 0) return std::nullopt;
  if (sol.fully_unique) {
    out.flows.assign(sol.particular.begin() + n, sol.particular.end());
  } else {
    std::vector<Rat> lo(static_cast<std::size_t>(m)), hi(static_cast<std::size_t>(m));
    for (int e = 0; e < m; ++e)
      flow_box(comp.local_arcs[static_cast<std::size_t>(e)], out.labels, lo[static_cast<std::size_t>(e)],
               hi[static_cast<std::size_t>(e)]);
    auto x = feasible_box_flow(n, comp.local_arcs, lo, hi, entry, exit, inflow);
    if (!x) return std::nullopt;
    out.flows = *x;
  }
  return out;
}

ComponentSolution solve_component_enum(const Component& comp, const Rat& entry_label, const Rat& inflow,
                                       const NtfrOptions& opts) {
  if (static_cast<int>(comp.arcs.size()) > opts.max_enum_arcs)
    throw std::runtime_error("thin flow: component of " + std::to_string(comp.arcs.size()) +
                             " arcs is not series-parallel and exceeds the enumeration limit");
  std::vector<int> branchable;
  for (std::size_t e = 0; e < comp.local_arcs.size(); ++e)
    if (!comp.local_arcs[e].reset) branchable.push_back(static_cast<int>(e));
  if (opts.reverse_enum_order) std::reverse(branchable.begin(), branchable.end());

  std::array<int, 3> trial{};
  for (int i = 0; i < 3; ++i) trial[static_cast<std::size_t>(i)] = (i + opts.state_rotation) % 3;

  ThinFlowProblem sub = component_as_problem(comp, entry_label, inflow);
  std::vector<int> state(branchable.size(), 0);
  std::size_t count = 1;
  for (std::size_t i = 0; i < branchable.size(); ++i) count *= 3;
  for (std::size_t it = 0; it < count; ++it) {
    std::size_t code = it;
    for (std::size_t i = 0; i < branchable.size(); ++i) {
      state[i] = trial[code % 3];
      code /= 3;
    }
    auto cand = try_pattern(comp, entry_label, inflow, state, branchable);
    if (!cand) continue;
    ThinFlow tf{cand->labels, cand->flows};
    if (verify_ntfr(sub, tf).empty()) return *cand;
  }
  throw std::logic_error("thin flow: enumeration exhausted without a verifying pattern");
}

// ------------------------------------------------------------------
// Component solve via SP decomposition with enumeration fallback.
// ------------------------------------------------------------------

struct CachedSp {
  SpTree tree;
};

}  // namespace

struct NtfrCache {
  std::map<std::string, std::shared_ptr<CachedSp>> sp;
  std::map<std::string, bool> not_sp;
};

NtfrCachePtr make_ntfr_cache() { return std::make_shared<NtfrCache>(); }

namespace {

std::string component_key(const Component& comp) {
  std::ostringstream os;
  for (const TFArc& a : comp.local_arcs)
    os << a.tail << '>' << a.head << ':' << a.capacity.str() << (a.reset ? 'q' : 'f') << ';';
  return os.str();
}

ComponentSolution solve_component(const Component& comp, const Rat& entry_label, const Rat& inflow,
                                  const NtfrOptions& opts) {
  if (opts.method == NtfrOptions::Method::Enumerate)
    return solve_component_enum(comp, entry_label, inflow, opts);

  std::shared_ptr<CachedSp> sp;
  std::string key;
  if (opts.cache) {
    key = component_key(comp);
    auto it = opts.cache->sp.find(key);
    if (it != opts.cache->sp.end()) sp = it->second;
    else if (opts.cache->not_sp.count(key))
      return solve_component_enum(comp, entry_label, inflow, opts);
  }
  if (!sp) {
    // sp_decompose works on local node ids; feed it the local view.
    Component view;
    view.entry = comp.local_of_node[static_cast<std::size_t>(comp.entry)];
    view.exit = comp.local_of_node[static_cast<std::size_t>(comp.exit)];
    for (std::size_t i = 0; i < comp.nodes.size(); ++i) view.nodes.push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < comp.local_arcs.size(); ++i) view.arcs.push_back(static_cast<int>(i));
    auto t = sp_decompose(view, comp.local_arcs);
    if (!t) {
      if (opts.cache) opts.cache->not_sp[key] = true;
      return solve_component_enum(comp, entry_label, inflow, opts);
    }
    sp = std::make_shared<CachedSp>(CachedSp{std::move(*t)});
    if (opts.cache) opts.cache->sp[key] = sp;
  }

  ComponentSolution out;
  out.labels.assign(comp.nodes.size(), Rat(0));
  out.flows.assign(comp.local_arcs.size(), Rat(0));
  int entry_local = comp.local_of_node[static_cast<std::size_t>(comp.entry)];
  int exit_local = comp.local_of_node[static_cast<std::size_t>(comp.exit)];
  out.labels[static_cast<std::size_t>(entry_local)] = entry_label;
  out.labels[static_cast<std::size_t>(exit_local)] =
      sp.get()->tree.nodes[static_cast<std::size_t>(sp->tree.root)].fn.eval(entry_label, inflow);
  sp_recover(sp->tree, sp->tree.root, entry_label, inflow, out.labels, out.flows);
  return out;
}

// Lexicographically smallest flow (by arc name) among flows compatible with
// the fixed labels: reduce each arc in name order by rerouting through the
// residual network of the box-flow polytope.
void lexmin_flows(const ThinFlowProblem& prob, const std::vector<bool>& pruned,
                  const std::vector<Rat>& labels, std::vector<Rat>& flows) {
  std::size_t m = prob.arcs.size();
  std::vector<Rat> lo(m, Rat(0)), hi(m, Rat(0));
  for (std::size_t e = 0; e < m; ++e)
    if (pruned[e]) flow_box(prob.arcs[e], labels, lo[e], hi[e]);

  std::vector<int> order;
  for (std::size_t e = 0; e < m; ++e)
    if (pruned[e] && lo[e] != hi[e]) order.push_back(static_cast<int>(e));
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::make_pair(prob.arc_name(a), a) < std::make_pair(prob.arc_name(b), b); });

  for (int e : order) {
    std::size_t se = static_cast<std::size_t>(e);
    Rat slack = flows[se] - lo[se];
    if (slack.sign() <= 0) {
      lo[se] = hi[se] = flows[se];
      continue;
    }
    int n = prob.num_nodes;
    MaxFlow mf(n + 1, n, prob.arcs[se].head);
    std::vector<std::pair<int, int>> fwd, bwd;  // (arc, handle)
    for (std::size_t f = 0; f < m; ++f) {
      if (!pruned[f] || f == se) continue;
      Rat up = hi[f] - flows[f];
      if (up.sign() > 0) fwd.push_back({static_cast<int>(f), mf.add_arc(prob.arcs[f].tail, prob.arcs[f].head, up)});
      Rat dn = flows[f] - lo[f];
      if (dn.sign() > 0) bwd.push_back({static_cast<int>(f), mf.add_arc(prob.arcs[f].head, prob.arcs[f].tail, dn)});
    }
    mf.add_arc(n, prob.arcs[se].tail, slack);  // bottleneck limits the reduction
    Rat delta = mf.solve();
    if (delta.sign() > 0) {
      for (auto [f, h] : fwd) flows[static_cast<std::size_t>(f)] += mf.flow_on(h);
      for (auto [f, h] : bwd) flows[static_cast<std::size_t>(f)] -= mf.flow_on(h);
      flows[se] -= delta;
    }
    lo[se] = hi[se] = flows[se];
  }
}

}  // namespace

std::vector<std::string> verify_ntfr(const ThinFlowProblem& prob, const ThinFlow& cand) {
  std::vector<std::string> bad;
  std::size_t n = static_cast<std::size_t>(prob.num_nodes), m = prob.arcs.size();
  if (cand.label_deriv.size() != n || cand.flow_deriv.size() != m) {
    bad.push_back("candidate dimensions do not match the problem");
    return bad;
  }
  if (cand.label_deriv[static_cast<std::size_t>(prob.source)] != prob.entry_label)
    bad.push_back("source label is not the entry label");
  for (std::size_t v = 0; v < n; ++v)
    if (cand.label_deriv[v].sign() < 0) bad.push_back("negative label at " + prob.node_name(static_cast<int>(v)));
  for (std::size_t e = 0; e < m; ++e)
    if (cand.flow_deriv[e].sign() < 0) bad.push_back("negative flow on " + prob.arc_name(static_cast<int>(e)));

  for (std::size_t v = 0; v < n; ++v) {
    Rat net(0);
    for (std::size_t e = 0; e < m; ++e) {
      if (prob.arcs[e].tail == static_cast<int>(v)) net += cand.flow_deriv[e];
      if (prob.arcs[e].head == static_cast<int>(v)) net -= cand.flow_deriv[e];
    }
    Rat want(0);
    if (static_cast<int>(v) == prob.source) want = prob.inflow;
    if (static_cast<int>(v) == prob.sink) want = -prob.inflow;
    if (net != want) bad.push_back("conservation at " + prob.node_name(static_cast<int>(v)));
  }

  std::vector<bool> has_in(n, false);
  std::vector<Rat> best(n, Rat(0));
  for (std::size_t e = 0; e < m; ++e) {
    const TFArc& a = prob.arcs[e];
    Rat r = rho_of(a, cand.label_deriv[static_cast<std::size_t>(a.tail)], cand.flow_deriv[e]);
    const Rat& lw = cand.label_deriv[static_cast<std::size_t>(a.head)];
    if (lw > r) bad.push_back("label bound violated on " + prob.arc_name(static_cast<int>(e)));
    if (cand.flow_deriv[e].sign() > 0 && lw != r)
      bad.push_back("tightness violated on " + prob.arc_name(static_cast<int>(e)));
    std::size_t h = static_cast<std::size_t>(a.head);
    if (!has_in[h] || r < best[h]) best[h] = r;
    has_in[h] = true;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (static_cast<int>(v) == prob.source) continue;
    if (!has_in[v]) {
      bad.push_back("no incoming arc at " + prob.node_name(static_cast<int>(v)));
      continue;
    }
    if (cand.label_deriv[v] != best[v])
      bad.push_back("label recursion at " + prob.node_name(static_cast<int>(v)));
  }
  return bad;
}

ThinFlow solve_ntfr(const ThinFlowProblem& prob, const NtfrOptions& opts) {
  std::size_t n = static_cast<std::size_t>(prob.num_nodes), m = prob.arcs.size();
  auto order = topo_order(prob.num_nodes, prob.arcs);
  if (!order) throw std::invalid_argument("thin flow: active network has a directed cycle");

  // Reachability: every node must be reachable from the source, and the
  // pruned network keeps only arcs whose head still reaches the sink.
  std::vector<bool> from_s(n, false);
  from_s[static_cast<std::size_t>(prob.source)] = true;
  for (int v : *order)
    for (std::size_t e = 0; e < m; ++e)
      if (prob.arcs[e].tail == v && from_s[static_cast<std::size_t>(v)])
        from_s[static_cast<std::size_t>(prob.arcs[e].head)] = true;
  for (std::size_t v = 0; v < n; ++v)
    if (!from_s[v])
      throw std::invalid_argument("thin flow: node " + prob.node_name(static_cast<int>(v)) +
                                  " unreachable from source");
  std::vector<bool> to_t(n, false);
  to_t[static_cast<std::size_t>(prob.sink)] = true;
  for (auto it = order->rbegin(); it != order->rend(); ++it)
    for (std::size_t e = 0; e < m; ++e)
      if (prob.arcs[e].tail == *it && to_t[static_cast<std::size_t>(prob.arcs[e].head)])
        to_t[static_cast<std::size_t>(*it)] = true;
  if (!to_t[static_cast<std::size_t>(prob.source)])
    throw std::invalid_argument("thin flow: no source-sink path among active arcs");

  std::vector<bool> pruned(m, false);
  for (std::size_t e = 0; e < m; ++e)
    pruned[e] = to_t[static_cast<std::size_t>(prob.arcs[e].head)];

  // Chain decomposition: cut nodes are those spanned by no pruned arc.
  std::vector<int> pos(n, -1);
  for (std::size_t i = 0; i < order->size(); ++i) pos[static_cast<std::size_t>((*order)[i])] = static_cast<int>(i);
  std::vector<bool> spanned(n, false);
  for (std::size_t e = 0; e < m; ++e) {
    if (!pruned[e]) continue;
    int a = pos[static_cast<std::size_t>(prob.arcs[e].tail)];
    int b = pos[static_cast<std::size_t>(prob.arcs[e].head)];
    for (int v = 0; v < static_cast<int>(n); ++v)
      if (to_t[static_cast<std::size_t>(v)] && pos[static_cast<std::size_t>(v)] > a &&
          pos[static_cast<std::size_t>(v)] < b)
        spanned[static_cast<std::size_t>(v)] = true;
  }
  std::vector<int> cuts;
  for (int v : *order) {
    if (!to_t[static_cast<std::size_t>(v)]) continue;
    bool pruned_node = false;
    for (std::size_t e = 0; e < m; ++e)
      if (pruned[e] && (prob.arcs[e].tail == v || prob.arcs[e].head == v)) pruned_node = true;
    if (!pruned_node) continue;
    if (v == prob.source || v == prob.sink || !spanned[static_cast<std::size_t>(v)]) cuts.push_back(v);
  }

  std::vector<Component> comps;
  for (std::size_t ci = 0; ci + 1 < cuts.size(); ++ci) {
    Component comp;
    comp.entry = cuts[ci];
    comp.exit = cuts[ci + 1];
    comps.push_back(std::move(comp));
  }
  for (std::size_t e = 0; e < m; ++e) {
    if (!pruned[e]) continue;
    int tp = pos[static_cast<std::size_t>(prob.arcs[e].tail)];
    std::size_t ci = 0;
    while (ci + 1 < comps.size() && pos[static_cast<std::size_t>(comps[ci + 1].entry)] <= tp) ++ci;
    comps[ci].arcs.push_back(static_cast<int>(e));
  }
  for (auto& comp : comps) {
    comp.local_of_node.assign(n, -1);
    auto touch = [&](int v) {
      if (comp.local_of_node[static_cast<std::size_t>(v)] < 0) {
        comp.local_of_node[static_cast<std::size_t>(v)] = static_cast<int>(comp.nodes.size());
        comp.nodes.push_back(v);
      }
    };
    touch(comp.entry);
    for (int e : comp.arcs) {
      touch(prob.arcs[static_cast<std::size_t>(e)].tail);
      touch(prob.arcs[static_cast<std::size_t>(e)].head);
    }
    for (int e : comp.arcs) {
      const TFArc& a = prob.arcs[static_cast<std::size_t>(e)];
      comp.local_arcs.push_back({a.orig, comp.local_of_node[static_cast<std::size_t>(a.tail)],
                                 comp.local_of_node[static_cast<std::size_t>(a.head)], a.capacity, a.reset});
    }
  }

  ThinFlow tf;
  tf.label_deriv.assign(n, Rat(0));
  tf.flow_deriv.assign(m, Rat(0));
  Rat carry = prob.entry_label;
  tf.label_deriv[static_cast<std::size_t>(prob.source)] = carry;
  for (auto& comp : comps) {
    ComponentSolution sol = solve_component(comp, carry, prob.inflow, opts);
    for (std::size_t i = 0; i < comp.nodes.size(); ++i)
      tf.label_deriv[static_cast<std::size_t>(comp.nodes[i])] = sol.labels[i];
    for (std::size_t i = 0; i < comp.arcs.size(); ++i)
      tf.flow_deriv[static_cast<std::size_t>(comp.arcs[i])] = sol.flows[i];
    carry = tf.label_deriv[static_cast<std::size_t>(comp.exit)];
  }

  // Labels of nodes off every source-sink path: zero-flow recursion in
  // topological order.
  for (int v : *order) {
    if (to_t[static_cast<std::size_t>(v)] || v == prob.source) continue;
    bool first = true;
    Rat best(0);
    for (std::size_t e = 0; e < m; ++e) {
      const TFArc& a = prob.arcs[e];
      if (a.head != v) continue;
      Rat offer = a.reset ? Rat(0) : tf.label_deriv[static_cast<std::size_t>(a.tail)];
      if (first || offer < best) best = offer;
      first = false;
    }
    if (first) throw std::logic_error("thin flow: node without incoming active arc");
    tf.label_deriv[static_cast<std::size_t>(v)] = best;
  }

  lexmin_flows(prob, pruned, tf.label_deriv, tf.flow_deriv);

  auto bad = verify_ntfr(prob, tf);
  if (!bad.empty()) {
    std::string msg = "thin flow solver produced an invalid solution:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw std::logic_error(msg);
  }
  return tf;
}

}  // namespace nashflow
