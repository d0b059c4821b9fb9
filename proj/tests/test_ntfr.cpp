#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "nashflow/engine.hpp"
#include "nashflow/gadgets.hpp"
#include "nashflow/thin_flow.hpp"
#include "testutil.hpp"

using namespace nashflow;
using namespace nashflow::test;

namespace {

ThinFlowProblem example_one_phase(const Rat& u, bool final_phase) {
  // Phase 1: E' = {f, g}, no resetting. Final phase: all four arcs, g queued.
  ThinFlowProblem p;
  p.num_nodes = 3;  // s, v, t
  p.source = 0;
  p.sink = 2;
  p.inflow = u;
  p.node_names = {"s", "v", "t"};
  if (final_phase) {
    p.arcs = {{0, 0, 2, u / Rat(3), false},
              {1, 0, 1, Rat(3, 4) * u, false},
              {2, 1, 2, u / Rat(3), true},
              {3, 1, 2, u, false}};
    p.arc_names = {"e", "f", "g", "h"};
  } else {
    p.arcs = {{1, 0, 1, Rat(3, 4) * u, false}, {2, 1, 2, u / Rat(3), false}};
    p.arc_names = {"f", "g"};
  }
  return p;
}

}  // namespace

TEST_CASE("example one phase 1: labels (1, 4/3, 3)") {
  for (const Rat& u : {Rat(1), Rat(5, 7)}) {
    ThinFlowProblem p = example_one_phase(u, false);
    for (auto method : {NtfrOptions::Method::Auto, NtfrOptions::Method::Enumerate}) {
      NtfrOptions opts;
      opts.method = method;
      ThinFlow tf = solve_ntfr(p, opts);
      CHECK(tf.label_deriv[0] == Rat(1));
      CHECK(tf.label_deriv[1] == Rat(4, 3));
      CHECK(tf.label_deriv[2] == Rat(3));
      CHECK(tf.flow_deriv[0] == u);
      CHECK(tf.flow_deriv[1] == u);
      CHECK(verify_ntfr(p, tf).empty());
    }
  }
}

TEST_CASE("example one final phase: unit labels, deterministic flow tie-break") {
  ThinFlowProblem p = example_one_phase(Rat(1), true);
  ThinFlow tf = solve_ntfr(p);
  for (int v = 0; v < 3; ++v) CHECK(tf.label_deriv[static_cast<std::size_t>(v)] == Rat(1));
  CHECK(verify_ntfr(p, tf).empty());
  // The paper's even split is one valid flow...
  ThinFlow even{{Rat(1), Rat(1), Rat(1)}, {Rat(1, 3), Rat(2, 3), Rat(1, 3), Rat(1, 3)}};
  CHECK(verify_ntfr(p, even).empty());
  // ...but the artifact returns the lexicographically smallest one (by arc
  // id): e is drained first into f's remaining headroom.
  CHECK(tf.flow_deriv[0] == Rat(1, 4));
  CHECK(tf.flow_deriv[1] == Rat(3, 4));
  CHECK(tf.flow_deriv[2] == Rat(1, 3));
  CHECK(tf.flow_deriv[3] == Rat(5, 12));
}

TEST_CASE("verify_ntfr flags specific violations") {
  ThinFlowProblem p = example_one_phase(Rat(1), false);
  SUBCASE("wrong sink label breaks the recursion at t") {
    ThinFlow cand{{Rat(1), Rat(4, 3), Rat(2)}, {Rat(1), Rat(1)}};
    auto bad = verify_ntfr(p, cand);
    REQUIRE_FALSE(bad.empty());
    bool found = false;
    for (const auto& b : bad)
      if (b.find("label recursion at t") != std::string::npos) found = true;
    CHECK(found);
  }
  SUBCASE("conservation violation at v") {
    ThinFlow cand{{Rat(1), Rat(4, 3), Rat(3)}, {Rat(1), Rat(1, 2)}};
    auto bad = verify_ntfr(p, cand);
    bool found = false;
    for (const auto& b : bad)
      if (b.find("conservation at v") != std::string::npos) found = true;
    CHECK(found);
  }
  SUBCASE("solver output always verifies") {
    CHECK(verify_ntfr(p, solve_ntfr(p)).empty());
  }
}

TEST_CASE("resetting drops labels: queued arc with x'/nu below the tail label") {
  // Path s -> a -> t, both arcs queued, generous capacities: labels reset to
  // u0/nu on each hop instead of following the source clock.
  ThinFlowProblem p;
  p.num_nodes = 3;
  p.source = 0;
  p.sink = 2;
  p.inflow = Rat(1);
  p.arcs = {{0, 0, 1, Rat(2), true}, {1, 1, 2, Rat(4), true}};
  ThinFlow tf = solve_ntfr(p);
  CHECK(tf.label_deriv[1] == Rat(1, 2));
  CHECK(tf.label_deriv[2] == Rat(1, 4));
  CHECK(verify_ntfr(p, tf).empty());
}

TEST_CASE("path with resetting everywhere: each label is u0 over its own arc capacity") {
  ThinFlowProblem p;
  p.num_nodes = 4;
  p.source = 0;
  p.sink = 3;
  p.inflow = Rat(2);
  p.arcs = {{0, 0, 1, Rat(5), true}, {1, 1, 2, Rat(3), true}, {2, 2, 3, Rat(4), true}};
  ThinFlow tf = solve_ntfr(p);
  CHECK(tf.label_deriv[1] == Rat(2, 5));
  CHECK(tf.label_deriv[2] == Rat(2, 3));
  CHECK(tf.label_deriv[3] == Rat(1, 2));  // the last arc alone sets the sink label
  // With the bottleneck last, that value is u0 / min nu.
  ThinFlowProblem q = p;
  q.arcs[1].capacity = Rat(4);
  q.arcs[2].capacity = Rat(3);
  CHECK(solve_ntfr(q).label_deriv[3] == Rat(2, 3));
}

TEST_CASE("infeasible without a source-sink path") {
  ThinFlowProblem p;
  p.num_nodes = 3;
  p.source = 0;
  p.sink = 2;
  p.inflow = Rat(1);
  p.arcs = {{0, 0, 1, Rat(1), false}};  // t has no incoming arc
  CHECK_THROWS_AS(solve_ntfr(p), std::invalid_argument);
}

TEST_CASE("off-path active arcs carry zero flow and follow the zero-flow recursion") {
  // s -> t plus a dead-end branch s -> a with a queued arc a -> b.
  ThinFlowProblem p;
  p.num_nodes = 4;  // s, t, a, b
  p.source = 0;
  p.sink = 1;
  p.inflow = Rat(1);
  p.node_names = {"s", "t", "a", "b"};
  p.arcs = {{0, 0, 1, Rat(2), false}, {1, 0, 2, Rat(1), false}, {2, 2, 3, Rat(1), true}};
  ThinFlow tf = solve_ntfr(p);
  CHECK(tf.flow_deriv[1] == Rat(0));
  CHECK(tf.flow_deriv[2] == Rat(0));
  CHECK(tf.label_deriv[2] == Rat(1));  // copies the source speed
  CHECK(tf.label_deriv[3] == Rat(0));  // draining queue resets to zero
  CHECK(verify_ntfr(p, tf).empty());
}

TEST_CASE("uniqueness of labels across enumeration orders on random problems") {
  std::mt19937_64 rng(101);
  for (int it = 0; it < 60; ++it) {
    ThinFlowProblem p = random_ntfr_problem(rng);
    NtfrOptions a, b, c;
    a.method = NtfrOptions::Method::Enumerate;
    b.method = NtfrOptions::Method::Enumerate;
    b.reverse_enum_order = true;
    b.state_rotation = 1;
    c.method = NtfrOptions::Method::Auto;
    ThinFlow ta = solve_ntfr(p, a);
    ThinFlow tb = solve_ntfr(p, b);
    ThinFlow tc = solve_ntfr(p, c);
    CHECK(ta.label_deriv == tb.label_deriv);
    CHECK(ta.label_deriv == tc.label_deriv);
    // The flow tie-break is solver independent too.
    CHECK(ta.flow_deriv == tb.flow_deriv);
    CHECK(ta.flow_deriv == tc.flow_deriv);
    CHECK(verify_ntfr(p, ta).empty());
  }
}

TEST_CASE("series-parallel solve agrees with enumeration on random SP networks") {
  std::mt19937_64 rng(202);
  for (int it = 0; it < 80; ++it) {
    ThinFlowProblem p = random_sp_problem(rng, 9);
    NtfrOptions sp, en;
    sp.method = NtfrOptions::Method::Auto;
    en.method = NtfrOptions::Method::Enumerate;
    ThinFlow a = solve_ntfr(p, sp);
    ThinFlow b = solve_ntfr(p, en);
    CHECK(a.label_deriv == b.label_deriv);
    CHECK(a.flow_deriv == b.flow_deriv);
    CHECK(verify_ntfr(p, a).empty());
  }
}

TEST_CASE("scaling the inflow and capacities leaves labels unchanged") {
  std::mt19937_64 rng(303);
  for (int it = 0; it < 20; ++it) {
    ThinFlowProblem p = random_ntfr_problem(rng);
    Rat k = random_positive_rat(rng, 9, 9);
    ThinFlowProblem q = p;
    q.inflow *= k;
    for (TFArc& a : q.arcs) a.capacity *= k;
    ThinFlow tp = solve_ntfr(p);
    ThinFlow tq = solve_ntfr(q);
    CHECK(tp.label_deriv == tq.label_deriv);
    for (std::size_t e = 0; e < p.arcs.size(); ++e) CHECK(tq.flow_deriv[e] == tp.flow_deriv[e] * k);
  }
}

TEST_CASE("entry label scales a downstream subproblem") {
  // Solving with entry label c equals c times the solve at entry 1 with
  // inflow u/c, by homogeneity of the system.
  ThinFlowProblem p = example_one_phase(Rat(1), true);
  ThinFlowProblem scaled = p;
  scaled.entry_label = Rat(3, 2);
  scaled.inflow = Rat(3, 2);
  ThinFlow t0 = solve_ntfr(p);
  ThinFlow t1 = solve_ntfr(scaled);
  for (std::size_t v = 0; v < 3; ++v)
    CHECK(t1.label_deriv[v] == t0.label_deriv[v] * Rat(3, 2));
}

TEST_CASE("flows never use directed cycles (active networks are acyclic)") {
  ThinFlowProblem p;
  p.num_nodes = 3;
  p.source = 0;
  p.sink = 2;
  p.inflow = Rat(1);
  p.arcs = {{0, 0, 1, Rat(1), false}, {1, 1, 2, Rat(1), false}, {2, 2, 1, Rat(1), false}};
  CHECK_THROWS(solve_ntfr(p));  // 1 -> 2 -> 1 is a directed cycle
}
