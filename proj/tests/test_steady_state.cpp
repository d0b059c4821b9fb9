#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "nashflow/gadgets.hpp"
#include "nashflow/steady_state.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace nashflow;
using namespace nashflow::test;

TEST_CASE("single arc: cost u0 tau, dual distance tau") {
  Instance inst = single_arc_instance(Rat(2), Rat(5), Rat(1));
  SteadyFlow f = solve_primal(inst);
  CHECK(f.flow[0] == Rat(1));
  CHECK(f.cost == Rat(5));
  DualSolution d = extract_dual(inst, f);
  CHECK(d.dist[1] == Rat(5));
  CHECK(d.queue_time[0] == Rat(0));
  CHECK(d.objective == Rat(5));
  CHECK(verify_optimal_pair(inst, f, d));
}

TEST_CASE("example one: cost 2 tau / 3 with the queue priced on g") {
  Instance inst = example_one(Rat(1), Rat(2));
  SteadyFlow f = solve_primal(inst);
  CHECK(f.cost == Rat(4, 3));
  CHECK(*path_lp_min_cost(inst) == Rat(4, 3));  // independent vertex-enumeration oracle
  CHECK(f.flow[inst.arc_index("e")] == Rat(1, 3));
  CHECK(f.flow[inst.arc_index("f")] == Rat(2, 3));
  CHECK(f.flow[inst.arc_index("g")] == Rat(1, 3));
  CHECK(f.flow[inst.arc_index("h")] == Rat(1, 3));
  DualSolution d = extract_dual(inst, f);
  CHECK(d.dist[0] == Rat(0));
  CHECK(d.dist[1] == Rat(0));
  CHECK(d.dist[2] == Rat(2));
  CHECK(d.queue_time[inst.arc_index("g")] == Rat(2));
  for (const char* id : {"e", "f", "h"})
    CHECK(d.queue_time[inst.arc_index(id)] == Rat(0));
  CHECK(d.objective == Rat(4, 3));
  CHECK(verify_optimal_pair(inst, f, d));
  SUBCASE("dropping the queue price opens a gap of tau/3") {
    DualSolution wrong = d;
    wrong.queue_time[inst.arc_index("g")] = Rat(0);
    wrong.objective = inst.inflow * wrong.dist[2];
    CHECK(wrong.objective - d.objective == Rat(2, 3));  // gap tau/3 in cost units
    CHECK_FALSE(verify_optimal_pair(inst, f, wrong));
  }
  SUBCASE("an unbalanced flow is rejected") {
    SteadyFlow bad = f;
    bad.flow[0] = Rat(0);
    CHECK_FALSE(verify_optimal_pair(inst, bad, d));
  }
}

TEST_CASE("two_link: greedy split and unit queue time on the short link") {
  for (int L : {1, 4}) {
    Instance inst = two_link(L);
    Rat short_cap = Rat(1) - rat_pow(Rat(1, 2), L);
    SteadyFlow f = solve_primal(inst);
    CHECK(f.flow[0] == short_cap);
    CHECK(f.flow[1] == Rat(1) - short_cap);
    CHECK(f.cost == Rat(1) - short_cap);
    CHECK(*path_lp_min_cost(inst) == f.cost);
    DualSolution d = extract_dual(inst, f);
    CHECK(d.dist[1] == Rat(1));
    CHECK(d.queue_time[0] == Rat(1));
    CHECK(d.queue_time[1] == Rat(0));
    CHECK(d.objective == rat_pow(Rat(1, 2), L));
    CHECK(verify_optimal_pair(inst, f, d));
  }
}

TEST_CASE("infeasible when the inflow exceeds the min cut") {
  Instance inst = example_one(Rat(1), Rat(2));
  inst.inflow = Rat(2);
  CHECK_THROWS(solve_primal(inst));
}

TEST_CASE("strong duality on the catalog, against the path oracle") {
  std::vector<Instance> catalog{example_one(Rat(1), Rat(2)), example_one(Rat(12), Rat(1)),
                                figure_chain(Rat(1), Rat(1)), example_three(),
                                example_three_variant(Rat(1, 100)), two_link(5)};
  for (const Instance& inst : catalog) {
    SteadyFlow f = solve_primal(inst);
    DualSolution d = extract_dual(inst, f);
    CHECK(verify_optimal_pair(inst, f, d));
    CHECK(f.cost == d.objective);
    CHECK(f.cost == *path_lp_min_cost(inst));
  }
}

TEST_CASE("steady report validates the simulated state of example one") {
  Trajectory traj = solve_equilibrium(example_one(Rat(1), Rat(2)));
  SteadyReport rep = steady_report(traj);
  CHECK(rep.dual_feasible);
  CHECK(rep.dual_optimal);
  CHECK(rep.matches_lp_objective);
  CHECK(rep.simulated_dual_objective == Rat(4, 3));
  CHECK(rep.steady_queues[traj.instance.arc_index("g")] == Rat(2, 3));
  CHECK(rep.label_offsets[2] == Rat(2));
  CHECK(rep.max_transient_queue[traj.instance.arc_index("f")] == Rat(1, 4));
  CHECK_THROWS(steady_report(Trajectory{}));  // not steady
}

TEST_CASE("example three steady queues depend on the whole evolution") {
  Trajectory traj = solve_equilibrium(example_three());
  SteadyReport rep = steady_report(traj);
  const Instance& inst = traj.instance;
  CHECK(rep.steady_queues[inst.arc_index("a")] == Rat(32, 45));
  CHECK(rep.steady_queues[inst.arc_index("b")] == Rat(1, 45));
  CHECK(rep.dual_feasible);
  CHECK(rep.dual_optimal);
  CHECK(rep.matches_lp_objective);

  SUBCASE("a slightly larger capacity on b snaps the queues to the unique dual") {
    Trajectory t2 = solve_equilibrium(example_three_variant(Rat(1, 100)));
    SteadyReport r2 = steady_report(t2);
    const Instance& i2 = t2.instance;
    CHECK(r2.steady_queues[i2.arc_index("a")] == Rat(2, 3));
    CHECK(r2.steady_queues[i2.arc_index("b")] == Rat(0));
    CHECK(r2.dual_optimal);
  }
}

TEST_CASE("generic uniqueness: perturbed capacities make the simulation match the program dual") {
  std::mt19937_64 rng(404);
  for (int it = 0; it < 8; ++it) {
    Instance inst = example_one(Rat(1), Rat(2));
    // Independent small rational perturbations with prime denominators.
    long primes[] = {101, 103, 107, 109};
    for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
      std::uniform_int_distribution<long> jitter(1, 9);
      inst.arcs[i].capacity += Rat(jitter(rng), primes[i] * 7);
    }
    Trajectory traj = solve_equilibrium(inst);
    REQUIRE(traj.status == TrajectoryStatus::SteadyState);
    SteadyReport rep = steady_report(traj);
    CHECK(rep.dual_feasible);
    CHECK(rep.dual_optimal);
    // Unique dual: the simulated queue times coincide with the extracted ones.
    for (std::size_t e = 0; e < inst.arcs.size(); ++e)
      CHECK(rep.steady_queue_times[e] == rep.lp_dual.queue_time[e]);
    for (std::size_t v = 0; v < inst.nodes.size(); ++v)
      CHECK(rep.label_offsets[v] == rep.lp_dual.dist[v]);
  }
}
