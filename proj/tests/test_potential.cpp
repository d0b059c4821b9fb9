#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "nashflow/gadgets.hpp"
#include "nashflow/potential.hpp"
#include "nashflow/steady_state.hpp"
#include "testutil.hpp"

using namespace nashflow;
using namespace nashflow::test;

TEST_CASE("phi values") {
  SUBCASE("zero at the start of example one") {
    Instance inst = example_one(Rat(1), Rat(1));
    CHECK(phi(inst, initial_snapshot(inst)) == Rat(0));
  }
  SUBCASE("constant u0 tau on an uncongested single arc") {
    Instance inst = single_arc_instance(Rat(3), Rat(7), Rat(2));
    Trajectory traj = solve_equilibrium(inst);
    CHECK(phi(inst, traj.initial) == Rat(14));
    CHECK(phi(inst, traj.snapshot_at(Rat(9))) == Rat(14));
  }
  SUBCASE("reaches the program optimum at steady state") {
    Instance inst = example_one(Rat(1), Rat(2));
    Trajectory traj = solve_equilibrium(inst);
    CHECK(phi(inst, traj.phases.back().start) == Rat(4, 3));
    CHECK(phi(inst, traj.phases.back().start) == solve_primal(inst).cost);
  }
}

TEST_CASE("phase-1 rate of example one is 43u/36, by both routes") {
  for (const Rat& u : {Rat(1), Rat(3), Rat(5, 7)}) {
    Instance inst = example_one(u, Rat(2));
    Trajectory traj = solve_equilibrium(inst);
    const Phase& ph = traj.phases[0];
    CHECK(phi_rate(inst, ph.classification, ph.derivs) == Rat(43, 36) * u);
    CHECK(phi_rate_oracle(inst, ph.classification, ph.derivs) == Rat(43, 36) * u);
  }
}

TEST_CASE("rate is zero exactly on steady phases") {
  Instance inst = example_one(Rat(1), Rat(2));
  Trajectory traj = solve_equilibrium(inst);
  REQUIRE(traj.phases.size() == 4);
  CHECK(phi_rate(inst, traj.phases[3].classification, traj.phases[3].derivs) == Rat(0));
  for (int i = 0; i < 3; ++i) {
    std::size_t si = static_cast<std::size_t>(i);
    CHECK(phi_rate(inst, traj.phases[si].classification, traj.phases[si].derivs) > Rat(0));
  }
}

TEST_CASE("closed form equals the cut-decomposition integral on the catalog") {
  std::vector<Instance> catalog{example_one(Rat(1), Rat(2)),   example_one(Rat(12), Rat(1)),
                                figure_chain(Rat(1), Rat(1)),  example_three(),
                                example_three_variant(Rat(1, 100)), two_link(6),
                                pulse(Rat(1), 2, Rat(1))};
  for (const Instance& inst : catalog) {
    Trajectory traj = solve_equilibrium(inst);
    REQUIRE(traj.status == TrajectoryStatus::SteadyState);
    PotentialTrace tr = potential_trace(traj);
    REQUIRE(tr.alpha.has_value());
    for (std::size_t i = 0; i < traj.phases.size(); ++i) {
      const Phase& ph = traj.phases[i];
      Rat closed = phi_rate(inst, ph.classification, ph.derivs);
      CHECK(closed == phi_rate_oracle(inst, ph.classification, ph.derivs));
      CHECK(closed == tr.points[i].rate);
      CHECK(closed.sign() >= 0);
      // Zero rate if and only if every label moves at unit speed.
      bool unit = true;
      for (std::size_t v = 0; v < inst.nodes.size(); ++v)
        if (ph.start.labels[v].has_value() && ph.derivs.label_deriv[v] != Rat(1)) unit = false;
      CHECK(closed.is_zero() == unit);
      // Phi stays below the program optimum.
      CHECK(tr.points[i].value <= *tr.alpha);
    }
    // Telescoping: phi at each boundary equals the integrated rate.
    for (std::size_t i = 0; i + 1 < traj.phases.size(); ++i)
      CHECK(tr.points[i + 1].value ==
            tr.points[i].value + tr.points[i].rate * traj.phases[i].length());
    // The steady phase pins phi at alpha.
    if (traj.status == TrajectoryStatus::SteadyState)
      CHECK(tr.points.back().value == *tr.alpha);
  }
}

TEST_CASE("the rate does not depend on the flow choice within a phase") {
  // Flow choice only affects membership of arcs with equal label speeds at
  // both ends, whose contribution vanishes; adding or removing every such arc
  // from the flow-positive set leaves the rate unchanged.
  Instance inst = example_one(Rat(1), Rat(2));
  Trajectory traj = solve_equilibrium(inst);
  for (const Phase& ph : traj.phases) {
    InstantDerivatives all_in = ph.derivs;
    InstantDerivatives all_out = ph.derivs;
    for (std::size_t e = 0; e < inst.arcs.size(); ++e) {
      if (!ph.classification.active[e] || ph.classification.queued[e]) continue;
      const Arc& a = inst.arcs[e];
      if (ph.derivs.label_deriv[static_cast<std::size_t>(a.tail)] !=
          ph.derivs.label_deriv[static_cast<std::size_t>(a.head)])
        continue;
      all_in.flow_deriv[e] = Rat(1, 1000);  // pretend it carries flow
      all_out.flow_deriv[e] = Rat(0);       // pretend it does not
    }
    Rat base = phi_rate(inst, ph.classification, ph.derivs);
    CHECK(phi_rate(inst, ph.classification, all_in) == base);
    CHECK(phi_rate(inst, ph.classification, all_out) == base);
  }
}

TEST_CASE("pseudopolynomial bounds") {
  SUBCASE("two_link: K = 2^L, M = 2 - 2^-L, T = 1") {
    for (int L : {2, 5}) {
      Instance inst = two_link(L);
      PseudoBounds b = pseudo_bounds(inst);
      mpz_class k;
      mpz_ui_pow_ui(k.get_mpz_t(), 2, static_cast<unsigned long>(L));
      CHECK(b.K == k);
      CHECK(b.M == Rat(2) - rat_pow(Rat(1, 2), L));
      CHECK(b.T == Rat(1));
      CHECK(b.time_bound == Rat(2) * Rat(k) * Rat(k) * b.M * b.M);
      // The observed first-phase end stays within the bound.
      Trajectory traj = solve_equilibrium(inst);
      CHECK(*traj.phases[0].theta_end <= b.time_bound);
      CHECK(*traj.steady_theta <= b.time_bound);
    }
  }
  SUBCASE("unit single arc") {
    Instance inst = single_arc_instance(Rat(1), Rat(1), Rat(1));
    PseudoBounds b = pseudo_bounds(inst);
    CHECK(b.K == 1);
    CHECK(b.M == Rat(1));
    CHECK(b.T == Rat(1));
    CHECK(b.time_bound == Rat(2));
    CHECK(*solve_equilibrium(inst).steady_theta == Rat(0));
  }
  SUBCASE("initial queues enter T") {
    Instance inst = single_arc_instance(Rat(2), Rat(1), Rat(1), Rat(4));
    CHECK(pseudo_bounds(inst).T == Rat(3));  // tau + z0/nu = 1 + 2
  }
}

TEST_CASE("integer instance: rate floor 1/(2M) and the K=1 bounds") {
  Instance inst = example_one(Rat(12), Rat(1));  // capacities 4, 9, 4, 12
  PseudoBounds b = pseudo_bounds(inst);
  REQUIRE(b.K == 1);
  CHECK(b.M == Rat(29));
  Trajectory traj = solve_equilibrium(inst);
  REQUIRE(traj.status == TrajectoryStatus::SteadyState);
  Rat floor = Rat(1) / (Rat(2) * b.M);
  for (const Phase& ph : traj.phases) {
    Rat rate = phi_rate(inst, ph.classification, ph.derivs);
    if (!ph.theta_end) CHECK(rate.is_zero());
    else CHECK(rate >= floor);
  }
  CHECK(*traj.steady_theta <= Rat(2) * b.M * b.M * b.T);
  // Queueing delays z/nu within 2 u0 M^2 T, and labels within u0 speed.
  Rat delay_bound = Rat(2) * inst.inflow * b.M * b.M * b.T;
  for (const Phase& ph : traj.phases) {
    for (std::size_t e = 0; e < inst.arcs.size(); ++e)
      CHECK(ph.start.entry_queues[e] / inst.arcs[e].capacity <= delay_bound);
    for (std::size_t v = 0; v < inst.nodes.size(); ++v)
      CHECK(ph.derivs.label_deriv[v] <= inst.inflow);
  }
}

TEST_CASE("potential trace spans unbounded runs without a program optimum") {
  Instance inst = example_one(Rat(1), Rat(2));
  inst.inflow = Rat(2);
  Trajectory traj = solve_equilibrium(inst);
  PotentialTrace tr = potential_trace(traj);
  CHECK_FALSE(tr.alpha.has_value());
  for (const auto& pt : tr.points) CHECK(pt.rate.sign() >= 0);
}
