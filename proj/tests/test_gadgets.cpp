#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "json.hpp"
#include "nashflow/engine.hpp"
#include "nashflow/evaluate.hpp"
#include "nashflow/gadgets.hpp"
#include "nashflow/potential.hpp"
#include "testutil.hpp"

using namespace nashflow;
using namespace nashflow::test;

namespace {

bool is_multiple_of(const Rat& x, const Rat& unit) { return (x / unit).is_integer(); }

}  // namespace

TEST_CASE("every generator passes validation and stays within the min cut") {
  std::vector<Instance> all{example_one(Rat(1), Rat(2)), example_one(Rat(12), Rat(1)),
                            figure_chain(Rat(1), Rat(1)), figure_chain(Rat(2), Rat(3, 7)),
                            example_three(), example_three_variant(Rat(1, 100)),
                            pulse(Rat(1), 1, Rat(1)), pulse(Rat(1), 2, Rat(1)),
                            pulse(Rat(1), 3, Rat(2)), two_link(1), two_link(8),
                            damper(1, Rat(1)), exponential_gadget(1)};
  for (const Instance& inst : all) {
    CHECK(validate(inst).ok());
    CHECK(inst.inflow <= min_queuing_cut(inst).capacity);
  }
}

TEST_CASE("example_one carries the four documented arcs") {
  Instance inst = example_one(Rat(1), Rat(2));
  REQUIRE(inst.arcs.size() == 4);
  CHECK(inst.arcs[inst.arc_index("e")].capacity == Rat(1, 3));
  CHECK(inst.arcs[inst.arc_index("f")].capacity == Rat(3, 4));
  CHECK(inst.arcs[inst.arc_index("g")].capacity == Rat(1, 3));
  CHECK(inst.arcs[inst.arc_index("h")].capacity == Rat(1));
  CHECK(inst.arcs[inst.arc_index("e")].delay == Rat(2));
  CHECK(inst.arcs[inst.arc_index("f")].delay == Rat(0));
  CHECK(min_queuing_cut(inst).capacity == Rat(13, 12));
  // Integral scaling keeps K = 1.
  CHECK(pseudo_bounds(example_one(Rat(12), Rat(1))).K == 1);
}

TEST_CASE("figure_chain rescales the core and appends the two-arc tail") {
  Rat u(2), rho(3);
  Instance inst = figure_chain(u, rho);
  REQUIRE(inst.arcs.size() == 6);
  CHECK(inst.arcs[inst.arc_index("e")].delay == Rat(5, 6) * rho);
  CHECK(inst.arcs[inst.arc_index("ep")].capacity == u);
  CHECK(inst.arcs[inst.arc_index("ep")].delay == rho / Rat(4));
  CHECK(inst.arcs[inst.arc_index("fp")].capacity == u / Rat(3));
  CHECK(inst.arcs[inst.arc_index("fp")].delay == Rat(0));
}

TEST_CASE("series composition") {
  Instance a = single_arc_instance(Rat(1), Rat(0), Rat(1));
  Instance b = single_arc_instance(Rat(2), Rat(1), Rat(1));
  Instance c = series_compose(a, b);
  CHECK(c.arcs.size() == 2);
  CHECK(c.nodes.size() == 3);
  CHECK(validate(c).ok());
  CHECK(c.node_id(c.source) == "1:s");
  CHECK(c.node_id(c.sink) == "2:t");
  CHECK(c.inflow == a.inflow);
  SUBCASE("pulse recursion is literally a series composition") {
    Instance direct = pulse(Rat(1), 2, Rat(1));
    Instance composed =
        series_compose(pulse(Rat(1), 1, Rat(5, 3)), pulse(Rat(13, 12), 1, Rat(1)));
    CHECK(emit_instance(direct) == emit_instance(composed));
  }
}

TEST_CASE("pulse structure: 6k arcs, capacity floor and grids") {
  for (int kk = 1; kk <= 4; ++kk) {
    Rat u(1), rho(1);
    Instance inst = pulse(u, kk, rho);
    CHECK(static_cast<int>(inst.arcs.size()) == 6 * kk);
    Rat cap_unit = rat_pow(Rat(1, 12), kk) * u;       // capacities on u/12^k
    Rat delay_unit = rat_pow(Rat(1, 3), kk) * rho / Rat(4);  // delays on rho/(4 3^k)
    Rat cap_top = rat_pow(Rat(13, 12), kk) * u;
    for (const Arc& a : inst.arcs) {
      CHECK(a.capacity >= u / Rat(3));
      CHECK(a.capacity <= cap_top);
      CHECK(is_multiple_of(a.capacity, cap_unit));
      if (!a.delay.is_zero()) CHECK(is_multiple_of(a.delay, delay_unit));
    }
  }
}

TEST_CASE("pulse amplification peaks at (13/12)^k for k up to 2") {
  for (int kk : {1, 2}) {
    Instance inst = pulse(Rat(1), kk, Rat(1));
    Trajectory traj = solve_equilibrium(inst);
    REQUIRE(traj.status == TrajectoryStatus::SteadyState);
    auto sched = sink_inflow_schedule(traj);
    Rat peak(0);
    for (const auto& p : sched) peak = max(peak, p.rate);
    CHECK(peak == rat_pow(Rat(13, 12), kk));
    // The peak piece starts at alpha_k and lasts exactly rho.
    for (const auto& p : sched)
      if (p.rate == peak) {
        CHECK(p.start == pulse_alpha(kk));
        REQUIRE(p.end.has_value());
        CHECK(*p.end - p.start == Rat(1));
      }
  }
}

TEST_CASE("pulse pre-peak trickle equals the last stage's third of its design inflow") {
  // The second stage forwards (13/12) u / 3 while its own transient builds;
  // the onset value u/3 holds only until the first stage's pulse arrives.
  Instance inst = pulse(Rat(1), 2, Rat(1));
  Trajectory traj = solve_equilibrium(inst);
  auto sched = sink_inflow_schedule(traj);
  Rat before_peak(0);
  for (const auto& p : sched) {
    if (p.rate == rat_pow(Rat(13, 12), 2)) break;
    before_peak = max(before_peak, p.rate);
  }
  CHECK(before_peak == Rat(13, 36));
  CHECK(sched[0].rate == Rat(1, 3));
}

TEST_CASE("damper windows and the drained period") {
  Instance inst = damper(1, Rat(1));
  REQUIRE(static_cast<int>(inst.arcs.size()) == 6 * 1 + 3);
  // Capacities live on the 13^-k grid within [drain/3, 1].
  Rat drain = Rat(12, 13);
  for (const Arc& a : inst.arcs) {
    CHECK(a.capacity >= drain / Rat(3));
    CHECK(a.capacity <= Rat(1));
    CHECK(is_multiple_of(a.capacity, Rat(1, 13)));
  }
  Trajectory traj = solve_equilibrium(inst);
  REQUIRE(traj.status == TrajectoryStatus::SteadyState);
  auto sched = sink_inflow_schedule(traj);
  // Pattern: trickle, full rate for rho, drain rate for >= rho, full rate.
  REQUIRE(sched.size() == 4);
  CHECK(sched[1].rate == Rat(1));
  CHECK(*sched[1].end - sched[1].start == Rat(1));
  CHECK(sched[2].rate == drain);
  CHECK(*sched[2].end - sched[2].start >= Rat(1));
  CHECK(sched[3].rate == Rat(1));
  CHECK_FALSE(sched[3].end.has_value());
  // theta1 + 2 rho < theta2.
  Rat theta1 = sched[1].start, theta2 = sched[3].start;
  CHECK(theta1 + Rat(2) < theta2);
  // Recorded calibration matches the instance.
  auto meta = nlohmann::json::parse(inst.metadata_json);
  CHECK(Rat::parse(meta.at("tau_f").get<std::string>()) ==
        inst.arcs[inst.arc_index("f")].delay);
  CHECK(Rat::parse(meta.at("theta1").get<std::string>()) == theta1);
  CHECK(Rat::parse(meta.at("theta2").get<std::string>()) == theta2);
}

TEST_CASE("exponential family structure") {
  Instance e1 = exponential_gadget(1);
  CHECK(e1.arcs.size() == 2);
  CHECK(solve_equilibrium(e1).phases.size() == 2);

  mpz_class cmin = exponential_min_c(2);
  CHECK(cmin >= 2);
  CHECK_THROWS(exponential_gadget(2, 1));

  Instance e2 = exponential_gadget(2);
  CHECK(static_cast<int>(e2.arcs.size()) < 400);  // under (10 d)^2
  Rat floor = rat_pow(Rat(12, 13), 30) / Rat(3);
  for (const Arc& a : e2.arcs) {
    CHECK(a.capacity >= floor);
    CHECK(a.capacity <= Rat(1));
  }
  // Denominator grid: everything lives on 1/(3 * 13^30).
  mpz_class grid = 3;
  for (int i = 0; i < 30; ++i) grid *= 13;
  std::vector<Rat> caps{e2.inflow};
  for (const Arc& a : e2.arcs) caps.push_back(a.capacity);
  mpz_class K = lcm_of_denominators(caps);
  mpz_class rem;
  mpz_mod(rem.get_mpz_t(), grid.get_mpz_t(), K.get_mpz_t());
  CHECK(rem == 0);
  auto meta = nlohmann::json::parse(e2.metadata_json);
  CHECK(meta.at("gadget") == "exponential");
  CHECK(mpz_class(meta.at("C").get<std::string>()) == cmin);
}

TEST_CASE("exponential(3) generates with the documented arc count") {
  // Full simulation of d >= 3 is beyond the acceptance scope; the generator
  // and its structural properties still hold.
  mpz_class C = exponential_min_c(3);
  Instance e3 = exponential_gadget(3, C);
  CHECK(static_cast<int>(e3.arcs.size()) < 900);
  CHECK(e3.arcs.size() == 6u * 45u + 3u + 185u);
  CHECK(validate(e3).ok());
}

TEST_CASE("two_link structure") {
  Instance inst = two_link(3);
  CHECK(inst.arcs[0].capacity == Rat(7, 8));
  CHECK(inst.arcs[1].capacity == Rat(1));
  CHECK(inst.arcs[1].delay == Rat(1));
  CHECK(inst.inflow == Rat(1));
  SUBCASE("steady queue saturates the short link with unit waiting time") {
    Trajectory traj = solve_equilibrium(inst);
    const Snapshot& fin = traj.phases.back().start;
    CHECK(fin.entry_queues[0] == Rat(7, 8));  // z* = nu * q with q = 1
    CHECK(fin.entry_queues[1] == Rat(0));
  }
}
