#pragma once

#include "nashflow/engine.hpp"

namespace nashflow {

// Optimal solution of the steady-flow program: a min-cost s->t flow of value
// u0 under capacities nu_e with arc costs tau_e.
struct SteadyFlow {
  std::vector<Rat> flow;  // per arc
  Rat cost;
};

// Feasible point of the dual program max u0 d_t - sum nu_e q_e subject to
// d_w <= d_v + tau_e + q_e and q >= 0, d_s = 0.
struct DualSolution {
  std::vector<Rat> dist;   // per node
  std::vector<Rat> queue_time;  // per arc
  Rat objective;
};

// Successive shortest augmenting paths with exact arithmetic. Throws when
// u0 exceeds the minimum queuing capacity (the program is infeasible).
SteadyFlow solve_primal(const Instance& inst);

// Complementary dual extracted from residual distances of an optimal flow.
DualSolution extract_dual(const Instance& inst, const SteadyFlow& primal);

// True iff both are feasible, objectives coincide, and complementary
// slackness holds exactly.
bool verify_optimal_pair(const Instance& inst, const SteadyFlow& flow, const DualSolution& dual);

// Comparison of the simulated steady state against the program pair.
struct SteadyReport {
  Rat steady_theta;
  std::vector<Rat> steady_queues;       // z* per arc (volume)
  std::vector<Rat> steady_queue_times;  // q* = z*/nu per arc
  std::vector<Rat> label_offsets;       // d*_v = ell_v(theta*) - theta*
  std::vector<Rat> max_transient_queue; // per arc, over phase boundaries
  SteadyFlow lp_primal;
  DualSolution lp_dual;
  Rat simulated_dual_objective;
  bool dual_feasible = false;
  bool dual_optimal = false;          // simulated objective equals the optimum
  bool matches_lp_objective = false;  // final-phase flow is primal-optimal
};

// Requires traj.status == SteadyState.
SteadyReport steady_report(const Trajectory& traj);

}  // namespace nashflow
