#pragma once

#include "nashflow/engine.hpp"

namespace nashflow {

// Pinned integrality data for the convergence bounds: K is the least positive
// integer making every capacity and the inflow an integer multiple of 1/K,
// M the total capacity, T the total free-flow plus initial queueing delay.
struct PseudoBounds {
  mpz_class K;
  Rat M;
  Rat T;
  Rat time_bound;   // 2 K^2 M^2 T
  Rat queue_bound;  // 2 u0 K^3 M^2 T, bound on queueing delays z/nu
};

PseudoBounds pseudo_bounds(const Instance& inst);

// The Lyapunov potential u0 (ell_t - ell_s) - sum of entry-time queue volumes.
Rat phi(const Instance& inst, const Snapshot& snap);

// Its per-phase rate in closed form: u0 (ell'_t - ell'_s) minus the capacity-
// weighted label stretches over E* and the flow-carrying active arcs.
Rat phi_rate(const Instance& inst, const ArcClassification& cls, const InstantDerivatives& d);

// Independent route to the same number: minus the exact integral of the
// capacity imbalance of the sub-level sets V_z = {v : ell'_v <= z}, with the
// return arc of capacity u0 closing the circulation.
Rat phi_rate_oracle(const Instance& inst, const ArcClassification& cls, const InstantDerivatives& d);

struct PotentialTracePoint {
  Rat theta_start;
  Rat value;  // Phi at theta_start
  Rat rate;   // Phi' during the phase
};

struct PotentialTrace {
  std::vector<PotentialTracePoint> points;
  std::optional<Rat> alpha;  // optimum of the steady-flow program, if feasible
};

PotentialTrace potential_trace(const Trajectory& traj);

}  // namespace nashflow
