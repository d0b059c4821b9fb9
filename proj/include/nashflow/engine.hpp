#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nashflow/instance.hpp"
#include "nashflow/snapshot.hpp"
#include "nashflow/thin_flow.hpp"

namespace nashflow {

// Thin-flow derivatives mapped back onto instance nodes/arcs.
struct InstantDerivatives {
  std::vector<Rat> label_deriv;  // per instance node, 0 where unreachable
  std::vector<Rat> flow_deriv;   // per instance arc
};

struct PhaseEvents {
  std::optional<Rat> delta;      // time to the next event; nullopt = never
  std::vector<int> activations;  // inactive arcs whose slack reaches zero
  std::vector<int> depletions;   // queued arcs whose queue reaches zero
};

enum class PhaseEnd { ArcActivates, QueueDepletes, Mixed, SteadyState, Horizon, None };

struct Phase {
  int index = 0;
  Rat theta_start;
  std::optional<Rat> theta_end;  // nullopt on the terminal infinite phase
  Snapshot start;                // state at theta_start
  ArcClassification classification;  // at entry
  InstantDerivatives derivs;
  PhaseEnd ending_event = PhaseEnd::None;
  std::vector<int> event_arcs;   // activated then depleted arcs

  Rat length() const { return *theta_end - theta_start; }
};

enum class TrajectoryStatus { SteadyState, HorizonReached, PhaseCapReached, UnboundedGrowth };

struct Limits {
  long max_phases = 1000000;
  std::optional<Rat> horizon;  // default: pseudopolynomial bound when u0 <= nu-bar
};

struct Trajectory {
  Instance instance;
  Snapshot initial;
  std::vector<Phase> phases;
  TrajectoryStatus status = TrajectoryStatus::SteadyState;
  std::optional<Rat> steady_theta;
  std::vector<std::string> diagnostics;

  // Exact state at any simulated time (linear interpolation within a phase).
  Snapshot snapshot_at(const Rat& theta) const;
  const Phase& phase_containing(const Rat& theta) const;
  // Largest finite simulated time (phase-cap/horizon end, or steady onset).
  Rat simulated_until() const;
};

struct EngineOptions {
  NtfrOptions ntfr;
};

// Solves the thin-flow problem for the current classification and maps the
// derivatives back to instance indexing.
InstantDerivatives solve_phase_derivatives(const Instance& inst, const Snapshot& snap,
                                           const ArcClassification& cls, const NtfrOptions& opts = {});

// Next-event computation: least positive time until an inactive arc's slack
// or a queued arc's queue hits zero under the given derivatives.
PhaseEvents phase_horizon(const Instance& inst, const Snapshot& snap, const ArcClassification& cls,
                          const InstantDerivatives& d);

// Linear state advance by delta <= phase_horizon(...).delta.
Snapshot advance(const Instance& inst, const Snapshot& snap, const ArcClassification& cls,
                 const InstantDerivatives& d, const Rat& delta);

// True iff the phase lasts forever with all labels moving at unit speed.
bool detect_steady_state(const Snapshot& snap, const InstantDerivatives& d, bool has_finite_event);

// Event-driven integration from theta = 0 until steady state, unbounded
// growth, the horizon, or the phase cap.
Trajectory solve_equilibrium(const Instance& inst, const Limits& limits = {},
                             const EngineOptions& opts = {});

}  // namespace nashflow
