#pragma once

#include <optional>
#include <string>

#include "nashflow/engine.hpp"
#include "nashflow/evaluate.hpp"
#include "nashflow/potential.hpp"
#include "nashflow/steady_state.hpp"

namespace nashflow {

// Self-contained run record: embeds the instance, the phase table, the
// potential trace, the steady-state program comparison, and the convergence
// bound checks. Every number is serialized as an exact rational string plus a
// 20-significant-digit decimal.
struct RunReport {
  Instance instance;
  std::string digest;
  Limits limits;
  Trajectory trajectory;
  PotentialTrace potential;
  std::optional<SteadyReport> steady;
  PseudoBounds bounds;
  std::optional<Rat> observed_theta_star;
  Rat observed_max_queue_delay;
  std::optional<bool> time_within_bound;
  std::optional<bool> queue_within_bound;
  std::vector<SchedulePiece> sink_schedule;
};

RunReport build_report(const Trajectory& traj, const Limits& limits);

std::string report_to_json(const RunReport& rep);

std::string phase_table_csv(const RunReport& rep);
std::string potential_csv(const RunReport& rep);
std::string schedule_csv(const RunReport& rep);

// Re-runs the invariant suites against a stored report: determinism of the
// phase table, potential monotonicity and telescoping, the rate oracle, the
// cumulative-flow identity, program optimality, bound compliance, and
// decimal/rational agreement. Failures name the violated check.
struct VerifyOutcome {
  std::vector<std::string> failures;
  std::vector<std::string> notes;
  bool ok() const { return failures.empty(); }
};

VerifyOutcome verify_report_json(const std::string& json_text);

}  // namespace nashflow
