#pragma once

#include "nashflow/engine.hpp"

namespace nashflow {

// Piecewise-constant outflow rate at the sink in the sink's local time.
struct SchedulePiece {
  Rat start;
  std::optional<Rat> end;  // nullopt on the final piece
  Rat rate;
};

// u0 / ell'_t per phase, mapped to sink local time and merged where adjacent
// phases share the rate. Phases during which the sink's clock stands still
// contribute no interval.
std::vector<SchedulePiece> sink_inflow_schedule(const Trajectory& traj);

Rat schedule_rate_at(const std::vector<SchedulePiece>& sched, const Rat& local_time);

// The equilibrium identity: cumulative inflow at entry local time equals the
// static flow x_e(theta), and cumulative outflow at exit local time equals
// x_e(theta) plus the initial queue content. The outflow side is rebuilt
// independently from the queue-at-capacity semantics, so it is the
// substantive check.
struct CumulativeCheck {
  bool ok = true;
  std::string detail;  // violating arc and the mismatching values
};

CumulativeCheck check_cumulative_identity(const Trajectory& traj, const Rat& theta);

}  // namespace nashflow
