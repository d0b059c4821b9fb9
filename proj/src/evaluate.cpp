#include "nashflow/evaluate.hpp"

#include <stdexcept>

namespace nashflow {

std::vector<SchedulePiece> sink_inflow_schedule(const Trajectory& traj) {
  const Instance& inst = traj.instance;
  std::vector<SchedulePiece> out;
  auto push = [&](const Rat& start, std::optional<Rat> end, const Rat& rate) {
    if (end && *end == start) return;
    if (!out.empty() && !out.back().end) return;  // already extended to infinity
    if (!out.empty() && out.back().rate == rate) {
      out.back().end = end;
      return;
    }
    out.push_back({start, end, rate});
  };
  for (const Phase& ph : traj.phases) {
    const Rat& lt_rate = ph.derivs.label_deriv[static_cast<std::size_t>(inst.sink)];
    if (lt_rate.is_zero()) continue;  // sink clock frozen; no local time passes
    Rat local_start = ph.start.label(inst.sink);
    std::optional<Rat> local_end;
    if (ph.theta_end) local_end = local_start + lt_rate * (*ph.theta_end - ph.theta_start);
    push(local_start, local_end, inst.inflow / lt_rate);
  }
  return out;
}

Rat schedule_rate_at(const std::vector<SchedulePiece>& sched, const Rat& local_time) {
  for (const auto& p : sched)
    if (local_time >= p.start && (!p.end || local_time < *p.end)) return p.rate;
  throw std::out_of_range("schedule_rate_at: local time outside the schedule");
}

namespace {

// Cumulative mass of consecutive constant-rate segments up to local time t.
struct Segment {
  Rat from, to, rate;
};

Rat cumulative(const std::vector<Segment>& segs, const Rat& t) {
  Rat total(0);
  for (const auto& s : segs) {
    if (t <= s.from) break;
    total += s.rate * (min(t, s.to) - s.from);
  }
  return total;
}

}  // namespace

CumulativeCheck check_cumulative_identity(const Trajectory& traj, const Rat& theta) {
  const Instance& inst = traj.instance;
  Snapshot at = traj.snapshot_at(theta);

  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    const Arc& a = inst.arcs[i];
    if (!traj.initial.reachable(a.tail)) continue;

    // Inflow segments over entry local time; outflow segments over exit local
    // time per the queue-at-capacity semantics: rate nu while queued (the
    // exit clock is the head label while the arc is tight), pass-through
    // delayed by tau while empty. An initial queue drains at rate nu starting
    // right behind the link delay.
    std::vector<Segment> inflow, outflow;
    if (a.initial_queue.sign() > 0)
      outflow.push_back({traj.initial.label(a.tail) + a.delay, traj.initial.label(a.head), a.capacity});

    for (const Phase& ph : traj.phases) {
      if (theta <= ph.theta_start) break;
      Rat upto = theta;
      if (ph.theta_end && *ph.theta_end < theta) upto = *ph.theta_end;
      Rat dtheta = upto - ph.theta_start;

      const Rat& lv = ph.start.label(a.tail);
      const Rat& lv_rate = ph.derivs.label_deriv[static_cast<std::size_t>(a.tail)];
      const Rat& x_rate = ph.derivs.flow_deriv[i];
      if (x_rate.sign() > 0) {
        if (lv_rate.is_zero())
          return {false, "arc '" + a.id + "': inflow while the tail clock is frozen"};
        inflow.push_back({lv, lv + lv_rate * dtheta, x_rate / lv_rate});
      }
      if (ph.classification.queued[i]) {
        Rat t0 = ph.start.label(a.head);
        Rat t1 = t0 + ph.derivs.label_deriv[static_cast<std::size_t>(a.head)] * dtheta;
        outflow.push_back({t0, t1, a.capacity});
      } else if (x_rate.sign() > 0) {
        outflow.push_back({lv + a.delay, lv + a.delay + lv_rate * dtheta, x_rate / lv_rate});
      }
    }

    Rat x_theta = at.static_flows[i];
    Rat entry_local = at.label(a.tail);
    Rat exit_local = at.label(a.head);
    Rat f_in = cumulative(inflow, entry_local);
    if (f_in != x_theta)
      return {false, "arc '" + a.id + "': cumulative inflow " + f_in.str() + " at entry time " +
                         entry_local.str() + " differs from x = " + x_theta.str()};
    Rat f_out = cumulative(outflow, exit_local);
    Rat expected = x_theta + a.initial_queue;
    if (f_out != expected)
      return {false, "arc '" + a.id + "': cumulative outflow " + f_out.str() + " at exit time " +
                         exit_local.str() + " differs from x + z0 = " + expected.str()};
  }
  return {};
}

}  // namespace nashflow
