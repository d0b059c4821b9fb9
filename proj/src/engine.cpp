#include "nashflow/engine.hpp"

#include <sstream>
#include <stdexcept>

#include "nashflow/potential.hpp"

namespace nashflow {

InstantDerivatives solve_phase_derivatives(const Instance& inst, const Snapshot& snap,
                                           const ArcClassification& cls, const NtfrOptions& opts) {
  ThinFlowProblem prob = ThinFlowProblem::from_classification(inst, snap, cls);
  ThinFlow tf = solve_ntfr(prob, opts);
  InstantDerivatives d;
  d.label_deriv.assign(inst.nodes.size(), Rat(0));
  d.flow_deriv.assign(inst.arcs.size(), Rat(0));
  for (std::size_t i = 0; i < prob.orig_node.size(); ++i)
    d.label_deriv[static_cast<std::size_t>(prob.orig_node[i])] = tf.label_deriv[i];
  for (std::size_t e = 0; e < prob.arcs.size(); ++e)
    d.flow_deriv[static_cast<std::size_t>(prob.arcs[e].orig)] = tf.flow_deriv[e];
  return d;
}

PhaseEvents phase_horizon(const Instance& inst, const Snapshot& snap, const ArcClassification& cls,
                          const InstantDerivatives& d) {
  PhaseEvents ev;
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    const Arc& a = inst.arcs[i];
    if (!snap.reachable(a.tail)) continue;
    const Rat& lv = d.label_deriv[static_cast<std::size_t>(a.tail)];
    const Rat& lw = d.label_deriv[static_cast<std::size_t>(a.head)];
    if (!cls.active[i]) {
      // Slack ell_v + tau - ell_w > 0 shrinks when ell'_w exceeds ell'_v.
      Rat slack = snap.label(a.tail) + a.delay - snap.label(a.head);
      if (slack.sign() < 0) throw std::logic_error("negative slack on inactive arc '" + a.id + "'");
      Rat closing = lw - lv;
      if (closing.sign() <= 0) continue;
      Rat t = slack / closing;
      if (!ev.delta || t < *ev.delta) ev.delta = t;
    } else if (cls.queued[i]) {
      Rat slope = a.capacity * (lw - lv);
      if (slope.sign() >= 0) continue;
      Rat t = snap.entry_queues[i] / (-slope);
      if (!ev.delta || t < *ev.delta) ev.delta = t;
    }
  }
  if (!ev.delta) return ev;
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    const Arc& a = inst.arcs[i];
    if (!snap.reachable(a.tail)) continue;
    const Rat& lv = d.label_deriv[static_cast<std::size_t>(a.tail)];
    const Rat& lw = d.label_deriv[static_cast<std::size_t>(a.head)];
    if (!cls.active[i]) {
      Rat slack = snap.label(a.tail) + a.delay - snap.label(a.head);
      if (lw - lv > Rat(0) && slack == *ev.delta * (lw - lv)) ev.activations.push_back(static_cast<int>(i));
    } else if (cls.queued[i]) {
      Rat slope = a.capacity * (lw - lv);
      if (slope.sign() < 0 && snap.entry_queues[i] == *ev.delta * (-slope))
        ev.depletions.push_back(static_cast<int>(i));
    }
  }
  return ev;
}

Snapshot advance(const Instance& inst, const Snapshot& snap, const ArcClassification& cls,
                 const InstantDerivatives& d, const Rat& delta) {
  if (delta.sign() < 0) throw std::invalid_argument("advance: negative delta");
  Snapshot out = snap;
  out.theta += delta;
  for (std::size_t v = 0; v < inst.nodes.size(); ++v)
    if (out.labels[v].has_value()) *out.labels[v] += d.label_deriv[v] * delta;
  for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
    const Arc& a = inst.arcs[i];
    if (!snap.reachable(a.tail)) continue;
    out.static_flows[i] += d.flow_deriv[i] * delta;
    if (!cls.active[i]) continue;  // inactive arcs hold no queue
    Rat slope = a.capacity * (d.label_deriv[static_cast<std::size_t>(a.head)] -
                              d.label_deriv[static_cast<std::size_t>(a.tail)]);
    if (snap.entry_queues[i].is_zero() && slope.sign() < 0) continue;  // arc detaches, queue stays empty
    out.entry_queues[i] += slope * delta;
    if (out.entry_queues[i].sign() < 0)
      throw std::logic_error("advance: negative queue on arc '" + a.id + "'");
  }
  return out;
}

bool detect_steady_state(const Snapshot& snap, const InstantDerivatives& d, bool has_finite_event) {
  if (has_finite_event) return false;
  for (std::size_t v = 0; v < snap.labels.size(); ++v)
    if (snap.labels[v].has_value() && d.label_deriv[v] != Rat(1)) return false;
  return true;
}

namespace {

std::string classification_line(const Instance& inst, const ArcClassification& cls) {
  std::string s = "active={";
  bool first = true;
  for (std::size_t i = 0; i < inst.arcs.size(); ++i)
    if (cls.active[i]) {
      if (!first) s += ",";
      s += inst.arcs[i].id;
      first = false;
    }
  s += "} queued={";
  first = true;
  for (std::size_t i = 0; i < inst.arcs.size(); ++i)
    if (cls.queued[i]) {
      if (!first) s += ",";
      s += inst.arcs[i].id;
      first = false;
    }
  return s + "}";
}

}  // namespace

Snapshot Trajectory::snapshot_at(const Rat& theta) const {
  const Phase& ph = phase_containing(theta);
  return advance(instance, ph.start, ph.classification, ph.derivs, theta - ph.theta_start);
}

const Phase& Trajectory::phase_containing(const Rat& theta) const {
  if (phases.empty() || theta < phases.front().theta_start)
    throw std::out_of_range("no phase contains the requested time");
  for (const Phase& ph : phases)
    if (!ph.theta_end || theta < *ph.theta_end) return ph;
  // The final simulated instant belongs to the last phase.
  if (phases.back().theta_end && theta == *phases.back().theta_end) return phases.back();
  throw std::out_of_range("requested time beyond the simulated range");
}

Rat Trajectory::simulated_until() const {
  if (phases.empty()) return Rat(0);
  const Phase& last = phases.back();
  return last.theta_end ? *last.theta_end : last.theta_start;
}

Trajectory solve_equilibrium(const Instance& inst, const Limits& limits, const EngineOptions& opts) {
  require_valid(inst);
  Trajectory traj;
  traj.instance = inst;
  traj.initial = initial_snapshot(inst);

  CutReport cut = min_queuing_cut(inst);
  bool subcritical = inst.inflow <= cut.capacity;
  std::optional<Rat> horizon = limits.horizon;
  if (!horizon && subcritical) horizon = pseudo_bounds(inst).time_bound;

  NtfrOptions ntfr = opts.ntfr;
  if (!ntfr.cache) ntfr.cache = make_ntfr_cache();

  Snapshot snap = traj.initial;
  int guard_zero_length = 0;
  while (true) {
    if (static_cast<long>(traj.phases.size()) >= limits.max_phases) {
      traj.status = TrajectoryStatus::PhaseCapReached;
      std::size_t from = traj.phases.size() > 10 ? traj.phases.size() - 10 : 0;
      for (std::size_t i = from; i < traj.phases.size(); ++i)
        traj.diagnostics.push_back("phase " + std::to_string(i) + ": " +
                                   classification_line(inst, traj.phases[i].classification));
      break;
    }
    ArcClassification cls = classify_arcs(inst, snap);
    InstantDerivatives d = solve_phase_derivatives(inst, snap, cls, ntfr);
    PhaseEvents ev = phase_horizon(inst, snap, cls, d);

    Phase ph;
    ph.index = static_cast<int>(traj.phases.size());
    ph.theta_start = snap.theta;
    ph.start = snap;
    ph.classification = cls;
    ph.derivs = d;

    // A terminal (event-free) phase decides the status even when it starts
    // exactly at the horizon: the convergence bound is inclusive.
    if (ev.delta && horizon && snap.theta >= *horizon) {
      traj.status = TrajectoryStatus::HorizonReached;
      break;
    }

    if (!ev.delta) {
      if (detect_steady_state(snap, d, false)) {
        ph.ending_event = PhaseEnd::SteadyState;
        traj.status = TrajectoryStatus::SteadyState;
        traj.steady_theta = snap.theta;
      } else {
        if (subcritical)
          throw std::logic_error(
              "no further events and labels not steady although inflow is within the min cut");
        ph.ending_event = PhaseEnd::None;
        traj.status = TrajectoryStatus::UnboundedGrowth;
        traj.diagnostics.push_back("inflow " + inst.inflow.str() + " exceeds min queuing capacity " +
                                   cut.capacity.str() + "; labels grow at constant rates forever");
      }
      traj.phases.push_back(std::move(ph));
      break;
    }

    if (ev.delta->is_zero()) {
      // The classification already absorbs every tight arc, so a zero-length
      // phase indicates an inconsistent state; absorb once, then give up.
      if (++guard_zero_length >= 2) {
        traj.status = TrajectoryStatus::PhaseCapReached;
        traj.diagnostics.push_back("zero-length phase repeated at theta = " + snap.theta.str());
        traj.phases.push_back(std::move(ph));
        break;
      }
      continue;
    }
    guard_zero_length = 0;

    Rat theta_end = snap.theta + *ev.delta;
    if (horizon && theta_end > *horizon) {
      Rat step = *horizon - snap.theta;
      ph.theta_end = *horizon;
      ph.ending_event = PhaseEnd::Horizon;
      snap = advance(inst, snap, cls, d, step);
      traj.phases.push_back(std::move(ph));
      traj.status = TrajectoryStatus::HorizonReached;
      break;
    }

    ph.theta_end = theta_end;
    if (!ev.activations.empty() && !ev.depletions.empty()) ph.ending_event = PhaseEnd::Mixed;
    else if (!ev.activations.empty()) ph.ending_event = PhaseEnd::ArcActivates;
    else ph.ending_event = PhaseEnd::QueueDepletes;
    ph.event_arcs = ev.activations;
    ph.event_arcs.insert(ph.event_arcs.end(), ev.depletions.begin(), ev.depletions.end());

    snap = advance(inst, snap, cls, d, *ev.delta);
    traj.phases.push_back(std::move(ph));
  }
  return traj;
}

}  // namespace nashflow
