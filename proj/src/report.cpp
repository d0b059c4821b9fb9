#include "nashflow/report.hpp"

#include <sstream>

#include "json.hpp"

namespace nashflow {

using json = nlohmann::ordered_json;

namespace {

json num(const Rat& r) {
  json j;
  j["r"] = r.str();
  j["d"] = r.decimal(20);
  return j;
}

Rat num_back(const json& j) { return Rat::parse(j.at("r").get<std::string>()); }

const char* status_name(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::SteadyState: return "steady_state";
    case TrajectoryStatus::HorizonReached: return "horizon_reached";
    case TrajectoryStatus::PhaseCapReached: return "phase_cap_reached";
    case TrajectoryStatus::UnboundedGrowth: return "unbounded_growth";
  }
  return "?";
}

const char* event_name(PhaseEnd e) {
  switch (e) {
    case PhaseEnd::ArcActivates: return "arc_activates";
    case PhaseEnd::QueueDepletes: return "queue_depletes";
    case PhaseEnd::Mixed: return "mixed";
    case PhaseEnd::SteadyState: return "steady_state";
    case PhaseEnd::Horizon: return "horizon";
    case PhaseEnd::None: return "none";
  }
  return "?";
}

}  // namespace

RunReport build_report(const Trajectory& traj, const Limits& limits) {
  RunReport rep;
  rep.instance = traj.instance;
  rep.digest = instance_digest(traj.instance);
  rep.limits = limits;
  rep.trajectory = traj;
  rep.potential = potential_trace(traj);
  if (traj.status == TrajectoryStatus::SteadyState) rep.steady = steady_report(traj);
  rep.bounds = pseudo_bounds(traj.instance);
  rep.observed_theta_star = traj.steady_theta;

  Rat max_delay(0);
  auto scan = [&](const Snapshot& snap) {
    for (std::size_t i = 0; i < traj.instance.arcs.size(); ++i)
      max_delay = max(max_delay, snap.entry_queues[i] / traj.instance.arcs[i].capacity);
  };
  for (const Phase& ph : traj.phases) scan(ph.start);
  if (!traj.phases.empty() && traj.phases.back().theta_end) {
    const Phase& last = traj.phases.back();
    scan(advance(traj.instance, last.start, last.classification, last.derivs, last.length()));
  }
  rep.observed_max_queue_delay = max_delay;

  if (traj.instance.inflow <= min_queuing_cut(traj.instance).capacity) {
    if (traj.status == TrajectoryStatus::SteadyState)
      rep.time_within_bound = *rep.observed_theta_star <= rep.bounds.time_bound;
    rep.queue_within_bound = rep.observed_max_queue_delay <= rep.bounds.queue_bound;
  }
  rep.sink_schedule = sink_inflow_schedule(traj);
  return rep;
}

std::string report_to_json(const RunReport& rep) {
  const Instance& inst = rep.instance;
  json j;
  j["format"] = "nashflow-report/1";
  j["digest"] = rep.digest;
  j["instance"] = json::parse(emit_instance(inst));
  j["limits"]["max_phases"] = rep.limits.max_phases;
  j["limits"]["horizon"] = rep.limits.horizon ? num(*rep.limits.horizon) : json();
  j["status"] = status_name(rep.trajectory.status);
  j["theta_star"] = rep.observed_theta_star ? num(*rep.observed_theta_star) : json();
  j["phase_count"] = rep.trajectory.phases.size();

  j["phases"] = json::array();
  for (const Phase& ph : rep.trajectory.phases) {
    json p;
    p["index"] = ph.index;
    p["theta_start"] = num(ph.theta_start);
    p["theta_end"] = ph.theta_end ? num(*ph.theta_end) : json();
    p["event"] = event_name(ph.ending_event);
    p["event_arcs"] = json::array();
    for (int e : ph.event_arcs) p["event_arcs"].push_back(inst.arcs[static_cast<std::size_t>(e)].id);
    p["active"] = json::array();
    p["queued"] = json::array();
    for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
      if (ph.classification.active[i]) p["active"].push_back(inst.arcs[i].id);
      if (ph.classification.queued[i]) p["queued"].push_back(inst.arcs[i].id);
    }
    json lab, labd, q, x, xd;
    for (std::size_t v = 0; v < inst.nodes.size(); ++v) {
      if (!ph.start.labels[v].has_value()) continue;
      lab[inst.nodes[v]] = num(*ph.start.labels[v]);
      labd[inst.nodes[v]] = num(ph.derivs.label_deriv[v]);
    }
    for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
      q[inst.arcs[i].id] = num(ph.start.entry_queues[i]);
      x[inst.arcs[i].id] = num(ph.start.static_flows[i]);
      xd[inst.arcs[i].id] = num(ph.derivs.flow_deriv[i]);
    }
    p["labels"] = lab;
    p["label_deriv"] = labd;
    p["queues"] = q;
    p["static_flows"] = x;
    p["flow_deriv"] = xd;
    j["phases"].push_back(std::move(p));
  }

  j["potential"]["alpha"] = rep.potential.alpha ? num(*rep.potential.alpha) : json();
  j["potential"]["trace"] = json::array();
  for (const auto& pt : rep.potential.points) {
    json t;
    t["theta_start"] = num(pt.theta_start);
    t["phi"] = num(pt.value);
    t["rate"] = num(pt.rate);
    j["potential"]["trace"].push_back(std::move(t));
  }

  if (rep.steady) {
    const SteadyReport& sr = *rep.steady;
    json lp, sim, checks;
    json flow, qtime, ddist;
    for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
      flow[inst.arcs[i].id] = num(sr.lp_primal.flow[i]);
      qtime[inst.arcs[i].id] = num(sr.lp_dual.queue_time[i]);
    }
    for (std::size_t v = 0; v < inst.nodes.size(); ++v) ddist[inst.nodes[v]] = num(sr.lp_dual.dist[v]);
    lp["flow"] = flow;
    lp["cost"] = num(sr.lp_primal.cost);
    lp["dual_dist"] = ddist;
    lp["dual_queue_time"] = qtime;
    lp["dual_objective"] = num(sr.lp_dual.objective);

    json zq, zt, off, mt;
    for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
      zq[inst.arcs[i].id] = num(sr.steady_queues[i]);
      zt[inst.arcs[i].id] = num(sr.steady_queue_times[i]);
      mt[inst.arcs[i].id] = num(sr.max_transient_queue[i]);
    }
    for (std::size_t v = 0; v < inst.nodes.size(); ++v) off[inst.nodes[v]] = num(sr.label_offsets[v]);
    sim["theta_star"] = num(sr.steady_theta);
    sim["queues"] = zq;
    sim["queue_times"] = zt;
    sim["label_offsets"] = off;
    sim["max_transient_queue"] = mt;
    sim["dual_objective"] = num(sr.simulated_dual_objective);

    checks["dual_feasible"] = sr.dual_feasible;
    checks["dual_optimal"] = sr.dual_optimal;
    checks["matches_lp_objective"] = sr.matches_lp_objective;
    j["steady_state"]["lp"] = lp;
    j["steady_state"]["simulated"] = sim;
    j["steady_state"]["checks"] = checks;
  } else {
    j["steady_state"] = json();
  }

  j["bounds"]["K"] = rep.bounds.K.get_str();
  j["bounds"]["M"] = num(rep.bounds.M);
  j["bounds"]["T"] = num(rep.bounds.T);
  j["bounds"]["time_bound"] = num(rep.bounds.time_bound);
  j["bounds"]["queue_bound"] = num(rep.bounds.queue_bound);
  j["bounds"]["observed_theta_star"] = rep.observed_theta_star ? num(*rep.observed_theta_star) : json();
  j["bounds"]["observed_max_queue_delay"] = num(rep.observed_max_queue_delay);
  j["bounds"]["time_within_bound"] = rep.time_within_bound ? json(*rep.time_within_bound) : json();
  j["bounds"]["queue_within_bound"] = rep.queue_within_bound ? json(*rep.queue_within_bound) : json();

  j["sink_schedule"] = json::array();
  for (const auto& p : rep.sink_schedule) {
    json sp;
    sp["start"] = num(p.start);
    sp["end"] = p.end ? num(*p.end) : json();
    sp["rate"] = num(p.rate);
    j["sink_schedule"].push_back(std::move(sp));
  }
  j["diagnostics"] = rep.trajectory.diagnostics;
  return j.dump(1) + "\n";
}

std::string phase_table_csv(const RunReport& rep) {
  const Instance& inst = rep.instance;
  std::ostringstream os;
  os << "# source time theta; decimal approximations (20 significant digits)\n";
  os << "index,theta_start,theta_end,event";
  for (const auto& n : inst.nodes) os << ",label:" << n << ",label_deriv:" << n;
  for (const auto& a : inst.arcs) os << ",queue:" << a.id << ",flow_deriv:" << a.id;
  os << "\n";
  for (const Phase& ph : rep.trajectory.phases) {
    os << ph.index << "," << ph.theta_start.decimal(20) << ","
       << (ph.theta_end ? ph.theta_end->decimal(20) : "inf") << "," << event_name(ph.ending_event);
    for (std::size_t v = 0; v < inst.nodes.size(); ++v) {
      if (ph.start.labels[v].has_value())
        os << "," << ph.start.labels[v]->decimal(20) << "," << ph.derivs.label_deriv[v].decimal(20);
      else
        os << ",,";
    }
    for (std::size_t i = 0; i < inst.arcs.size(); ++i)
      os << "," << ph.start.entry_queues[i].decimal(20) << "," << ph.derivs.flow_deriv[i].decimal(20);
    os << "\n";
  }
  return os.str();
}

std::string potential_csv(const RunReport& rep) {
  std::ostringstream os;
  os << "# source time theta; exact rationals and 20-digit decimals\n";
  os << "theta_start,phi,phi_rate,theta_start_dec,phi_dec,phi_rate_dec\n";
  for (const auto& pt : rep.potential.points)
    os << pt.theta_start.str() << "," << pt.value.str() << "," << pt.rate.str() << ","
       << pt.theta_start.decimal(20) << "," << pt.value.decimal(20) << "," << pt.rate.decimal(20) << "\n";
  return os.str();
}

std::string schedule_csv(const RunReport& rep) {
  std::ostringstream os;
  os << "# sink-local time axis; exact rationals and 20-digit decimals\n";
  os << "local_start,local_end,rate,local_start_dec,local_end_dec,rate_dec\n";
  for (const auto& p : rep.sink_schedule)
    os << p.start.str() << "," << (p.end ? p.end->str() : "inf") << "," << p.rate.str() << ","
       << p.start.decimal(20) << "," << (p.end ? p.end->decimal(20) : "inf") << ","
       << p.rate.decimal(20) << "\n";
  return os.str();
}

namespace {

// Recursively checks that every {"r","d"} pair in a stored report agrees.
void check_decimals(const json& j, std::vector<std::string>& failures, const std::string& where) {
  if (j.is_object()) {
    if (j.contains("r") && j.contains("d") && j.size() == 2 && j["r"].is_string()) {
      Rat r = Rat::parse(j["r"].get<std::string>());
      if (r.decimal(20) != j["d"].get<std::string>())
        failures.push_back("decimal digits: mismatch at " + where);
      return;
    }
    for (auto it = j.begin(); it != j.end(); ++it)
      check_decimals(it.value(), failures, where + "." + it.key());
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      check_decimals(j[i], failures, where + "[" + std::to_string(i) + "]");
  }
}

}  // namespace

VerifyOutcome verify_report_json(const std::string& json_text) {
  VerifyOutcome out;
  json stored;
  try {
    stored = json::parse(json_text);
  } catch (const std::exception& e) {
    out.failures.push_back(std::string("report is not valid JSON: ") + e.what());
    return out;
  }
  Instance inst;
  try {
    inst = parse_instance(stored.at("instance").dump());
  } catch (const std::exception& e) {
    out.failures.push_back(std::string("embedded instance: ") + e.what());
    return out;
  }
  if (instance_digest(inst) != stored.value("digest", ""))
    out.failures.push_back("digest: embedded instance does not match the stored digest");

  Limits limits;
  limits.max_phases = stored.at("limits").at("max_phases").get<long>();
  if (!stored.at("limits").at("horizon").is_null())
    limits.horizon = num_back(stored["limits"]["horizon"]);

  Trajectory traj = solve_equilibrium(inst, limits);
  RunReport fresh = build_report(traj, limits);
  json fresh_json = json::parse(report_to_json(fresh));

  if (fresh_json.at("phases") != stored.at("phases"))
    out.failures.push_back("phase table: stored phases differ from a deterministic re-run");
  else
    out.notes.push_back("phase table reproduced bit-exactly (" +
                        std::to_string(traj.phases.size()) + " phases)");
  if (!traj.phases.empty() && traj.phases.front().theta_end)
    out.notes.push_back("first phase ends at theta = " + traj.phases.front().theta_end->str());

  // Named invariant checks against the stored numbers.
  const json& trace = stored.at("potential").at("trace");
  const json& phases = stored.at("phases");
  bool steady = stored.at("status") == "steady_state";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    Rat rate = num_back(trace[i].at("rate"));
    if (rate.sign() < 0) out.failures.push_back("phi monotonicity: negative rate in phase " + std::to_string(i));
    bool is_terminal_steady = steady && i + 1 == trace.size();
    if (is_terminal_steady && !rate.is_zero())
      out.failures.push_back("phi monotonicity: nonzero rate in the steady phase");
    if (!is_terminal_steady && rate.is_zero() && steady)
      out.failures.push_back("phi monotonicity: zero rate before the steady phase");
  }
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    Rat phi0 = num_back(trace[i].at("phi"));
    Rat phi1 = num_back(trace[i + 1].at("phi"));
    Rat rate = num_back(trace[i].at("rate"));
    Rat t0 = num_back(trace[i].at("theta_start"));
    Rat t1 = num_back(trace[i + 1].at("theta_start"));
    if (phi1 != phi0 + rate * (t1 - t0))
      out.failures.push_back("phi telescoping: phase " + std::to_string(i) +
                             " does not integrate to the next value");
  }
  if (!stored.at("potential").at("alpha").is_null()) {
    Rat alpha = num_back(stored["potential"]["alpha"]);
    for (std::size_t i = 0; i < trace.size(); ++i)
      if (num_back(trace[i].at("phi")) > alpha)
        out.failures.push_back("phi bound: phase " + std::to_string(i) + " exceeds the steady-flow optimum");
  }

  // Rate oracle per stored phase.
  if (phases.size() == trace.size()) {
    for (std::size_t i = 0; i < phases.size(); ++i) {
      const json& p = phases[i];
      ArcClassification cls;
      cls.active.assign(inst.arcs.size(), false);
      cls.queued.assign(inst.arcs.size(), false);
      for (const auto& id : p.at("active")) cls.active[static_cast<std::size_t>(inst.arc_index(id))] = true;
      for (const auto& id : p.at("queued")) cls.queued[static_cast<std::size_t>(inst.arc_index(id))] = true;
      InstantDerivatives d;
      d.label_deriv.assign(inst.nodes.size(), Rat(0));
      d.flow_deriv.assign(inst.arcs.size(), Rat(0));
      for (auto it = p.at("label_deriv").begin(); it != p.at("label_deriv").end(); ++it)
        d.label_deriv[static_cast<std::size_t>(inst.node_index(it.key()))] = num_back(it.value());
      for (auto it = p.at("flow_deriv").begin(); it != p.at("flow_deriv").end(); ++it)
        d.flow_deriv[static_cast<std::size_t>(inst.arc_index(it.key()))] = num_back(it.value());
      Rat closed = phi_rate(inst, cls, d);
      Rat oracle = phi_rate_oracle(inst, cls, d);
      if (closed != oracle)
        out.failures.push_back("phi rate oracle: disagreement in phase " + std::to_string(i));
      if (closed != num_back(trace[i].at("rate")))
        out.failures.push_back("phi rate: stored rate differs in phase " + std::to_string(i));
    }
  } else {
    out.failures.push_back("potential trace length differs from the phase table");
  }

  // Cumulative identity at phase boundaries and midpoints of the re-run.
  for (const Phase& ph : traj.phases) {
    std::vector<Rat> samples{ph.theta_start};
    if (ph.theta_end) samples.push_back((ph.theta_start + *ph.theta_end) / Rat(2));
    for (const Rat& th : samples) {
      auto c = check_cumulative_identity(traj, th);
      if (!c.ok) {
        out.failures.push_back("cumulative identity: " + c.detail);
        break;
      }
    }
  }

  // Program pair from the stored block.
  if (!stored.at("steady_state").is_null()) {
    const json& lp = stored["steady_state"]["lp"];
    SteadyFlow flow;
    DualSolution dual;
    flow.flow.assign(inst.arcs.size(), Rat(0));
    dual.queue_time.assign(inst.arcs.size(), Rat(0));
    dual.dist.assign(inst.nodes.size(), Rat(0));
    for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
      flow.flow[i] = num_back(lp.at("flow").at(inst.arcs[i].id));
      dual.queue_time[i] = num_back(lp.at("dual_queue_time").at(inst.arcs[i].id));
    }
    for (std::size_t v = 0; v < inst.nodes.size(); ++v)
      dual.dist[v] = num_back(lp.at("dual_dist").at(inst.nodes[v]));
    flow.cost = num_back(lp.at("cost"));
    dual.objective = num_back(lp.at("dual_objective"));
    if (!verify_optimal_pair(inst, flow, dual))
      out.failures.push_back("lp complementarity: stored program pair is not complementary-optimal");
    for (const char* key : {"dual_feasible", "dual_optimal", "matches_lp_objective"})
      if (!stored["steady_state"]["checks"].at(key).get<bool>())
        out.failures.push_back(std::string("steady report check failed: ") + key);
  }

  // Bound compliance.
  const json& b = stored.at("bounds");
  if (!b.at("time_within_bound").is_null() && !b["time_within_bound"].get<bool>())
    out.failures.push_back("bound compliance: steady state reached after the time bound");
  if (!b.at("queue_within_bound").is_null() && !b["queue_within_bound"].get<bool>())
    out.failures.push_back("bound compliance: queueing delay above the bound");
  if (!b.at("time_within_bound").is_null() && !b.at("observed_theta_star").is_null()) {
    if ((num_back(b["observed_theta_star"]) <= num_back(b["time_bound"])) !=
        b["time_within_bound"].get<bool>())
      out.failures.push_back("bound compliance: stored flag contradicts stored numbers");
  }

  check_decimals(stored, out.failures, "report");
  return out;
}

}  // namespace nashflow
