#include "nashflow/gadgets.hpp"

#include <stdexcept>

#include "nashflow/engine.hpp"
#include "nashflow/evaluate.hpp"
#include "nashflow/potential.hpp"
#include "json.hpp"

namespace nashflow {

using json = nlohmann::ordered_json;

Rat rat_pow(const Rat& base, int exp) {
  if (exp < 0) return Rat(1) / rat_pow(base, -exp);
  Rat r(1);
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

namespace {

const Rat kLambda(13, 12);

Arc arc(std::string id, const Instance& inst, const std::string& tail, const std::string& head,
        Rat cap, Rat delay) {
  Arc a;
  a.id = std::move(id);
  a.tail = inst.node_index(tail);
  a.head = inst.node_index(head);
  a.capacity = std::move(cap);
  a.delay = std::move(delay);
  return a;
}

Instance single_arc(const std::string& id, Rat cap, Rat delay, Rat inflow) {
  Instance inst;
  inst.nodes = {"s", "t"};
  inst.source = 0;
  inst.sink = 1;
  inst.inflow = std::move(inflow);
  Arc a;
  a.id = id;
  a.tail = 0;
  a.head = 1;
  a.capacity = std::move(cap);
  a.delay = std::move(delay);
  inst.arcs.push_back(std::move(a));
  return inst;
}

}  // namespace

Instance example_one(const Rat& u, const Rat& tau) {
  if (u.sign() <= 0 || tau.sign() <= 0) throw std::invalid_argument("example_one: u, tau must be positive");
  Instance inst;
  inst.nodes = {"s", "v", "t"};
  inst.source = 0;
  inst.sink = 2;
  inst.inflow = u;
  inst.arcs.push_back(arc("e", inst, "s", "t", u / Rat(3), tau));
  inst.arcs.push_back(arc("f", inst, "s", "v", Rat(3, 4) * u, Rat(0)));
  inst.arcs.push_back(arc("g", inst, "v", "t", u / Rat(3), Rat(0)));
  inst.arcs.push_back(arc("h", inst, "v", "t", u, tau));
  require_valid(inst);
  return inst;
}

Instance example_three_variant(const Rat& eps) {
  Instance inst;
  inst.nodes = {"s", "v", "t", "th"};
  inst.source = 0;
  inst.sink = 3;
  inst.inflow = Rat(1);
  inst.arcs.push_back(arc("e", inst, "s", "t", Rat(1, 3), Rat(2)));
  inst.arcs.push_back(arc("f", inst, "s", "v", Rat(3, 4), Rat(0)));
  inst.arcs.push_back(arc("g", inst, "v", "t", Rat(1, 3), Rat(0)));
  inst.arcs.push_back(arc("h", inst, "v", "t", Rat(1), Rat(2)));
  inst.arcs.push_back(arc("a", inst, "t", "th", Rat(2, 3), Rat(0)));
  inst.arcs.push_back(arc("b", inst, "t", "th", Rat(1, 3) + eps, Rat(1)));
  require_valid(inst);
  return inst;
}

Instance example_three() { return example_three_variant(Rat(0)); }

Instance figure_chain(const Rat& u, const Rat& rho) {
  if (u.sign() <= 0 || rho.sign() <= 0) throw std::invalid_argument("figure_chain: u, rho must be positive");
  Rat tau = Rat(5, 6) * rho;
  Instance inst;
  inst.nodes = {"s", "v", "t", "tp"};
  inst.source = 0;
  inst.sink = 3;
  inst.inflow = u;
  inst.arcs.push_back(arc("e", inst, "s", "t", u / Rat(3), tau));
  inst.arcs.push_back(arc("f", inst, "s", "v", Rat(3, 4) * u, Rat(0)));
  inst.arcs.push_back(arc("g", inst, "v", "t", u / Rat(3), Rat(0)));
  inst.arcs.push_back(arc("h", inst, "v", "t", u, tau));
  inst.arcs.push_back(arc("ep", inst, "t", "tp", u, rho / Rat(4)));
  inst.arcs.push_back(arc("fp", inst, "t", "tp", u / Rat(3), Rat(0)));
  require_valid(inst);
  return inst;
}

Instance series_compose(const Instance& g, const Instance& h) {
  Instance out;
  for (const auto& n : g.nodes) out.nodes.push_back("1:" + n);
  for (std::size_t v = 0; v < h.nodes.size(); ++v)
    if (static_cast<int>(v) != h.source) out.nodes.push_back("2:" + h.nodes[v]);
  out.inflow = g.inflow;
  out.source = out.node_index("1:" + g.node_id(g.source));
  out.sink = out.node_index("2:" + h.node_id(h.sink));
  int junction = out.node_index("1:" + g.node_id(g.sink));

  auto map_h = [&](int v) {
    if (v == h.source) return junction;
    return out.node_index("2:" + h.node_id(v));
  };
  for (const Arc& a : g.arcs) {
    Arc na = a;
    na.id = "1:" + a.id;
    na.tail = out.node_index("1:" + g.node_id(a.tail));
    na.head = out.node_index("1:" + g.node_id(a.head));
    out.arcs.push_back(std::move(na));
  }
  for (const Arc& a : h.arcs) {
    Arc na = a;
    na.id = "2:" + a.id;
    na.tail = map_h(a.tail);
    na.head = map_h(a.head);
    out.arcs.push_back(std::move(na));
  }
  if (!g.metadata_json.empty() || !h.metadata_json.empty()) {
    json m;
    m["first"] = g.metadata_json.empty() ? json() : json::parse(g.metadata_json);
    m["second"] = h.metadata_json.empty() ? json() : json::parse(h.metadata_json);
    out.metadata_json = m.dump();
  }
  return out;
}

Rat pulse_alpha(int k) { return Rat(21, 8) * (rat_pow(Rat(5, 3), k) - Rat(1)); }

Instance pulse(const Rat& u, int k, const Rat& rho) {
  if (k < 1) throw std::invalid_argument("pulse: k must be at least 1");
  if (k == 1) return figure_chain(u, rho);
  return series_compose(pulse(u, k - 1, Rat(5, 3) * rho), pulse(rat_pow(kLambda, k - 1) * u, 1, rho));
}

Instance damper(int k, const Rat& rho) {
  if (k < 1) throw std::invalid_argument("damper: k must be at least 1");
  if (rho.sign() <= 0) throw std::invalid_argument("damper: rho must be positive");
  Rat drain = rat_pow(kLambda, -k);  // (12/13)^k

  Instance chain = series_compose(
      series_compose(single_arc("e", drain, Rat(0), Rat(1)), pulse(drain, k, rho)),
      single_arc("g", Rat(1), Rat(0), Rat(1)));

  // Calibrate the bypass delay from the bypass-free sub-network: its final
  // regime has every label moving at 13/12^... the inverse of the drain rate,
  // and the sink outflow equal to `drain` from the final phase on.
  Trajectory sub = solve_equilibrium(chain);
  if (sub.status != TrajectoryStatus::UnboundedGrowth)
    throw std::logic_error("damper calibration: bypass-free network should grow unboundedly");
  const Phase& fin = sub.phases.back();
  Rat theta_f = fin.theta_start;
  Rat lt_rate = fin.derivs.label_deriv[static_cast<std::size_t>(chain.sink)];
  if (lt_rate <= Rat(1)) throw std::logic_error("damper calibration: final label speed not above one");
  // Source time whose arrival at the sink is rho past the start of the
  // constant-outflow regime.
  Rat theta_target = theta_f + rho / lt_rate;
  Rat max_delay(0);
  for (const Phase& ph : sub.phases) {
    Rat d = ph.start.label(chain.sink) - ph.theta_start;
    max_delay = max(max_delay, d);
  }
  {
    Snapshot at = sub.snapshot_at(theta_target);
    max_delay = max(max_delay, at.label(chain.sink) - theta_target);
  }
  Rat tau_f = max_delay + rho;

  Instance out = chain;
  Arc f;
  f.id = "f";
  f.tail = out.source;
  f.head = out.sink;
  f.capacity = Rat(1);
  f.delay = tau_f;
  out.arcs.push_back(std::move(f));
  require_valid(out);

  // Measured window boundaries, recorded for reference.
  Trajectory full = solve_equilibrium(out);
  if (full.status != TrajectoryStatus::SteadyState)
    throw std::logic_error("damper calibration: full gadget should reach a steady state");
  auto sched = sink_inflow_schedule(full);
  json meta;
  meta["gadget"] = "damper";
  meta["k"] = k;
  meta["rho"] = rho.str();
  meta["tau_f"] = tau_f.str();
  meta["drain_rate"] = drain.str();
  std::optional<Rat> theta1, theta2;
  for (const auto& p : sched) {
    if (p.rate == Rat(1) && !theta1) theta1 = p.start;
    if (p.rate == Rat(1) && !p.end) theta2 = p.start;
  }
  if (theta1) meta["theta1"] = theta1->str();
  if (theta2) meta["theta2"] = theta2->str();
  out.metadata_json = meta.dump();
  return out;
}

namespace {

Instance exponential_base() {
  Instance inst;
  inst.nodes = {"s", "t"};
  inst.source = 0;
  inst.sink = 1;
  inst.inflow = Rat(1);
  Arc a;
  a.id = "short";
  a.tail = 0;
  a.head = 1;
  a.capacity = Rat(1, 3);
  a.delay = Rat(0);
  inst.arcs.push_back(a);
  Arc b;
  b.id = "long";
  b.tail = 0;
  b.head = 1;
  b.capacity = Rat(2, 3);
  b.delay = Rat(1);
  inst.arcs.push_back(b);
  require_valid(inst);
  return inst;
}

Instance exponential_build(int d, const mpz_class& C) {
  if (d == 1) return exponential_base();
  mpz_class rho_z;
  mpz_pow_ui(rho_z.get_mpz_t(), C.get_mpz_t(), static_cast<unsigned long>((d - 1) * (d - 1)));
  Instance out = series_compose(damper(15 * d, Rat(rho_z)), exponential_build(d - 1, C));
  json meta;
  meta["gadget"] = "exponential";
  meta["d"] = d;
  meta["C"] = C.get_str();
  if (!out.metadata_json.empty()) meta["parts"] = json::parse(out.metadata_json);
  out.metadata_json = meta.dump();
  return out;
}

// Bound on the time for the tail gadget to settle once its inflow drops below
// every capacity, starting from queues built under inflow at most one:
// 2 K^2 M^2 T* with T* = sum tau + per-arc transient queueing delay bound.
Rat settle_bound(const Instance& inner) {
  PseudoBounds b = pseudo_bounds(inner);
  Rat k{mpz_class(b.K)};
  Rat tau_sum(0);
  for (const auto& a : inner.arcs) tau_sum += a.delay;
  Rat queue_delay_bound = Rat(2) * k * k * k * b.M * b.M * b.T;  // inflow is at most 1
  Rat t_star = tau_sum + Rat(static_cast<long>(inner.arcs.size())) * queue_delay_bound;
  return Rat(2) * k * k * b.M * b.M * t_star;
}

}  // namespace

namespace {

// Smallest power of two whose p-th power reaches `need`.
mpz_class pow2_reaching(const Rat& need, unsigned long p) {
  mpz_class t;
  mpz_cdiv_q(t.get_mpz_t(), need.num().get_mpz_t(), need.den().get_mpz_t());
  if (t < 1) t = 1;
  unsigned long e = mpz_sizeinbase(t.get_mpz_t(), 2);
  mpz_class probe;
  mpz_ui_pow_ui(probe.get_mpz_t(), 2, e - 1);
  if (Rat(probe) >= need) e -= 1;
  unsigned long b = (e + p - 1) / p;
  if (b == 0) b = 1;
  mpz_class c;
  mpz_ui_pow_ui(c.get_mpz_t(), 2, b);
  return c;
}

}  // namespace

mpz_class exponential_min_c(int d) {
  if (d <= 1) return 2;
  mpz_class C = 2;
  for (int j = 2; j <= d; ++j) {
    // The damped window C^{(j-1)^2} must dominate the settle bound of the
    // inner gadget, whose delays themselves scale with C; iterate until the
    // window wins. The window grows strictly faster, so this terminates.
    unsigned long p = static_cast<unsigned long>((j - 1) * (j - 1));
    while (true) {
      Instance inner = exponential_build(j - 1, C);
      Rat need = settle_bound(inner);
      mpz_class rho_z;
      mpz_pow_ui(rho_z.get_mpz_t(), C.get_mpz_t(), p);
      if (Rat(rho_z) >= need) break;
      mpz_class next = pow2_reaching(need, p);
      C = next > C * 2 ? next : C * 2;
    }
  }
  return C;
}

Instance exponential_gadget(int d, const mpz_class& C) {
  if (d < 1) throw std::invalid_argument("exponential: d must be at least 1");
  if (d == 1) return exponential_base();
  mpz_class cmin = exponential_min_c(d);
  mpz_class use = C;
  if (use == 0) use = cmin;
  if (use < cmin)
    throw std::invalid_argument("exponential: C below the calibrated minimum " + cmin.get_str());
  return exponential_build(d, use);
}

Instance two_link(int L) {
  if (L < 1) throw std::invalid_argument("two_link: L must be at least 1");
  Instance inst;
  inst.nodes = {"s", "t"};
  inst.source = 0;
  inst.sink = 1;
  inst.inflow = Rat(1);
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(L));
  Arc a;
  a.id = "short";
  a.tail = 0;
  a.head = 1;
  a.capacity = Rat(1) - Rat(1) / Rat(p);
  a.delay = Rat(0);
  inst.arcs.push_back(a);
  Arc b;
  b.id = "long";
  b.tail = 0;
  b.head = 1;
  b.capacity = Rat(1);
  b.delay = Rat(1);
  inst.arcs.push_back(b);
  require_valid(inst);
  return inst;
}

}  // namespace nashflow
