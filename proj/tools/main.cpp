// Command-line front end: solve an instance, generate catalog gadgets,
// re-render report tables, and verify stored reports.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nashflow/engine.hpp"
#include "nashflow/gadgets.hpp"
#include "nashflow/report.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

using namespace nashflow;

int run_solve(const std::string& input, std::string output, long max_phases,
              const std::string& horizon, const std::string& format, const std::string& ntfr) {
  Instance inst;
  Limits limits;
  limits.max_phases = max_phases;
  try {
    inst = parse_instance(read_file(input));
    Validation v = validate(inst);
    for (const auto& w : v.warnings) std::cerr << "warning: " << w << "\n";
    if (!v.ok()) {
      for (const auto& e : v.errors) std::cerr << "error: " << e << "\n";
      return 1;
    }
    if (!horizon.empty()) limits.horizon = Rat::parse(horizon);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  EngineOptions opts;
  if (ntfr == "enum") opts.ntfr.method = NtfrOptions::Method::Enumerate;

  Trajectory traj = solve_equilibrium(inst, limits, opts);
  RunReport rep = build_report(traj, limits);
  if (output.empty()) output = input + ".report.json";
  write_file(output, report_to_json(rep));
  if (format == "csv") {
    write_file(output + ".phases.csv", phase_table_csv(rep));
    write_file(output + ".potential.csv", potential_csv(rep));
    write_file(output + ".schedule.csv", schedule_csv(rep));
  }

  std::cout << "phases: " << traj.phases.size() << "\n";
  switch (traj.status) {
    case TrajectoryStatus::SteadyState:
      std::cout << "status: steady state from theta = " << traj.steady_theta->str() << "\n";
      std::cout << "report: " << output << "\n";
      return 0;
    case TrajectoryStatus::UnboundedGrowth:
      std::cout << "status: unbounded growth (inflow exceeds the minimum queuing capacity)\n";
      std::cout << "report: " << output << "\n";
      return 2;
    case TrajectoryStatus::HorizonReached:
      std::cout << "status: horizon reached at theta = " << traj.simulated_until().str() << "\n";
      std::cout << "report: " << output << "\n";
      return 3;
    case TrajectoryStatus::PhaseCapReached:
      std::cout << "status: phase cap reached\n";
      for (const auto& d : traj.diagnostics) std::cout << "  " << d << "\n";
      std::cout << "report: " << output << "\n";
      return 3;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact dynamic-equilibrium engine for fluid queuing networks"};
  app.require_subcommand(1);

  // solve
  std::string in_path, out_path, horizon, format = "json", ntfr = "auto";
  long max_phases = 1000000;
  auto* solve = app.add_subcommand("solve", "compute the equilibrium trajectory of an instance");
  solve->add_option("instance", in_path, "instance JSON file")->required();
  solve->add_option("-o,--output", out_path, "report output path (default: <instance>.report.json)");
  solve->add_option("--max-phases", max_phases, "phase cap (default 1000000)");
  solve->add_option("--horizon", horizon, "time horizon as an exact rational (default: convergence bound)");
  solve->add_option("--format", format, "json | csv (csv additionally writes plot tables)")
      ->check(CLI::IsMember({"json", "csv"}));
  solve->add_option("--ntfr", ntfr, "thin-flow solver: auto | enum")->check(CLI::IsMember({"auto", "enum"}));

  // gen
  std::string gen_out;
  std::string u = "1", tau = "2", rho = "1", eps = "0", cpow;
  int k = 1, d = 1, L = 3;
  std::string comp_a, comp_b;
  auto* gen = app.add_subcommand("gen", "generate a catalog instance");
  gen->fallthrough(true);
  auto* g_e1 = gen->add_subcommand("example1", "three-node network with an outflow overshoot");
  g_e1->fallthrough(true);
  g_e1->add_option("--u", u, "inflow");
  g_e1->add_option("--tau", tau, "delay parameter");
  auto* g_e3 = gen->add_subcommand("example3", "example1 extended by a two-arc fork");
  g_e3->fallthrough(true);
  g_e3->add_option("--eps", eps, "capacity increase of arc b");
  auto* g_fc = gen->add_subcommand("figure-chain", "pulse of height 13u/12");
  g_fc->fallthrough(true);
  g_fc->add_option("--u", u, "inflow");
  g_fc->add_option("--rho", rho, "pulse length");
  auto* g_pu = gen->add_subcommand("pulse", "recursive pulse amplifier");
  g_pu->fallthrough(true);
  g_pu->add_option("--u", u, "inflow");
  g_pu->add_option("--k", k, "recursion depth")->required();
  g_pu->add_option("--rho", rho, "pulse length");
  auto* g_da = gen->add_subcommand("damper", "two full-rate windows around a drained period");
  g_da->fallthrough(true);
  g_da->add_option("--k", k, "amplification depth")->required();
  g_da->add_option("--rho", rho, "window length");
  auto* g_ex = gen->add_subcommand("exponential", "at least 2^d phases");
  g_ex->fallthrough(true);
  g_ex->add_option("--d", d, "recursion depth")->required();
  g_ex->add_option("--C", cpow, "scale constant (integer, default: calibrated minimum)");
  auto* g_tl = gen->add_subcommand("two-link", "first phase lasts 2^L - 1");
  g_tl->fallthrough(true);
  g_tl->add_option("--L", L, "capacity-gap exponent")->required();
  auto* g_co = gen->add_subcommand("compose", "series composition of two instance files");
  g_co->fallthrough(true);
  g_co->add_option("first", comp_a)->required();
  g_co->add_option("second", comp_b)->required();
  gen->add_option("-o,--output", gen_out, "output instance path")->required();

  // verify
  std::string rep_path;
  auto* verify = app.add_subcommand("verify", "re-run the invariant suites on a stored report");
  verify->add_option("report", rep_path, "report JSON file")->required();

  // report
  std::string rr_path, rr_out, rr_format = "csv";
  auto* rr = app.add_subcommand("report", "re-render tables from a stored report");
  rr->add_option("report", rr_path, "report JSON file")->required();
  rr->add_option("-o,--output", rr_out, "output prefix (default: report path)");
  rr->add_option("--format", rr_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(in_path, out_path, max_phases, horizon, format, ntfr);

    if (gen->parsed()) {
      Instance inst;
      if (g_e1->parsed()) inst = example_one(Rat::parse(u), Rat::parse(tau));
      else if (g_e3->parsed())
        inst = eps == "0" ? example_three() : example_three_variant(Rat::parse(eps));
      else if (g_fc->parsed()) inst = figure_chain(Rat::parse(u), Rat::parse(rho));
      else if (g_pu->parsed()) inst = pulse(Rat::parse(u), k, Rat::parse(rho));
      else if (g_da->parsed()) inst = damper(k, Rat::parse(rho));
      else if (g_ex->parsed()) inst = exponential_gadget(d, cpow.empty() ? mpz_class(0) : mpz_class(cpow));
      else if (g_tl->parsed()) inst = two_link(L);
      else if (g_co->parsed())
        inst = series_compose(parse_instance(read_file(comp_a)), parse_instance(read_file(comp_b)));
      else {
        std::cerr << "error: choose a gadget family\n";
        return 1;
      }
      require_valid(inst);
      write_file(gen_out, emit_instance(inst));
      std::cout << "wrote " << gen_out << " (" << inst.arcs.size() << " arcs)\n";
      return 0;
    }

    if (verify->parsed()) {
      VerifyOutcome out = verify_report_json(read_file(rep_path));
      for (const auto& n : out.notes) std::cout << "ok: " << n << "\n";
      for (const auto& f : out.failures) std::cout << "FAIL: " << f << "\n";
      std::cout << (out.ok() ? "verify: all checks passed\n" : "verify: checks failed\n");
      return out.ok() ? 0 : 4;
    }

    if (rr->parsed()) {
      std::string text = read_file(rr_path);
      // Rebuild the report from the embedded instance so the tables always
      // reflect a verified, deterministic run.
      VerifyOutcome chk = verify_report_json(text);
      if (!chk.ok()) {
        for (const auto& f : chk.failures) std::cerr << "FAIL: " << f << "\n";
        return 4;
      }
      Instance inst = parse_instance(nlohmann::ordered_json::parse(text).at("instance").dump());
      Limits limits;
      auto j = nlohmann::ordered_json::parse(text);
      limits.max_phases = j.at("limits").at("max_phases").get<long>();
      if (!j.at("limits").at("horizon").is_null())
        limits.horizon = Rat::parse(j["limits"]["horizon"].at("r").get<std::string>());
      RunReport rep = build_report(solve_equilibrium(inst, limits), limits);
      std::string prefix = rr_out.empty() ? rr_path : rr_out;
      if (rr_format == "json") {
        write_file(prefix + ".rendered.json", report_to_json(rep));
        std::cout << "wrote " << prefix << ".rendered.json\n";
      } else {
        write_file(prefix + ".phases.csv", phase_table_csv(rep));
        write_file(prefix + ".potential.csv", potential_csv(rep));
        write_file(prefix + ".schedule.csv", schedule_csv(rep));
        std::cout << "wrote " << prefix << ".{phases,potential,schedule}.csv\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
