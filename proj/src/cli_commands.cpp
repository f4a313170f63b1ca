#include "adhocgrid/cli_commands.hpp"

#include <filesystem>
#include <fstream>
#include <future>

#include "adhocgrid/csv.hpp"
#include "adhocgrid/random_graphs.hpp"
#include "adhocgrid/svg.hpp"

namespace adhocgrid {

namespace {

constexpr double kMetricsWindow = 0.005;  // seconds averaged at the end of a run

json metrics_or_null(const Trajectory& traj, double t_end) {
  try {
    return to_json(steady_state_metrics(traj, std::min(kMetricsWindow, t_end)));
  } catch (const std::domain_error&) {
    return nullptr;  // no delivered power in the window
  }
}

std::string write_outputs(const Scenario& sc, const ControllerKind& kind, const Trajectory& traj,
                          const std::string& out_dir, json& files) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string stem = (fs::path(out_dir) / (sc.name + "_" + controller_name(kind))).string();

  if (sc.write_csv) {
    std::ofstream csv(stem + ".csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + stem + ".csv");
    write_trajectory_csv(csv, sc.graph, traj);
    files.push_back(stem + ".csv");
  }
  if (sc.write_plots && !traj.samples.empty()) {
    std::vector<double> t;
    t.reserve(traj.samples.size());
    for (const auto& s : traj.samples) t.push_back(s.t);

    SvgChart power{sc.name + ": delivered source power", "t (s)", "P (W)", {}};
    SvgChart volt{sc.name + ": source voltages", "t (s)", "v (V)", {}};
    for (int j = 0; j < sc.graph.source_count(); ++j) {
      const int bus = sc.graph.source_buses()[j];
      SvgSeries ps{"P_" + std::to_string(bus), t, {}};
      SvgSeries vs{"v_" + std::to_string(bus), t, {}};
      for (const auto& s : traj.samples) {
        ps.y.push_back(s.source_power[j]);
        vs.y.push_back(s.state.v[bus]);
      }
      power.series.push_back(std::move(ps));
      volt.series.push_back(std::move(vs));
    }
    SvgSeries vm{"mean", t, {}};
    for (const auto& s : traj.samples) vm.y.push_back(s.v_mean);
    volt.series.push_back(std::move(vm));

    SvgChart load{sc.name + ": total delivered power", "t (s)", "P (W)", {}};
    SvgSeries tot{"sum P_k", t, {}};
    for (const auto& s : traj.samples) tot.y.push_back(s.source_power.sum());
    load.series.push_back(std::move(tot));

    write_line_chart(stem + "_power.svg", power);
    write_line_chart(stem + "_voltage.svg", volt);
    write_line_chart(stem + "_load.svg", load);
    files.push_back(stem + "_power.svg");
    files.push_back(stem + "_voltage.svg");
    files.push_back(stem + "_load.svg");
  }
  return stem;
}

json run_summary(const Trajectory& traj) {
  json j;
  j["completed"] = traj.completed;
  if (!traj.completed) j["abort_reason"] = traj.abort_reason;
  j["samples"] = traj.samples.size();
  j["steps_accepted"] = traj.stats.accepted;
  j["steps_rejected"] = traj.stats.rejected;
  j["rhs_evals"] = traj.stats.rhs_evals;
  if (!traj.samples.empty()) {
    const auto& last = traj.samples.back();
    j["t_final_s"] = last.t;
    j["v_mean_final_v"] = last.v_mean;
    j["p_mean_final_w"] = last.p_mean;
    j["lyapunov_final"] = last.lyapunov;
  }
  return j;
}

}  // namespace

std::string controller_name(const ControllerKind& kind) {
  if (std::holds_alternative<DroopOnly>(kind)) return "droop_only";
  if (std::holds_alternative<Uncoordinated>(kind)) return "uncoordinated";
  if (std::holds_alternative<StandardSecondary>(kind)) return "standard_secondary";
  return "multipurpose";
}

CommandResult run_certify(const Scenario& sc) {
  CommandResult res;
  const CertificationProblem prob = certification_problem(sc);

  CertificateReport env = certify_envelope(prob.envelope);
  if (const auto* mp = std::get_if<Multipurpose>(&sc.controller)) {
    const double lsum = mp->lambda.sum();
    if (std::abs(lsum - sc.graph.source_count()) > 1e-12)
      env.notes.push_back("sharing weights sum to " + std::to_string(lsum) +
                          ", not the source count; mean-voltage restoration will be biased");
  }

  const EquilibriumSolution sol = solve_equilibrium(prob.graph, sc.v_ref);
  res.report["envelope"] = {{"p_sigma_w", prob.envelope.p_sigma},
                            {"r_sigma_ohm", prob.envelope.r_sigma},
                            {"v_ref_v", prob.envelope.v_ref},
                            {"v_min_v", prob.envelope.v_min},
                            {"r_max_ohm", prob.envelope.r_max},
                            {"tau_max_s", prob.envelope.tau_max}};
  res.report["design_rules"] = to_json(env);
  res.report["load_flow"] = to_json(sol, prob.graph);

  bool ok = env.pass && sol.converged;
  if (sol.converged) {
    const MinVoltageReport mv = check_min_voltage(prob.graph, sol, sc.v_min);
    const TopologyAwareReport topo = check_topology_aware(prob.graph, sol.v_star);
    res.report["min_voltage"] = {{"pass", mv.pass},
                                 {"worst_bus", mv.worst_bus},
                                 {"min_voltage_v", mv.min_voltage}};
    res.report["equilibrium_checks"] = to_json(topo);
    ok = ok && mv.pass && topo.pass;
  }
  res.report["pass"] = ok;
  res.exit_code = ok ? 0 : 1;
  return res;
}

CommandResult run_loadflow(const Scenario& sc) {
  CommandResult res;
  const EquilibriumSolution sol = solve_equilibrium(sc.graph, sc.v_ref);
  res.report["load_flow"] = to_json(sol, sc.graph);
  if (sc.graph.load_count() > 0) {
    const EffectiveImpedance z = effective_impedance(sc.graph);
    res.report["effective_impedance"] = {{"z_inf_star_ohm", z.z_inf_star},
                                         {"z_row_sum_norm_ohm", z.z_row_sum_norm}};
  }
  if (sol.converged) {
    const MinVoltageReport mv = check_min_voltage(sc.graph, sol, sc.v_min);
    res.report["min_voltage"] = {{"pass", mv.pass},
                                 {"worst_bus", mv.worst_bus},
                                 {"min_voltage_v", mv.min_voltage}};
  } else {
    const CertificationProblem prob = certification_problem(sc);
    const CertificateEntry ex = check_existence(prob.envelope);
    res.report["load_flow"]["failure_reason"] =
        ex.pass ? sol.failure_reason : "no equilibrium: existence bound exceeded";
  }
  res.exit_code = sol.converged ? 0 : 1;
  return res;
}

CommandResult run_simulate(const Scenario& sc, const std::string& out_dir) {
  CommandResult res;
  const Trajectory traj = simulate(sc.graph, sc.controller, sc.events, sc.sim);
  json files = json::array();
  write_outputs(sc, sc.controller, traj, out_dir, files);
  res.report["controller"] = controller_name(sc.controller);
  res.report["run"] = run_summary(traj);
  res.report["steady_state_metrics"] = metrics_or_null(traj, sc.sim.t_end);
  res.report["files"] = files;
  res.exit_code = traj.completed ? 0 : 1;
  return res;
}

CommandResult run_compare(const Scenario& sc, const std::string& out_dir) {
  CommandResult res;
  ControllerKind standard = StandardSecondary{};
  if (const auto* ss = std::get_if<StandardSecondary>(&sc.controller)) standard = *ss;
  Multipurpose multi;
  multi.lambda = Eigen::VectorXd::Ones(sc.graph.source_count());
  if (const auto* mp = std::get_if<Multipurpose>(&sc.controller)) multi = *mp;

  auto run_one = [&](ControllerKind kind) {
    return simulate(sc.graph, kind, sc.events, sc.sim);
  };
  auto fut = std::async(std::launch::async, run_one, ControllerKind(multi));
  const Trajectory std_traj = run_one(standard);
  const Trajectory mp_traj = fut.get();

  json files = json::array();
  write_outputs(sc, standard, std_traj, out_dir, files);
  write_outputs(sc, ControllerKind(multi), mp_traj, out_dir, files);

  res.report["standard_secondary"] = {{"run", run_summary(std_traj)},
                                      {"metrics", metrics_or_null(std_traj, sc.sim.t_end)}};
  res.report["multipurpose"] = {{"run", run_summary(mp_traj)},
                                {"metrics", metrics_or_null(mp_traj, sc.sim.t_end)}};
  const json& sm = res.report["standard_secondary"]["metrics"];
  const json& mm = res.report["multipurpose"]["metrics"];
  if (!sm.is_null() && !mm.is_null()) {
    const double mp_err = mm["sharing_error"].get<double>();
    res.report["sharing_error_ratio"] =
        mp_err > 0.0 ? sm["sharing_error"].get<double>() / mp_err : 0.0;
  }
  res.report["files"] = files;
  res.exit_code = std_traj.completed && mp_traj.completed ? 0 : 1;
  return res;
}

CommandResult run_proptest(std::uint64_t seed, int count) {
  CommandResult res;
  std::mt19937_64 rng(seed);
  json failures = json::array();

  for (int trial = 0; trial < count; ++trial) {
    const CertifiedSample sample = random_certified_network(rng);
    auto blame = [&](const std::string& stage) {
      failures.push_back({{"trial", trial},
                          {"stage", stage},
                          {"buses", sample.graph.bus_count()},
                          {"lines", sample.graph.line_count()}});
    };

    if (!validate(sample.graph).ok) {
      blame("validate");
      continue;
    }
    const CertificateReport rules = certify_envelope(sample.envelope);
    if (!rules.pass) {
      blame("design_rules");
      continue;
    }
    const EffectiveImpedance z = effective_impedance(sample.graph);
    if (z.z_inf_star > sample.envelope.r_sigma * (1.0 + 1e-12)) {
      blame("impedance_bound");
      continue;
    }
    const EquilibriumSolution sol = solve_equilibrium(sample.graph, sample.v_ref);
    if (!sol.converged) {
      blame("load_flow");
      continue;
    }
    if (!check_min_voltage(sample.graph, sol, sample.v_min).pass) {
      blame("min_voltage");
      continue;
    }
    if (!check_topology_aware(sample.graph, sol.v_star).pass) blame("equilibrium_checks");
  }

  res.report["trials"] = count;
  res.report["seed"] = seed;
  res.report["failures"] = failures;
  res.report["pass"] = failures.empty();
  res.exit_code = failures.empty() ? 0 : 1;
  return res;
}

}  // namespace adhocgrid
