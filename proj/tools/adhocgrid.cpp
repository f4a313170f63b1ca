#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "adhocgrid/cli_commands.hpp"

namespace {

using adhocgrid::Scenario;

std::string resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("ADHOCGRID_OUT_DIR"); env && *env) return env;
  return ".";
}

// --controller keeps the scenario's gains when the kinds already match,
// otherwise switches to the named strategy with its default gains.
void override_controller(Scenario& sc, const std::string& name) {
  using namespace adhocgrid;
  if (name.empty() || name == controller_name(sc.controller)) return;
  if (name == "droop_only") {
    sc.controller = DroopOnly{};
  } else if (name == "uncoordinated") {
    sc.controller = Uncoordinated{};
  } else if (name == "standard_secondary") {
    sc.controller = StandardSecondary{};
  } else if (name == "multipurpose") {
    Multipurpose mp;
    mp.lambda = Eigen::VectorXd::Ones(sc.graph.source_count());
    sc.controller = mp;
  } else {
    throw std::invalid_argument("unknown controller: " + name);
  }
}

int emit(const adhocgrid::CommandResult& res) {
  std::cout << res.report.dump(2) << "\n";
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DC microgrid design certification and transient simulation"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_flag;
  std::string controller;
  bool no_plots = false;
  std::uint64_t seed = 20250817;
  int count = 1000;

  auto add_scenario_opts = [&](CLI::App* cmd, bool with_outputs) {
    cmd->add_option("-s,--scenario", scenario_path, "scenario JSON file")->required();
    cmd->add_option("-c,--controller", controller,
                    "override strategy: droop_only|uncoordinated|standard_secondary|multipurpose");
    if (with_outputs) {
      cmd->add_option("-o,--out", out_flag, "output directory (default $ADHOCGRID_OUT_DIR or .)");
      cmd->add_flag("--no-plots", no_plots, "skip SVG plot output");
    }
  };

  CLI::App* certify = app.add_subcommand("certify", "check the design rules of a scenario");
  CLI::App* loadflow = app.add_subcommand("loadflow", "solve the pinned-source equilibrium");
  CLI::App* simulate = app.add_subcommand("simulate", "run one transient and write CSV/plots");
  CLI::App* compare =
      app.add_subcommand("compare", "run both secondary strategies and compare metrics");
  CLI::App* proptest =
      app.add_subcommand("proptest", "randomized check: design rules imply a good equilibrium");
  add_scenario_opts(certify, false);
  add_scenario_opts(loadflow, false);
  add_scenario_opts(simulate, true);
  add_scenario_opts(compare, true);
  proptest->add_option("--seed", seed, "random generator seed");
  proptest->add_option("--count", count, "number of random networks")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (proptest->parsed()) return emit(adhocgrid::run_proptest(seed, count));

    Scenario sc = adhocgrid::load_scenario_file(scenario_path);
    override_controller(sc, controller);
    if (no_plots) sc.write_plots = false;

    if (certify->parsed()) return emit(adhocgrid::run_certify(sc));
    if (loadflow->parsed()) return emit(adhocgrid::run_loadflow(sc));
    const std::string out_dir = resolve_out_dir(out_flag);
    if (simulate->parsed()) return emit(adhocgrid::run_simulate(sc, out_dir));
    return emit(adhocgrid::run_compare(sc, out_dir));
  } catch (const std::exception& ex) {
    std::cerr << adhocgrid::json{{"error", ex.what()}}.dump(2) << "\n";
    return 2;
  }
}
