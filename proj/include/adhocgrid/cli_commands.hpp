#pragma once

#include <cstdint>
#include <string>

#include "adhocgrid/scenario.hpp"

namespace adhocgrid {

struct CommandResult {
  int exit_code = 0;  // 0 full success, 1 a check or run failed
  json report;
};

std::string controller_name(const ControllerKind& kind);

// Aggregate design rules on the scenario envelope plus the equilibrium-based
// checks at the heaviest load snapshot.
CommandResult run_certify(const Scenario& sc);

// Pinned-source equilibrium of the scenario network as given, with effective
// impedance and the minimum-voltage check.
CommandResult run_loadflow(const Scenario& sc);

// One transient run; writes CSV and SVG plots into out_dir per the scenario's
// output block.
CommandResult run_simulate(const Scenario& sc, const std::string& out_dir);

// Runs the shared-PI and power-sharing strategies on the same scenario
// (concurrently) and reports their steady-state metrics side by side.
CommandResult run_compare(const Scenario& sc, const std::string& out_dir);

// Draws `count` certified random networks and checks the implication chain:
// design rules pass -> equilibrium exists above v_min and both
// equilibrium-dependent conditions hold.
CommandResult run_proptest(std::uint64_t seed, int count);

}  // namespace adhocgrid
