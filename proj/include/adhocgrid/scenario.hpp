#pragma once

#include <optional>
#include <string>

// vendored single-header json lives on the include path as json.hpp
#include <json.hpp>

#include "adhocgrid/certificates.hpp"
#include "adhocgrid/dynamics.hpp"
#include "adhocgrid/network.hpp"

namespace adhocgrid {

using json = nlohmann::json;

// On-disk description of one study: network, controller, events, run settings.
struct Scenario {
  std::string name = "scenario";
  std::string description;
  double v_ref = 48.0;
  double v_min = 45.6;
  NetworkGraph graph;
  ControllerKind controller = DroopOnly{};
  std::vector<Event> events;
  SimConfig sim;
  bool write_csv = true;
  bool write_plots = true;

  explicit Scenario(NetworkGraph g) : graph(std::move(g)) {}
};

// Parses schema version 1. Unknown keys and malformed entries are rejected
// with messages naming the offending field. Defaults: v_min = 0.95 v_ref,
// source setpoints = v_ref, controller gains as in the struct definitions.
Scenario parse_scenario(const json& j);
Scenario load_scenario_file(const std::string& path);

// Echo of the scenario with every default filled in.
json serialize_scenario(const Scenario& sc);

// Aggregate envelope of a scenario and the network snapshot it is checked at.
// p_sigma is the largest simultaneous total load over the event timeline; the
// per-load pairs use each load's own maximum. The snapshot carries the load
// powers at the time of the largest total (latest such time on ties).
struct CertificationProblem {
  DesignEnvelope envelope;
  NetworkGraph graph;
};
CertificationProblem certification_problem(const Scenario& sc);

json to_json(const ValidationReport& rep);
json to_json(const CertificateReport& rep);
json to_json(const TopologyAwareReport& rep);
json to_json(const EquilibriumSolution& sol, const NetworkGraph& g);
json to_json(const ConsistencyReport& rep);
json to_json(const SteadyStateMetrics& m);

}  // namespace adhocgrid
