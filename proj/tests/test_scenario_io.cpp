#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "adhocgrid/csv.hpp"
#include "adhocgrid/scenario.hpp"
#include "adhocgrid/svg.hpp"

using namespace adhocgrid;

namespace {

json minimal() {
  return json::parse(R"({
    "schema": 1,
    "network": {
      "buses": [
        {"kind": "source", "droop_resistance": 0.5},
        {"kind": "load", "power": 35.11, "capacitance": 845.7e-6}
      ],
      "lines": [{"from": 0, "to": 1, "resistance": 0.111, "inductance": 6.155e-6}]
    }
  })");
}

}  // namespace

TEST_CASE("minimal scenario fills every default") {
  const Scenario sc = parse_scenario(minimal());
  CHECK(sc.name == "scenario");
  CHECK(sc.v_ref == 48.0);
  CHECK(sc.v_min == doctest::Approx(0.95 * 48.0).epsilon(1e-12));
  CHECK(sc.graph.bus_count() == 2);
  CHECK(sc.graph.source_at(0).initial_setpoint == 48.0);  // setpoint defaults to v_ref
  CHECK(std::holds_alternative<DroopOnly>(sc.controller));
  CHECK(sc.events.empty());
  CHECK(sc.sim.t_end == 0.05);
  CHECK(sc.sim.v_ref == 48.0);
  CHECK(sc.write_csv);
  CHECK(sc.write_plots);
}

TEST_CASE("full scenario round-trips through serialization") {
  json j = minimal();
  j["name"] = "demo";
  j["description"] = "round trip";
  j["v_ref"] = 50.0;
  j["v_min"] = 46.0;
  j["controller"] = {{"kind", "multipurpose"},
                     {"k_v", 30.0},
                     {"k_lambda", 0.5},
                     {"lambda", {1.0}}};
  j["events"] = {{{"time", 0.01}, {"bus", 1}, {"power", 50.0}}};
  j["sim"] = {{"t_end", 0.02}, {"max_step", 2e-6}, {"sample_interval", 2e-5}};
  j["output"] = {{"csv", true}, {"plots", false}};

  const Scenario sc = parse_scenario(j);
  const Scenario again = parse_scenario(serialize_scenario(sc));
  CHECK(again.name == "demo");
  CHECK(again.v_ref == 50.0);
  CHECK(again.v_min == 46.0);
  CHECK(again.graph.source_at(0).initial_setpoint == 50.0);
  REQUIRE(std::holds_alternative<Multipurpose>(again.controller));
  const auto& mp = std::get<Multipurpose>(again.controller);
  CHECK(mp.k_v == 30.0);
  CHECK(mp.k_lambda == 0.5);
  CHECK(mp.lambda.size() == 1);
  REQUIRE(again.events.size() == 1);
  CHECK(again.events[0].power == 50.0);
  CHECK(again.sim.t_end == 0.02);
  CHECK(again.sim.max_step == 2e-6);
  CHECK(!again.write_plots);
}

TEST_CASE("unknown keys are rejected wherever they appear") {
  auto expect_reject = [](json j, const std::string& needle) {
    try {
      parse_scenario(j);
      FAIL_CHECK("expected rejection mentioning " << needle);
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  json j = minimal();
  j["typo"] = 1;
  expect_reject(j, "typo");

  j = minimal();
  j["network"]["extra"] = 1;
  expect_reject(j, "extra");

  j = minimal();
  j["network"]["buses"][0]["resistance"] = 0.5;  // wrong field name for a source
  expect_reject(j, "resistance");

  j = minimal();
  j["network"]["lines"][0]["length"] = 3;
  expect_reject(j, "length");

  j = minimal();
  j["controller"] = {{"kind", "uncoordinated"}, {"gain", 2.0}};
  expect_reject(j, "gain");

  j = minimal();
  j["sim"] = {{"dt", 1e-6}};
  expect_reject(j, "dt");

  j = minimal();
  j["events"] = {{{"time", 0.01}, {"bus", 1}, {"power", 1.0}, {"ramp", true}}};
  expect_reject(j, "ramp");

  j = minimal();
  j["output"] = {{"csv", true}, {"pdf", true}};
  expect_reject(j, "pdf");
}

TEST_CASE("schema and structural errors are rejected with context") {
  json j = minimal();
  j["schema"] = 2;
  CHECK_THROWS_WITH_AS(parse_scenario(j), doctest::Contains("schema"), std::runtime_error);

  j = minimal();
  j.erase("network");
  CHECK_THROWS_AS(parse_scenario(j), std::runtime_error);

  j = minimal();
  j["v_min"] = 49.0;  // must stay below v_ref
  CHECK_THROWS_AS(parse_scenario(j), std::runtime_error);

  j = minimal();
  j["network"]["buses"][0]["kind"] = "battery";
  CHECK_THROWS_AS(parse_scenario(j), std::runtime_error);

  // a structurally invalid network is caught by validation
  j = minimal();
  j["network"]["lines"] = json::array();
  CHECK_THROWS_WITH_AS(parse_scenario(j), doctest::Contains("invalid network"),
                       std::runtime_error);
}

TEST_CASE("event constraints are enforced during parsing") {
  json j = minimal();
  j["events"] = {{{"time", 0.01}, {"bus", 0}, {"power", 5.0}}};  // source bus
  CHECK_THROWS_AS(parse_scenario(j), std::runtime_error);

  j = minimal();
  j["events"] = {{{"time", 9.0}, {"bus", 1}, {"power", 5.0}}};  // beyond t_end
  CHECK_THROWS_AS(parse_scenario(j), std::runtime_error);

  j = minimal();
  j["events"] = {{{"time", 0.01}, {"bus", 1}, {"power", -5.0}}};
  CHECK_THROWS_AS(parse_scenario(j), std::runtime_error);
}

TEST_CASE("controller gain validation") {
  json j = minimal();
  j["controller"] = {{"kind", "uncoordinated"}, {"c_u", 0.0}};
  CHECK_THROWS_AS(parse_scenario(j), std::runtime_error);

  j = minimal();
  j["controller"] = {{"kind", "multipurpose"}, {"lambda", {1.0, 2.0}}};  // one source only
  CHECK_THROWS_AS(parse_scenario(j), std::runtime_error);

  j = minimal();
  j["controller"] = {{"kind", "multipurpose"}, {"lambda", {-1.0}}};
  CHECK_THROWS_AS(parse_scenario(j), std::runtime_error);

  j = minimal();
  j["controller"] = {{"kind", "pid"}};
  CHECK_THROWS_AS(parse_scenario(j), std::runtime_error);
}

TEST_CASE("certification problem takes the worst simultaneous loading") {
  json j = minimal();
  j["network"]["buses"].push_back(
      {{"kind", "load"}, {"power", 20.0}, {"capacitance", 845.7e-6}});
  j["network"]["lines"].push_back(
      {{"from", 1}, {"to", 2}, {"resistance", 0.111}, {"inductance", 6.155e-6}});
  j["network"]["buses"][1]["power"] = 10.0;
  j["events"] = {{{"time", 0.01}, {"bus", 1}, {"power", 0.0}},
                 {{"time", 0.02}, {"bus", 2}, {"power", 30.0}}};

  const Scenario sc = parse_scenario(j);
  const CertificationProblem prob = certification_problem(sc);
  // totals over time: 30 (start) -> 20 -> 30; ties resolve to the latest mix
  CHECK(prob.envelope.p_sigma == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(prob.graph.load_powers()[0] == 0.0);
  CHECK(prob.graph.load_powers()[1] == 30.0);
  // the capacitance rule sees each load's own maximum
  REQUIRE(prob.envelope.loads.size() == 2);
  CHECK(prob.envelope.loads[0].first == 10.0);
  CHECK(prob.envelope.loads[1].first == 30.0);
  CHECK(prob.envelope.r_sigma == doctest::Approx(0.222).epsilon(1e-12));
  CHECK(prob.envelope.r_max == 0.5);
  CHECK(prob.envelope.tau_max == doctest::Approx(6.155e-6 / 0.111).epsilon(1e-12));
}

TEST_CASE("shipped scenarios parse and carry their advertised shapes") {
  const Scenario two = load_scenario_file(std::string(SCENARIO_DIR) + "/two_bus.json");
  CHECK(two.name == "two_bus");
  CHECK(two.graph.bus_count() == 2);
  CHECK(std::holds_alternative<StandardSecondary>(two.controller));
  CHECK(two.events.size() == 1);

  const Scenario ring = load_scenario_file(std::string(SCENARIO_DIR) + "/ring10.json");
  CHECK(ring.name == "ring10");
  CHECK(ring.graph.bus_count() == 10);
  CHECK(ring.graph.source_count() == 3);
  CHECK(ring.graph.line_count() == 10);
  REQUIRE(std::holds_alternative<Multipurpose>(ring.controller));
  CHECK(std::get<Multipurpose>(ring.controller).lambda.size() == 3);
  CHECK(ring.events.size() == 5);

  const Scenario sym = load_scenario_file(std::string(SCENARIO_DIR) + "/symmetric_ring6.json");
  CHECK(sym.graph.source_count() == 3);
  CHECK(sym.graph.load_count() == 3);
}

TEST_CASE("trajectory csv carries header, units and abort notes") {
  const NetworkGraph g({SourceParams{0.5, 48.0}, LoadParams{35.11, 845.7e-6}},
                       {LineParams{0, 1, 0.111, 6.155e-6}});
  Trajectory traj;
  traj.v_ref = 48.0;
  traj.lambda = Eigen::VectorXd::Ones(1);
  TrajectorySample s;
  s.t = 0.0;
  s.state.i = Eigen::VectorXd::Constant(1, 1.25);
  s.state.v.resize(2);
  s.state.v << 48.0, 47.5;
  s.state.u = Eigen::VectorXd::Constant(1, 48.0);
  s.source_power = Eigen::VectorXd::Constant(1, 60.0);
  s.v_mean = 48.0;
  s.p_mean = 60.0;
  s.lyapunov = 0.5;
  s.bm_potential = 1.5;
  traj.samples.push_back(s);
  traj.completed = false;
  traj.abort_reason = "test abort";

  std::ostringstream out;
  write_trajectory_csv(out, g, traj);
  const std::string text = out.str();
  CHECK(text.find("t (s)") != std::string::npos);
  CHECK(text.find("v_1 (V)") != std::string::npos);
  CHECK(text.find("u_0 (V)") != std::string::npos);
  CHECK(text.find("P_0 (W)") != std::string::npos);
  CHECK(text.find("47.5") != std::string::npos);
  CHECK(text.find("# aborted: test abort") != std::string::npos);
}

TEST_CASE("svg chart renders axes, legend and one polyline per series") {
  SvgChart chart;
  chart.title = "demo";
  chart.x_label = "t (s)";
  chart.y_label = "v (V)";
  chart.series.push_back({"a", {0.0, 1.0, 2.0}, {1.0, 3.0, 2.0}});
  chart.series.push_back({"b", {0.0, 1.0, 2.0}, {2.0, 1.0, 4.0}});
  const std::string svg = render_line_chart(chart);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("demo") != std::string::npos);
  CHECK(svg.rfind("</svg>") != std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1))
    ++polylines;
  CHECK(polylines >= 2);
  CHECK(svg.find("t (s)") != std::string::npos);
}
