#include "adhocgrid/scenario.hpp"

#include <fstream>
#include <map>
#include <set>

namespace adhocgrid {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("scenario: " + msg); }

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) fail("unknown key \"" + key + "\" in " + where);
}

double require_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail("missing \"" + key + "\" in " + where);
  if (!j[key].is_number()) fail("\"" + key + "\" in " + where + " must be a number");
  return j[key].get<double>();
}

double optional_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  return j[key].get<double>();
}

NetworkGraph parse_network(const json& j, double v_ref) {
  if (!j.contains("buses") || !j["buses"].is_array() || j["buses"].empty())
    fail("network.buses must be a non-empty array");
  if (!j.contains("lines") || !j["lines"].is_array()) fail("network.lines must be an array");
  reject_unknown_keys(j, {"buses", "lines"}, "network");

  std::vector<BusParams> buses;
  for (std::size_t k = 0; k < j["buses"].size(); ++k) {
    const json& b = j["buses"][k];
    const std::string where = "network.buses[" + std::to_string(k) + "]";
    if (!b.contains("kind")) fail("missing \"kind\" in " + where);
    const std::string kind = b["kind"].get<std::string>();
    if (kind == "source") {
      reject_unknown_keys(b, {"kind", "droop_resistance", "setpoint"}, where);
      SourceParams sp;
      sp.droop_resistance = require_number(b, "droop_resistance", where);
      sp.initial_setpoint = optional_number(b, "setpoint", v_ref);
      buses.emplace_back(sp);
    } else if (kind == "load") {
      reject_unknown_keys(b, {"kind", "power", "capacitance"}, where);
      LoadParams lp;
      lp.power = require_number(b, "power", where);
      lp.capacitance = require_number(b, "capacitance", where);
      buses.emplace_back(lp);
    } else {
      fail(where + ": kind must be \"source\" or \"load\"");
    }
  }

  std::vector<LineParams> lines;
  for (std::size_t a = 0; a < j["lines"].size(); ++a) {
    const json& l = j["lines"][a];
    const std::string where = "network.lines[" + std::to_string(a) + "]";
    reject_unknown_keys(l, {"from", "to", "resistance", "inductance"}, where);
    LineParams ln;
    if (!l.contains("from") || !l.contains("to")) fail(where + " needs \"from\" and \"to\"");
    ln.source_bus = l["from"].get<int>();
    ln.target_bus = l["to"].get<int>();
    ln.resistance = require_number(l, "resistance", where);
    ln.inductance = require_number(l, "inductance", where);
    lines.push_back(ln);
  }
  return NetworkGraph(std::move(buses), std::move(lines));
}

ControllerKind parse_controller(const json& j, int source_count) {
  if (!j.contains("kind")) fail("controller needs a \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  reject_unknown_keys(j, {"kind", "k_p", "k_i", "k_v", "k_lambda", "lambda", "c_u"}, "controller");
  if (kind == "droop_only") return DroopOnly{};
  if (kind == "uncoordinated") {
    Uncoordinated u;
    u.c_u = optional_number(j, "c_u", u.c_u);
    if (!(u.c_u > 0.0)) fail("controller.c_u must be > 0");
    return u;
  }
  if (kind == "standard_secondary") {
    StandardSecondary s;
    s.k_p = optional_number(j, "k_p", s.k_p);
    s.k_i = optional_number(j, "k_i", s.k_i);
    if (s.k_p < 0.0 || !(s.k_i > 0.0)) fail("standard_secondary gains must be k_p >= 0, k_i > 0");
    return s;
  }
  if (kind == "multipurpose") {
    Multipurpose m;
    m.k_v = optional_number(j, "k_v", m.k_v);
    m.k_lambda = optional_number(j, "k_lambda", m.k_lambda);
    if (!(m.k_v > 0.0) || !(m.k_lambda > 0.0)) fail("multipurpose gains must be > 0");
    if (j.contains("lambda")) {
      const auto& arr = j["lambda"];
      if (!arr.is_array() || static_cast<int>(arr.size()) != source_count)
        fail("controller.lambda must list one weight per source");
      m.lambda.resize(source_count);
      for (int i = 0; i < source_count; ++i) {
        m.lambda[i] = arr[i].get<double>();
        if (!(m.lambda[i] > 0.0)) fail("controller.lambda entries must be > 0");
      }
    } else {
      m.lambda = Eigen::VectorXd::Ones(source_count);
    }
    return m;
  }
  fail("unknown controller kind \"" + kind + "\"");
}

}  // namespace

Scenario parse_scenario(const json& j) {
  reject_unknown_keys(j,
                      {"schema", "name", "description", "v_ref", "v_min", "network", "controller",
                       "events", "sim", "output"},
                      "scenario");
  if (!j.contains("schema") || !j["schema"].is_number_integer() || j["schema"].get<int>() != 1)
    fail("unsupported or missing schema version (expected 1)");
  if (!j.contains("network")) fail("missing \"network\"");

  const double v_ref = optional_number(j, "v_ref", 48.0);
  if (!(v_ref > 0.0)) fail("v_ref must be > 0");

  Scenario sc(parse_network(j["network"], v_ref));
  sc.v_ref = v_ref;
  sc.v_min = optional_number(j, "v_min", 0.95 * v_ref);
  if (!(sc.v_min > 0.0 && sc.v_min < sc.v_ref)) fail("v_min must lie in (0, v_ref)");
  sc.name = j.value("name", std::string("scenario"));
  sc.description = j.value("description", std::string());

  const ValidationReport val = validate(sc.graph);
  if (!val.ok) {
    std::string msg = "invalid network:";
    for (const auto& issue : val.issues) msg += " [" + issue.code + "] " + issue.message + ";";
    fail(msg);
  }

  if (j.contains("controller"))
    sc.controller = parse_controller(j["controller"], sc.graph.source_count());

  sc.sim.v_ref = sc.v_ref;
  if (j.contains("sim")) {
    const json& s = j["sim"];
    reject_unknown_keys(
        s, {"t_end", "max_step", "rel_tol", "abs_tol", "sample_interval", "cold_start"}, "sim");
    sc.sim.t_end = optional_number(s, "t_end", sc.sim.t_end);
    sc.sim.max_step = optional_number(s, "max_step", sc.sim.max_step);
    sc.sim.rel_tol = optional_number(s, "rel_tol", sc.sim.rel_tol);
    sc.sim.abs_tol = optional_number(s, "abs_tol", sc.sim.abs_tol);
    sc.sim.sample_interval = optional_number(s, "sample_interval", sc.sim.sample_interval);
    sc.sim.cold_start = s.value("cold_start", false);
    if (!(sc.sim.t_end > 0.0) || !(sc.sim.max_step > 0.0) || !(sc.sim.sample_interval > 0.0))
      fail("sim durations and steps must be > 0");
  }

  if (j.contains("events")) {
    if (!j["events"].is_array()) fail("events must be an array");
    for (std::size_t e = 0; e < j["events"].size(); ++e) {
      const json& ev = j["events"][e];
      const std::string where = "events[" + std::to_string(e) + "]";
      reject_unknown_keys(ev, {"time", "bus", "power"}, where);
      Event event;
      event.time = require_number(ev, "time", where);
      if (!ev.contains("bus")) fail("missing \"bus\" in " + where);
      event.bus = ev["bus"].get<int>();
      event.power = require_number(ev, "power", where);
      if (event.bus < 0 || event.bus >= sc.graph.bus_count())
        fail(where + ": bus out of range");
      if (sc.graph.is_source(event.bus)) fail(where + ": event target is not a load bus");
      if (event.time < 0.0 || event.time > sc.sim.t_end)
        fail(where + ": time must lie in [0, t_end]");
      if (event.power < 0.0) fail(where + ": power must be >= 0");
      sc.events.push_back(event);
    }
  }

  if (j.contains("output")) {
    reject_unknown_keys(j["output"], {"csv", "plots"}, "output");
    sc.write_csv = j["output"].value("csv", true);
    sc.write_plots = j["output"].value("plots", true);
  }
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(path + " is not valid JSON: " + e.what());
  }
  return parse_scenario(j);
}

json serialize_scenario(const Scenario& sc) {
  json j;
  j["schema"] = 1;
  j["name"] = sc.name;
  if (!sc.description.empty()) j["description"] = sc.description;
  j["v_ref"] = sc.v_ref;
  j["v_min"] = sc.v_min;

  json buses = json::array();
  for (int k = 0; k < sc.graph.bus_count(); ++k) {
    json b;
    if (sc.graph.is_source(k)) {
      const auto& sp = sc.graph.source_at(k);
      b["kind"] = "source";
      b["droop_resistance"] = sp.droop_resistance;
      b["setpoint"] = sp.initial_setpoint;
    } else {
      const auto& lp = sc.graph.load_at(k);
      b["kind"] = "load";
      b["power"] = lp.power;
      b["capacitance"] = lp.capacitance;
    }
    buses.push_back(b);
  }
  json lines = json::array();
  for (int a = 0; a < sc.graph.line_count(); ++a) {
    const auto& ln = sc.graph.line(a);
    lines.push_back({{"from", ln.source_bus},
                     {"to", ln.target_bus},
                     {"resistance", ln.resistance},
                     {"inductance", ln.inductance}});
  }
  j["network"] = {{"buses", buses}, {"lines", lines}};

  json c;
  if (std::holds_alternative<DroopOnly>(sc.controller)) {
    c["kind"] = "droop_only";
  } else if (const auto* u = std::get_if<Uncoordinated>(&sc.controller)) {
    c["kind"] = "uncoordinated";
    c["c_u"] = u->c_u;
  } else if (const auto* s = std::get_if<StandardSecondary>(&sc.controller)) {
    c["kind"] = "standard_secondary";
    c["k_p"] = s->k_p;
    c["k_i"] = s->k_i;
  } else if (const auto* m = std::get_if<Multipurpose>(&sc.controller)) {
    c["kind"] = "multipurpose";
    c["k_v"] = m->k_v;
    c["k_lambda"] = m->k_lambda;
    c["lambda"] = std::vector<double>(m->lambda.data(), m->lambda.data() + m->lambda.size());
  }
  j["controller"] = c;

  json evs = json::array();
  for (const auto& ev : sc.events)
    evs.push_back({{"time", ev.time}, {"bus", ev.bus}, {"power", ev.power}});
  j["events"] = evs;

  j["sim"] = {{"t_end", sc.sim.t_end},
              {"max_step", sc.sim.max_step},
              {"rel_tol", sc.sim.rel_tol},
              {"abs_tol", sc.sim.abs_tol},
              {"sample_interval", sc.sim.sample_interval},
              {"cold_start", sc.sim.cold_start}};
  j["output"] = {{"csv", sc.write_csv}, {"plots", sc.write_plots}};
  return j;
}

CertificationProblem certification_problem(const Scenario& sc) {
  const auto& g = sc.graph;
  Eigen::VectorXd p = g.load_powers();
  std::vector<int> load_index(g.bus_count(), -1);
  for (int j = 0; j < g.load_count(); ++j) load_index[g.load_buses()[j]] = j;

  Eigen::VectorXd p_max_per_load = p;
  Eigen::VectorXd p_at_peak = p;
  double peak_total = p.sum();

  std::vector<Event> evs = sc.events;
  std::stable_sort(evs.begin(), evs.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });
  for (const auto& ev : evs) {
    p[load_index[ev.bus]] = ev.power;
    p_max_per_load[load_index[ev.bus]] = std::max(p_max_per_load[load_index[ev.bus]], ev.power);
    if (p.sum() >= peak_total) {  // ties resolve to the latest snapshot
      peak_total = p.sum();
      p_at_peak = p;
    }
  }

  CertificationProblem prob{DesignEnvelope{}, g.with_load_powers(p_at_peak)};
  prob.envelope.p_sigma = peak_total;
  prob.envelope.v_ref = sc.v_ref;
  prob.envelope.v_min = sc.v_min;
  for (int a = 0; a < g.line_count(); ++a) prob.envelope.r_sigma += g.line(a).resistance;
  prob.envelope.tau_max = g.line_count() > 0 ? tau_max(g) : 0.0;
  Eigen::VectorXd droops = g.droop_resistances();
  prob.envelope.r_max = droops.size() > 0 ? droops.maxCoeff() : 0.0;
  for (int j = 0; j < g.load_count(); ++j) {
    const int k = g.load_buses()[j];
    prob.envelope.loads.emplace_back(p_max_per_load[j], g.load_at(k).capacitance);
  }
  return prob;
}

json to_json(const ValidationReport& rep) {
  json j;
  j["ok"] = rep.ok;
  j["p_sigma_w"] = rep.p_sigma;
  j["r_sigma_ohm"] = rep.r_sigma;
  j["issues"] = json::array();
  for (const auto& issue : rep.issues)
    j["issues"].push_back({{"code", issue.code}, {"message", issue.message}, {"index", issue.index}});
  return j;
}

namespace {
json entry_json(const CertificateEntry& e) {
  return {{"id", e.id},     {"pass", e.pass},     {"strict", e.strict},
          {"lhs", e.lhs},   {"rhs", e.rhs},       {"margin", e.margin}};
}
}  // namespace

json to_json(const CertificateReport& rep) {
  json j;
  j["pass"] = rep.pass;
  j["rules"] = json::array();
  for (const auto& e : rep.entries) j["rules"].push_back(entry_json(e));
  j["notes"] = rep.notes;
  return j;
}

json to_json(const TopologyAwareReport& rep) {
  json j;
  j["pass"] = rep.pass;
  j["hessian"] = entry_json(rep.hessian);
  j["damping"] = json::array();
  for (const auto& e : rep.damping) j["damping"].push_back(entry_json(e));
  return j;
}

json to_json(const EquilibriumSolution& sol, const NetworkGraph& g) {
  json j;
  j["converged"] = sol.converged;
  j["iterations"] = sol.iterations;
  j["residual_w"] = sol.residual_norm;
  if (!sol.failure_reason.empty()) j["failure_reason"] = sol.failure_reason;
  j["bus_voltage_v"] = std::vector<double>(sol.v_star.data(), sol.v_star.data() + sol.v_star.size());
  j["line_current_a"] = std::vector<double>(sol.i_star.data(), sol.i_star.data() + sol.i_star.size());
  (void)g;
  return j;
}

json to_json(const ConsistencyReport& rep) {
  return {{"pass", rep.pass},
          {"settled", rep.settled},
          {"max_derivative", rep.max_derivative},
          {"max_load_mismatch_rel", rep.max_load_mismatch},
          {"v_mean_error_v", rep.v_mean_error}};
}

json to_json(const SteadyStateMetrics& m) {
  return {{"sharing_error", m.sharing_error},
          {"voltage_error_v", m.voltage_error},
          {"window_samples", m.samples}};
}

}  // namespace adhocgrid
