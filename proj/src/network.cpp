#include "adhocgrid/network.hpp"

#include <numeric>
#include <stdexcept>

namespace adhocgrid {

NetworkGraph::NetworkGraph(std::vector<BusParams> buses, std::vector<LineParams> lines)
    : buses_(std::move(buses)), lines_(std::move(lines)) {
  if (buses_.empty()) throw std::invalid_argument("network needs at least one bus");
  const int n = bus_count();
  for (std::size_t a = 0; a < lines_.size(); ++a) {
    const auto& ln = lines_[a];
    if (ln.source_bus < 0 || ln.source_bus >= n || ln.target_bus < 0 || ln.target_bus >= n)
      throw std::invalid_argument("line " + std::to_string(a) + " references a bus out of range");
  }
  for (int k = 0; k < n; ++k) {
    if (std::holds_alternative<SourceParams>(buses_[k]))
      source_buses_.push_back(k);
    else
      load_buses_.push_back(k);
  }
}

BusKind NetworkGraph::kind(int bus) const {
  return std::holds_alternative<SourceParams>(buses_.at(bus)) ? BusKind::Source : BusKind::Load;
}

const SourceParams& NetworkGraph::source_at(int bus) const {
  return std::get<SourceParams>(buses_.at(bus));
}

const LoadParams& NetworkGraph::load_at(int bus) const {
  return std::get<LoadParams>(buses_.at(bus));
}

double NetworkGraph::tau(int alpha) const {
  const auto& ln = lines_.at(alpha);
  return ln.inductance / ln.resistance;
}

Eigen::VectorXd NetworkGraph::load_powers() const {
  Eigen::VectorXd p(load_count());
  for (int j = 0; j < load_count(); ++j) p[j] = load_at(load_buses_[j]).power;
  return p;
}

Eigen::VectorXd NetworkGraph::droop_resistances() const {
  Eigen::VectorXd r(source_count());
  for (int j = 0; j < source_count(); ++j) r[j] = source_at(source_buses_[j]).droop_resistance;
  return r;
}

NetworkGraph NetworkGraph::with_load_powers(const Eigen::VectorXd& p_loads) const {
  if (p_loads.size() != load_count())
    throw std::invalid_argument("load power vector length mismatch");
  std::vector<BusParams> buses = buses_;
  for (int j = 0; j < load_count(); ++j)
    std::get<LoadParams>(buses[load_buses_[j]]).power = p_loads[j];
  return NetworkGraph(std::move(buses), lines_);
}

namespace {

int find_root(std::vector<int>& parent, int k) {
  while (parent[k] != k) {
    parent[k] = parent[parent[k]];
    k = parent[k];
  }
  return k;
}

}  // namespace

ValidationReport validate(const NetworkGraph& g) {
  ValidationReport rep;
  const int n = g.bus_count();
  const int m = g.line_count();

  if (g.source_count() == 0)
    rep.issues.push_back({"no_source", "network has no source bus", -1});

  for (int k = 0; k < n; ++k) {
    if (g.is_source(k)) {
      const auto& s = g.source_at(k);
      if (!(s.droop_resistance > 0.0))
        rep.issues.push_back({"nonpositive_parameter",
                              "bus " + std::to_string(k) + ": droop resistance must be > 0", k});
    } else {
      const auto& l = g.load_at(k);
      if (!(l.capacitance > 0.0))
        rep.issues.push_back({"nonpositive_parameter",
                              "bus " + std::to_string(k) + ": load capacitance must be > 0", k});
      if (l.power < 0.0)
        rep.issues.push_back({"nonpositive_parameter",
                              "bus " + std::to_string(k) + ": load power must be >= 0", k});
      rep.p_sigma += l.power;
    }
  }

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int a = 0; a < m; ++a) {
    const auto& ln = g.line(a);
    if (ln.source_bus == ln.target_bus)
      rep.issues.push_back({"self_loop", "line " + std::to_string(a) + " is a self-loop", a});
    if (!(ln.resistance > 0.0))
      rep.issues.push_back({"nonpositive_parameter",
                            "line " + std::to_string(a) + ": resistance must be > 0", a});
    if (!(ln.inductance > 0.0))
      rep.issues.push_back({"nonpositive_parameter",
                            "line " + std::to_string(a) + ": inductance must be > 0", a});
    rep.r_sigma += ln.resistance;
    parent[find_root(parent, ln.source_bus)] = find_root(parent, ln.target_bus);
  }

  const int root0 = find_root(parent, 0);
  for (int k = 1; k < n; ++k) {
    if (find_root(parent, k) != root0) {
      rep.issues.push_back({"disconnected", "network is not connected", -1});
      break;
    }
  }

  rep.ok = rep.issues.empty();
  return rep;
}

Eigen::VectorXd incidence_apply(const NetworkGraph& g, const Eigen::VectorXd& v) {
  if (v.size() != g.bus_count()) throw std::invalid_argument("node vector length mismatch");
  Eigen::VectorXd out(g.line_count());
  for (int a = 0; a < g.line_count(); ++a) {
    const auto& ln = g.line(a);
    out[a] = v[ln.source_bus] - v[ln.target_bus];
  }
  return out;
}

Eigen::VectorXd incidence_transpose_apply(const NetworkGraph& g, const Eigen::VectorXd& i) {
  if (i.size() != g.line_count()) throw std::invalid_argument("edge vector length mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(g.bus_count());
  for (int a = 0; a < g.line_count(); ++a) {
    const auto& ln = g.line(a);
    out[ln.source_bus] += i[a];
    out[ln.target_bus] -= i[a];
  }
  return out;
}

double tau_max(const NetworkGraph& g) {
  if (g.line_count() == 0) throw std::invalid_argument("tau_max needs at least one line");
  double t = 0.0;
  for (int a = 0; a < g.line_count(); ++a) t = std::max(t, g.tau(a));
  return t;
}

}  // namespace adhocgrid
