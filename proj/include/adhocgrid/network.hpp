#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>
#include <vector>

namespace adhocgrid {

enum class BusKind { Source, Load };

// Constant-power load hanging on a bus, with its parallel capacitance.
struct LoadParams {
  double power = 0.0;        // W drawn (>= 0; negative would be generation)
  double capacitance = 0.0;  // F
};

// Droop-controlled source: voltage setpoint behind a virtual resistance.
struct SourceParams {
  double droop_resistance = 0.0;  // ohm
  double initial_setpoint = 0.0;  // V, u_k(0)
};

using BusParams = std::variant<SourceParams, LoadParams>;

// Directed RL line between two buses. Orientation fixes sign conventions only;
// current may flow either way.
struct LineParams {
  int source_bus = -1;
  int target_bus = -1;
  double resistance = 0.0;  // ohm
  double inductance = 0.0;  // H
};

struct ValidationIssue {
  std::string code;     // "no_source", "disconnected", "nonpositive_parameter", "self_loop", ...
  std::string message;
  int index = -1;       // offending bus or line, -1 when not applicable
};

struct ValidationReport {
  bool ok = false;
  std::vector<ValidationIssue> issues;
  double p_sigma = 0.0;  // total load power of the graph as given
  double r_sigma = 0.0;  // total line resistance
};

// Immutable bus/line network. Bus order and line order are preserved as given;
// all node vectors are indexed by bus id, edge vectors by line id.
class NetworkGraph {
 public:
  NetworkGraph(std::vector<BusParams> buses, std::vector<LineParams> lines);

  int bus_count() const { return static_cast<int>(buses_.size()); }
  int line_count() const { return static_cast<int>(lines_.size()); }
  int source_count() const { return static_cast<int>(source_buses_.size()); }
  int load_count() const { return static_cast<int>(load_buses_.size()); }

  BusKind kind(int bus) const;
  bool is_source(int bus) const { return kind(bus) == BusKind::Source; }
  const SourceParams& source_at(int bus) const;
  const LoadParams& load_at(int bus) const;
  const LineParams& line(int alpha) const { return lines_[alpha]; }
  const std::vector<LineParams>& lines() const { return lines_; }

  // Bus ids of sources (resp. loads) in bus order; node vectors restricted to
  // one kind use these orderings.
  const std::vector<int>& source_buses() const { return source_buses_; }
  const std::vector<int>& load_buses() const { return load_buses_; }

  double tau(int alpha) const;  // L/R of one line

  // Load powers in load-bus order.
  Eigen::VectorXd load_powers() const;
  // Droop resistances in source-bus order.
  Eigen::VectorXd droop_resistances() const;
  // Copy of this graph with load powers replaced (load-bus order).
  NetworkGraph with_load_powers(const Eigen::VectorXd& p_loads) const;

 private:
  std::vector<BusParams> buses_;
  std::vector<LineParams> lines_;
  std::vector<int> source_buses_;
  std::vector<int> load_buses_;
};

// Structural checks: weak connectivity, at least one source, strictly positive
// R/L/C/r and nonnegative load powers, no self-loops. Collects every issue
// instead of stopping at the first.
ValidationReport validate(const NetworkGraph& g);

// (Dv)_alpha = v[s_alpha] - v[t_alpha]; v is a node vector.
Eigen::VectorXd incidence_apply(const NetworkGraph& g, const Eigen::VectorXd& v);

// (D^T i)_k = sum of i over lines leaving k minus sum over lines entering k.
Eigen::VectorXd incidence_transpose_apply(const NetworkGraph& g, const Eigen::VectorXd& i);

// Slowest line time constant max_alpha L/R. Throws std::invalid_argument when
// the graph has no lines.
double tau_max(const NetworkGraph& g);

}  // namespace adhocgrid
