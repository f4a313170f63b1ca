#include "adhocgrid/csv.hpp"

#include <cstdio>

namespace adhocgrid {

namespace {

void put(std::ostream& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  out << buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const NetworkGraph& g, const Trajectory& traj) {
  out << "t (s)";
  for (int a = 0; a < g.line_count(); ++a) out << ",i_" << a << " (A)";
  for (int k = 0; k < g.bus_count(); ++k) out << ",v_" << k << " (V)";
  for (int k : g.source_buses()) out << ",u_" << k << " (V)";
  for (int k : g.source_buses()) out << ",P_" << k << " (W)";
  out << ",v_mean (V),P_mean (W),V_lyapunov (1),P_potential (W)\n";

  for (const auto& s : traj.samples) {
    put(out, s.t);
    for (int a = 0; a < g.line_count(); ++a) {
      out << ',';
      put(out, s.state.i[a]);
    }
    for (int k = 0; k < g.bus_count(); ++k) {
      out << ',';
      put(out, s.state.v[k]);
    }
    for (int j = 0; j < g.source_count(); ++j) {
      out << ',';
      put(out, s.state.u[j]);
    }
    for (int j = 0; j < g.source_count(); ++j) {
      out << ',';
      put(out, s.source_power[j]);
    }
    out << ',';
    put(out, s.v_mean);
    out << ',';
    put(out, s.p_mean);
    out << ',';
    put(out, s.lyapunov);
    out << ',';
    put(out, s.bm_potential);
    out << '\n';
  }
  if (!traj.completed) out << "# aborted: " << traj.abort_reason << '\n';
}

}  // namespace adhocgrid
