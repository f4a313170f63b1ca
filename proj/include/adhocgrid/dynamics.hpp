#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "adhocgrid/controllers.hpp"
#include "adhocgrid/load_flow.hpp"
#include "adhocgrid/network.hpp"
#include "adhocgrid/potentials.hpp"

namespace adhocgrid {

// Step change of one load's drawn power at a point in time.
struct Event {
  double time = 0.0;
  int bus = -1;
  double power = 0.0;
};

struct SimConfig {
  double v_ref = 48.0;
  double t_end = 0.05;
  double max_step = 1e-6;
  double rel_tol = 1e-8;
  double abs_tol = 1e-9;
  double sample_interval = 1e-5;
  bool cold_start = false;  // v(0) = v_ref, i(0) = 0 instead of the droop rest state
};

struct TrajectorySample {
  double t = 0.0;
  SystemState state;            // source voltages obey v = u - r (D^T i) exactly
  Eigen::VectorXd source_power;
  double v_mean = 0.0;
  double p_mean = 0.0;
  double lyapunov = 0.0;        // xdot^T Q xdot + c_u du^T du at this sample
  double bm_potential = 0.0;    // transformed mixed potential at this sample
};

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  IntegratorStats stats;
  bool completed = false;
  std::string abort_reason;   // set when completed == false
  double v_ref = 0.0;         // run metadata used by the metrics below
  Eigen::VectorXd lambda;     // sharing weights of the run (ones unless Multipurpose)
};

// Right-hand side of the source-eliminated model. v_load and p_current are in
// load-bus order, u in source-bus order. du is the setpoint rate for the
// differential controllers and zero for the algebraic ones.
struct ReducedDerivative {
  Eigen::VectorXd di;
  Eigen::VectorXd dv_load;
  Eigen::VectorXd du;
};

ReducedDerivative reduced_rhs(const NetworkGraph& g, const ControllerKind& kind,
                              const Eigen::VectorXd& i, const Eigen::VectorXd& v_load,
                              const Eigen::VectorXd& u, const Eigen::VectorXd& p_current,
                              double v_ref);

// Integrates the reduced model with an embedded adaptive Runge-Kutta pair,
// stopping exactly on event times and sample-grid points. The sample recorded
// at an event time uses the pre-switch load powers. A load voltage collapsing
// to zero aborts the run; the partial trajectory is returned with
// completed == false.
Trajectory simulate(const NetworkGraph& g, const ControllerKind& kind,
                    const std::vector<Event>& events, const SimConfig& cfg,
                    const std::optional<SystemState>& initial = std::nullopt);

// Default starting point used by simulate: u at the configured setpoints and
// the electrical state at the droop steady state for the pre-event loads.
SystemState default_initial_state(const NetworkGraph& g, const SimConfig& cfg);

struct ConsistencyReport {
  bool settled = false;          // terminal derivative norm below settle_tol
  bool pass = false;
  double max_derivative = 0.0;   // inf norm of (di, dv, du) at the last sample
  double max_load_mismatch = 0.0;  // max relative load-voltage error vs sol
  double v_mean_error = 0.0;       // |terminal v_mean - v_ref|
};

// Cross-checks a settled trajectory against the pinned-source equilibrium:
// load voltages match within match_tol (relative) and the mean source voltage
// is restored to v_ref within match_tol * v_ref.
ConsistencyReport equilibrium_consistency(const NetworkGraph& g, const Trajectory& traj,
                                          const EquilibriumSolution& sol, double v_ref,
                                          double settle_tol = 1e-3, double match_tol = 1e-6);

struct SteadyStateMetrics {
  double sharing_error = 0.0;  // window average of max_k |p_k - lambda_k p_mean| / p_mean
  double voltage_error = 0.0;  // window average of |v_mean - v_ref|
  int samples = 0;
};

// Window is in seconds measured back from the last sample. Throws
// std::domain_error when the mean delivered power is not positive somewhere in
// the window.
SteadyStateMetrics steady_state_metrics(const Trajectory& traj, double window);

}  // namespace adhocgrid
