#pragma once

#include <Eigen/Dense>
#include <variant>

#include "adhocgrid/network.hpp"
#include "adhocgrid/potentials.hpp"

namespace adhocgrid {

// Droop with fixed setpoints; u stays at its initial value.
struct DroopOnly {};

// Local integral restoration u_k' = (v_ref - v_k) / (c_u r_k).
struct Uncoordinated {
  double c_u = 1.0;
};

// Shared PI setpoint on the average voltage:
// u = v_ref + k_p (v_ref - v_mean) + k_i * integral(v_ref - v_mean).
// Identical across sources.
struct StandardSecondary {
  double k_p = 0.0;
  double k_i = 18.02;
};

// Combined restoration and proportional power sharing:
// u_k' = k_v (v_ref - v_mean) + k_lambda (lambda_k p_mean - p_k).
struct Multipurpose {
  double k_v = 36.04;
  double k_lambda = 0.7508;
  Eigen::VectorXd lambda;  // source-bus order; empty means all ones
};

using ControllerKind = std::variant<DroopOnly, Uncoordinated, StandardSecondary, Multipurpose>;

// Synchronous snapshot of what the secondary layer sees.
struct SourceMeasurements {
  Eigen::VectorXd voltages;  // source-bus order
  Eigen::VectorXd powers;    // delivered power v_k * (D^T i)_k per source
  double v_mean = 0.0;
  double p_mean = 0.0;
};

enum class Exactness { Exact, Approximate };

struct SteadyStateTargets {
  Exactness sharing;
  Exactness voltage;
};

// Power delivered at each source bus, v_k * (D^T i)_k, in source-bus order.
Eigen::VectorXd source_power(const NetworkGraph& g, const Eigen::VectorXd& v,
                             const Eigen::VectorXd& i);

SourceMeasurements measure_sources(const NetworkGraph& g, const Eigen::VectorXd& v,
                                   const Eigen::VectorXd& i);

// Setpoint rate for the differential controllers (Uncoordinated, Multipurpose).
// Throws std::invalid_argument for the algebraic kinds.
Eigen::VectorXd control_derivative(const ControllerKind& kind, const NetworkGraph& g,
                                   const SourceMeasurements& meas, double v_ref);

// Setpoint value for the algebraic controllers: DroopOnly returns the stored
// setpoints, StandardSecondary the shared PI value with integrator_state the
// accumulated integral of (v_ref - v_mean). Throws std::invalid_argument for
// the differential kinds.
Eigen::VectorXd control_setpoint(const ControllerKind& kind, const NetworkGraph& g,
                                 const SourceMeasurements& meas, double integrator_state,
                                 double v_ref);

// What each strategy can pin exactly at steady state.
SteadyStateTargets steady_state_targets(const ControllerKind& kind);

// lambda vector of a controller resolved to source count (all ones when the
// kind carries none).
Eigen::VectorXd sharing_weights(const ControllerKind& kind, int source_count);

}  // namespace adhocgrid
