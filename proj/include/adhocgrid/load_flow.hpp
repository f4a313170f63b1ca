#pragma once

#include <Eigen/Dense>

#include "adhocgrid/network.hpp"

namespace adhocgrid {

struct EquilibriumSolution {
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;   // max power mismatch over load buses, W
  Eigen::VectorXd v_star;       // all bus voltages
  Eigen::VectorXd i_star;       // line currents, R^{-1} D v
  std::string failure_reason;   // empty when converged
};

struct EffectiveImpedance {
  Eigen::MatrixXd z;            // load-bus block inverse of the R-weighted Laplacian
  double z_inf_star = 0.0;      // max diagonal entry
  double z_row_sum_norm = 0.0;  // induced infinity norm (max absolute row sum)
};

struct MinVoltageReport {
  bool pass = false;
  int worst_bus = -1;           // global bus id of the lowest load voltage
  double min_voltage = 0.0;
};

// Conductance-weighted graph Laplacian D^T R^{-1} D, assembled symmetrically.
Eigen::MatrixXd weighted_laplacian(const NetworkGraph& g);

// High-voltage equilibrium with every source pinned at v_ref: damped Newton on
// the load voltages, residual p_k + v_k (G v)_k per load bus. Steps are halved
// while they would push a load voltage below 0.01*v_ref. tolerance <= 0 picks
// the default max(1e-10 * p_sigma, 1e-9) W.
EquilibriumSolution solve_equilibrium(const NetworkGraph& g, double v_ref,
                                      double tolerance = 0.0, int max_iter = 50);

// Same Newton machinery with fixed source setpoints u: source voltages become
// unknowns satisfying v_k + r_k (G v)_k = u_k. u is in source-bus order.
EquilibriumSolution solve_droop_equilibrium(const NetworkGraph& g, const Eigen::VectorXd& u,
                                            double tolerance = 0.0, int max_iter = 50);

// Effective impedance seen by the loads: inverse of the load-bus principal
// block of the weighted Laplacian. Requires at least one load.
EffectiveImpedance effective_impedance(const NetworkGraph& g);

// All load voltages of a solution strictly above v_min.
MinVoltageReport check_min_voltage(const NetworkGraph& g, const EquilibriumSolution& sol,
                                   double v_min);

}  // namespace adhocgrid
