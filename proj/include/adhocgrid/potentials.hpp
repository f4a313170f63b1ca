#pragma once

#include <Eigen/Dense>

#include "adhocgrid/network.hpp"

namespace adhocgrid {

// Full electrical + control state: line currents i (edge vector), bus voltages
// v (node vector), source setpoints u (source-bus order).
struct SystemState {
  Eigen::VectorXd i;
  Eigen::VectorXd v;
  Eigen::VectorXd u;
};

struct StateDerivative {
  Eigen::VectorXd di;
  Eigen::VectorXd dv;  // node vector; source entries come from the algebraic limit
  Eigen::VectorXd du;
};

// Dissipation potential of the lines, 1/2 sum R_a i_a^2.
double resistive_content(const NetworkGraph& g, const Eigen::VectorXd& i);

// Co-content of loads and droop-controlled sources:
// sum_loads p_k ln v_k + sum_sources [v_k^2/2 + (v_ref - v_k) u_k] / r_k.
// Throws std::domain_error when a load voltage is <= 0.
double resistive_co_content(const NetworkGraph& g, const Eigen::VectorXd& v,
                            const Eigen::VectorXd& u, double v_ref);

// Gradient of the co-content in v: p_k/v_k at loads, (v_k - u_k)/r_k at sources.
Eigen::VectorXd co_content_gradient_v(const NetworkGraph& g, const Eigen::VectorXd& v,
                                      const Eigen::VectorXd& u);

// Diagonal of the v-Hessian of the co-content: -p_k/v_k^2 at loads, 1/r_k at sources.
Eigen::VectorXd co_content_hessian_diag(const NetworkGraph& g, const Eigen::VectorXd& v);

// Mixed potential G0 - R0 + i^T D v generating the primal-dual electrical flow.
double bm_potential_p0(const NetworkGraph& g, const SystemState& s, double v_ref);

// Augmented co-content 1/2 v^T D^T R^{-1} D v + G0.
double co_content_g(const NetworkGraph& g, const Eigen::VectorXd& v, const Eigen::VectorXd& u,
                    double v_ref);

// Transformed potential
//   1/2 di^T [tau L - L R^{-1} L] di + (tau/2) dv^T C dv + G,
// where the dv quadratic runs over load buses only and tau is the slowest line
// time constant.
double bm_potential_p(const NetworkGraph& g, const SystemState& s, const StateDerivative& d,
                      double v_ref, double tau);

// Transformed quasi-gradient matrix, size (m+n) x (m+n), ordered [lines; buses]:
//   tau * [[R - L/tau, -D], [D^T, hess(G0) + C/tau]].
Eigen::MatrixXd q_matrix(const NetworkGraph& g, const Eigen::VectorXd& v, double tau);

// Storage-like Lyapunov value xdot^T Q xdot + c_u * sum du^2 with xdot = (di, dv).
// Off-diagonal blocks of Q are antisymmetric, so this equals the diagonal-block
// quadratic form; both evaluations agree to rounding.
double lyapunov_v(const NetworkGraph& g, const SystemState& s, const StateDerivative& d,
                  double tau, double c_u);

}  // namespace adhocgrid
