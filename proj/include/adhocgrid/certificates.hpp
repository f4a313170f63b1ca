#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "adhocgrid/network.hpp"

namespace adhocgrid {

// Aggregate design budget a unit family is certified against. p_sigma bounds the
// total load, r_sigma the total line resistance; loads lists the per-unit
// (power, capacitance) pairs the capacitance rule is checked for.
struct DesignEnvelope {
  double p_sigma = 0.0;
  double r_sigma = 0.0;
  double v_ref = 0.0;
  double v_min = 0.0;
  double r_max = 0.0;    // largest droop resistance
  double tau_max = 0.0;  // slowest line time constant
  std::vector<std::pair<double, double>> loads;  // (p_k, C_k)
};

struct CertificateEntry {
  std::string id;
  bool pass = false;
  bool strict = false;  // strict rules fail at the boundary
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs in rule units
};

struct CertificateReport {
  bool pass = false;
  std::vector<CertificateEntry> entries;
  std::vector<std::string> notes;
};

// Equilibrium existence: p_sigma <= v_ref^2 / (4 r_sigma). Non-strict.
CertificateEntry check_existence(const DesignEnvelope& e);

// Operating-band feasibility: p_sigma <= v_min (v_ref - v_min) / r_sigma. Non-strict.
CertificateEntry check_feasibility(const DesignEnvelope& e);

// Convexity of the co-content over the operating band:
// p_sigma <= v_min^2 / (r_sigma + r_max). Non-strict.
CertificateEntry check_bm_convexity(const DesignEnvelope& e);

// Per-load capacitance sizing: p_k < C_k v_min^2 / tau_max. Strict; boundary
// equality fails with zero margin.
std::vector<CertificateEntry> check_load_capacitances(const DesignEnvelope& e);

// Voltage Hessian of the reduced co-content at a candidate equilibrium:
// D^T R^{-1} D + diag(1/r_k at sources) - diag(p_k / v*_k^2 at loads).
// droop is in source-bus order.
Eigen::MatrixXd hessian_co_content(const NetworkGraph& g, const Eigen::VectorXd& v_star,
                                   const Eigen::VectorXd& droop);

struct TopologyAwareReport {
  bool pass = false;
  CertificateEntry hessian;             // lambda_min vs the scale-aware threshold
  std::vector<CertificateEntry> damping;  // per-load C_k - tau_max p_k / v*_k^2 > 0
};

// Both equilibrium-dependent conditions: the Hessian above is positive definite
// (lambda_min > 1e-9 * lambda_max) and every load satisfies
// C_k - tau_max p_k / v*_k^2 > 0.
TopologyAwareReport check_topology_aware(const NetworkGraph& g, const Eigen::VectorXd& v_star);

// Runs all four topology-free rules on the envelope.
CertificateReport certify_envelope(const DesignEnvelope& e);

}  // namespace adhocgrid
