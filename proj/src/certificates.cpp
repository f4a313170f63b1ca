#include "adhocgrid/certificates.hpp"

#include "adhocgrid/load_flow.hpp"

namespace adhocgrid {

namespace {

CertificateEntry make_entry(std::string id, double lhs, double rhs, bool strict) {
  CertificateEntry e;
  e.id = std::move(id);
  e.lhs = lhs;
  e.rhs = rhs;
  e.strict = strict;
  e.margin = rhs - lhs;
  e.pass = strict ? lhs < rhs : lhs <= rhs;
  return e;
}

}  // namespace

CertificateEntry check_existence(const DesignEnvelope& e) {
  return make_entry("existence", e.p_sigma, e.v_ref * e.v_ref / (4.0 * e.r_sigma), false);
}

CertificateEntry check_feasibility(const DesignEnvelope& e) {
  return make_entry("feasibility", e.p_sigma, e.v_min * (e.v_ref - e.v_min) / e.r_sigma, false);
}

CertificateEntry check_bm_convexity(const DesignEnvelope& e) {
  return make_entry("bm_convexity", e.p_sigma, e.v_min * e.v_min / (e.r_sigma + e.r_max), false);
}

std::vector<CertificateEntry> check_load_capacitances(const DesignEnvelope& e) {
  std::vector<CertificateEntry> out;
  out.reserve(e.loads.size());
  for (std::size_t k = 0; k < e.loads.size(); ++k) {
    const auto& [p, c] = e.loads[k];
    out.push_back(make_entry("load_capacitance[" + std::to_string(k) + "]", p,
                             c * e.v_min * e.v_min / e.tau_max, true));
  }
  return out;
}

Eigen::MatrixXd hessian_co_content(const NetworkGraph& g, const Eigen::VectorXd& v_star,
                                   const Eigen::VectorXd& droop) {
  if (v_star.size() != g.bus_count()) throw std::invalid_argument("voltage vector length mismatch");
  if (droop.size() != g.source_count())
    throw std::invalid_argument("droop vector must have one entry per source");
  Eigen::MatrixXd h = weighted_laplacian(g);
  for (int j = 0; j < g.source_count(); ++j) {
    const int k = g.source_buses()[j];
    h(k, k) += 1.0 / droop[j];
  }
  for (int k : g.load_buses()) h(k, k) -= g.load_at(k).power / (v_star[k] * v_star[k]);
  return h;
}

TopologyAwareReport check_topology_aware(const NetworkGraph& g, const Eigen::VectorXd& v_star) {
  TopologyAwareReport rep;
  const Eigen::MatrixXd h = hessian_co_content(g, v_star, g.droop_resistances());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  rep.hessian = make_entry("hessian_pd", 1e-9 * std::abs(hi), lo, true);

  const double tau = tau_max(g);
  bool all_damped = true;
  for (int j = 0; j < g.load_count(); ++j) {
    const int k = g.load_buses()[j];
    const auto& load = g.load_at(k);
    CertificateEntry e = make_entry("load_damping[" + std::to_string(j) + "]",
                                    tau * load.power / (v_star[k] * v_star[k]),
                                    load.capacitance, true);
    all_damped = all_damped && e.pass;
    rep.damping.push_back(std::move(e));
  }
  rep.pass = rep.hessian.pass && all_damped;
  return rep;
}

CertificateReport certify_envelope(const DesignEnvelope& e) {
  CertificateReport rep;
  rep.entries.push_back(check_existence(e));
  rep.entries.push_back(check_feasibility(e));
  rep.entries.push_back(check_bm_convexity(e));
  for (auto& entry : check_load_capacitances(e)) rep.entries.push_back(std::move(entry));
  rep.pass = true;
  for (const auto& entry : rep.entries) rep.pass = rep.pass && entry.pass;
  return rep;
}

}  // namespace adhocgrid
