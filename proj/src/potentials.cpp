#include "adhocgrid/potentials.hpp"

#include <cmath>
#include <stdexcept>

#include "adhocgrid/load_flow.hpp"

namespace adhocgrid {

namespace {

void check_sizes(const NetworkGraph& g, const Eigen::VectorXd& v, const Eigen::VectorXd& u) {
  if (v.size() != g.bus_count()) throw std::invalid_argument("node vector length mismatch");
  if (u.size() != g.source_count())
    throw std::invalid_argument("setpoint vector must have one entry per source");
}

}  // namespace

double resistive_content(const NetworkGraph& g, const Eigen::VectorXd& i) {
  if (i.size() != g.line_count()) throw std::invalid_argument("edge vector length mismatch");
  double acc = 0.0;
  for (int a = 0; a < g.line_count(); ++a) acc += 0.5 * g.line(a).resistance * i[a] * i[a];
  return acc;
}

double resistive_co_content(const NetworkGraph& g, const Eigen::VectorXd& v,
                            const Eigen::VectorXd& u, double v_ref) {
  check_sizes(g, v, u);
  double acc = 0.0;
  for (int k : g.load_buses()) {
    const double p = g.load_at(k).power;
    if (p != 0.0 && v[k] <= 0.0)
      throw std::domain_error("co-content undefined: nonpositive voltage at loaded bus " +
                              std::to_string(k));
    if (p != 0.0) acc += p * std::log(v[k]);
  }
  for (int j = 0; j < g.source_count(); ++j) {
    const int k = g.source_buses()[j];
    const double r = g.source_at(k).droop_resistance;
    acc += (0.5 * v[k] * v[k] + (v_ref - v[k]) * u[j]) / r;
  }
  return acc;
}

Eigen::VectorXd co_content_gradient_v(const NetworkGraph& g, const Eigen::VectorXd& v,
                                      const Eigen::VectorXd& u) {
  check_sizes(g, v, u);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(g.bus_count());
  for (int k : g.load_buses()) grad[k] = g.load_at(k).power / v[k];
  for (int j = 0; j < g.source_count(); ++j) {
    const int k = g.source_buses()[j];
    grad[k] = (v[k] - u[j]) / g.source_at(k).droop_resistance;
  }
  return grad;
}

Eigen::VectorXd co_content_hessian_diag(const NetworkGraph& g, const Eigen::VectorXd& v) {
  if (v.size() != g.bus_count()) throw std::invalid_argument("node vector length mismatch");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(g.bus_count());
  for (int k : g.load_buses()) diag[k] = -g.load_at(k).power / (v[k] * v[k]);
  for (int k : g.source_buses()) diag[k] = 1.0 / g.source_at(k).droop_resistance;
  return diag;
}

double bm_potential_p0(const NetworkGraph& g, const SystemState& s, double v_ref) {
  return resistive_co_content(g, s.v, s.u, v_ref) - resistive_content(g, s.i) +
         s.i.dot(incidence_apply(g, s.v));
}

double co_content_g(const NetworkGraph& g, const Eigen::VectorXd& v, const Eigen::VectorXd& u,
                    double v_ref) {
  const Eigen::VectorXd dv = incidence_apply(g, v);
  double quad = 0.0;
  for (int a = 0; a < g.line_count(); ++a) quad += 0.5 * dv[a] * dv[a] / g.line(a).resistance;
  return quad + resistive_co_content(g, v, u, v_ref);
}

double bm_potential_p(const NetworkGraph& g, const SystemState& s, const StateDerivative& d,
                      double v_ref, double tau) {
  if (d.di.size() != g.line_count() || d.dv.size() != g.bus_count())
    throw std::invalid_argument("derivative vector length mismatch");
  double acc = co_content_g(g, s.v, s.u, v_ref);
  for (int a = 0; a < g.line_count(); ++a) {
    const double l = g.line(a).inductance;
    acc += 0.5 * l * (tau - g.tau(a)) * d.di[a] * d.di[a];
  }
  for (int k : g.load_buses())
    acc += 0.5 * tau * g.load_at(k).capacitance * d.dv[k] * d.dv[k];
  return acc;
}

Eigen::MatrixXd q_matrix(const NetworkGraph& g, const Eigen::VectorXd& v, double tau) {
  const int m = g.line_count();
  const int n = g.bus_count();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m + n, m + n);
  for (int a = 0; a < m; ++a) {
    const auto& ln = g.line(a);
    q(a, a) = tau * ln.resistance - ln.inductance;
    q(a, m + ln.source_bus) -= tau;
    q(a, m + ln.target_bus) += tau;
    q(m + ln.source_bus, a) += tau;
    q(m + ln.target_bus, a) -= tau;
  }
  const Eigen::VectorXd hdiag = co_content_hessian_diag(g, v);
  for (int k = 0; k < n; ++k) q(m + k, m + k) = tau * hdiag[k];
  for (int k : g.load_buses()) q(m + k, m + k) += g.load_at(k).capacitance;
  return q;
}

double lyapunov_v(const NetworkGraph& g, const SystemState& s, const StateDerivative& d,
                  double tau, double c_u) {
  if (d.di.size() != g.line_count() || d.dv.size() != g.bus_count() ||
      d.du.size() != g.source_count())
    throw std::invalid_argument("derivative vector length mismatch");
  // antisymmetric off-diagonal blocks drop out of the quadratic form
  double acc = 0.0;
  for (int a = 0; a < g.line_count(); ++a) {
    const auto& ln = g.line(a);
    acc += (tau * ln.resistance - ln.inductance) * d.di[a] * d.di[a];
  }
  const Eigen::VectorXd hdiag = co_content_hessian_diag(g, s.v);
  for (int k = 0; k < g.bus_count(); ++k) {
    double w = tau * hdiag[k];
    if (!g.is_source(k)) w += g.load_at(k).capacitance;
    acc += w * d.dv[k] * d.dv[k];
  }
  return acc + c_u * d.du.squaredNorm();
}

}  // namespace adhocgrid
