#include "adhocgrid/controllers.hpp"

#include <stdexcept>

namespace adhocgrid {

Eigen::VectorXd source_power(const NetworkGraph& g, const Eigen::VectorXd& v,
                             const Eigen::VectorXd& i) {
  const Eigen::VectorXd inj = incidence_transpose_apply(g, i);
  Eigen::VectorXd p(g.source_count());
  for (int j = 0; j < g.source_count(); ++j) {
    const int k = g.source_buses()[j];
    p[j] = v[k] * inj[k];
  }
  return p;
}

SourceMeasurements measure_sources(const NetworkGraph& g, const Eigen::VectorXd& v,
                                   const Eigen::VectorXd& i) {
  SourceMeasurements m;
  m.powers = source_power(g, v, i);
  m.voltages.resize(g.source_count());
  for (int j = 0; j < g.source_count(); ++j) m.voltages[j] = v[g.source_buses()[j]];
  if (g.source_count() > 0) {
    m.v_mean = m.voltages.mean();
    m.p_mean = m.powers.mean();
  }
  return m;
}

Eigen::VectorXd sharing_weights(const ControllerKind& kind, int source_count) {
  if (const auto* mp = std::get_if<Multipurpose>(&kind)) {
    if (mp->lambda.size() == source_count) return mp->lambda;
    if (mp->lambda.size() != 0)
      throw std::invalid_argument("lambda must have one entry per source");
  }
  return Eigen::VectorXd::Ones(source_count);
}

Eigen::VectorXd control_derivative(const ControllerKind& kind, const NetworkGraph& g,
                                   const SourceMeasurements& meas, double v_ref) {
  const int ns = g.source_count();
  if (const auto* unc = std::get_if<Uncoordinated>(&kind)) {
    Eigen::VectorXd du(ns);
    for (int j = 0; j < ns; ++j) {
      const double r = g.source_at(g.source_buses()[j]).droop_resistance;
      du[j] = (v_ref - meas.voltages[j]) / (unc->c_u * r);
    }
    return du;
  }
  if (const auto* mp = std::get_if<Multipurpose>(&kind)) {
    const Eigen::VectorXd lambda = sharing_weights(kind, ns);
    Eigen::VectorXd du(ns);
    for (int j = 0; j < ns; ++j)
      du[j] = mp->k_v * (v_ref - meas.v_mean) +
              mp->k_lambda * (lambda[j] * meas.p_mean - meas.powers[j]);
    return du;
  }
  throw std::invalid_argument("control_derivative: controller kind has no setpoint dynamics");
}

Eigen::VectorXd control_setpoint(const ControllerKind& kind, const NetworkGraph& g,
                                 const SourceMeasurements& meas, double integrator_state,
                                 double v_ref) {
  const int ns = g.source_count();
  if (std::holds_alternative<DroopOnly>(kind)) {
    Eigen::VectorXd u(ns);
    for (int j = 0; j < ns; ++j) u[j] = g.source_at(g.source_buses()[j]).initial_setpoint;
    return u;
  }
  if (const auto* ss = std::get_if<StandardSecondary>(&kind)) {
    const double u =
        v_ref + ss->k_p * (v_ref - meas.v_mean) + ss->k_i * integrator_state;
    return Eigen::VectorXd::Constant(ns, u);
  }
  throw std::invalid_argument("control_setpoint: controller kind is not algebraic");
}

SteadyStateTargets steady_state_targets(const ControllerKind& kind) {
  if (std::holds_alternative<Multipurpose>(kind))
    return {Exactness::Exact, Exactness::Exact};  // sharing ratios and mean voltage
  if (std::holds_alternative<StandardSecondary>(kind))
    return {Exactness::Approximate, Exactness::Exact};  // mean voltage only
  if (std::holds_alternative<Uncoordinated>(kind))
    return {Exactness::Approximate, Exactness::Exact};  // every source voltage restored
  return {Exactness::Approximate, Exactness::Approximate};  // droop leaves both offset
}

}  // namespace adhocgrid
