#include "adhocgrid/load_flow.hpp"

#include <functional>
#include <numeric>
#include <stdexcept>

namespace adhocgrid {

Eigen::MatrixXd weighted_laplacian(const NetworkGraph& g) {
  const int n = g.bus_count();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < g.line_count(); ++a) {
    const auto& ln = g.line(a);
    const double w = 1.0 / ln.resistance;
    lap(ln.source_bus, ln.source_bus) += w;
    lap(ln.target_bus, ln.target_bus) += w;
    lap(ln.source_bus, ln.target_bus) -= w;
    lap(ln.target_bus, ln.source_bus) -= w;
  }
  return lap;
}

namespace {

double default_tolerance(const NetworkGraph& g) {
  double p_sigma = 0.0;
  for (int k : g.load_buses()) p_sigma += g.load_at(k).power;
  return std::max(1e-10 * p_sigma, 1e-9);
}

Eigen::VectorXd line_currents(const NetworkGraph& g, const Eigen::VectorXd& v) {
  Eigen::VectorXd i = incidence_apply(g, v);
  for (int a = 0; a < g.line_count(); ++a) i[a] /= g.line(a).resistance;
  return i;
}

using ResidualFn = std::function<double(int bus, const Eigen::VectorXd& v, const Eigen::VectorXd& lv)>;
using JacRowFn = std::function<void(int bus, const Eigen::VectorXd& v, const Eigen::VectorXd& lv,
                                    Eigen::RowVectorXd& row)>;

// Damped Newton over the listed unknown buses; other entries of v stay fixed.
// Steps are halved while they would push a load voltage under v_floor.
EquilibriumSolution newton_solve(const NetworkGraph& g, const Eigen::MatrixXd& lap,
                                 const std::vector<int>& unknowns, Eigen::VectorXd v,
                                 double v_floor, double tolerance, int max_iter,
                                 const ResidualFn& residual, const JacRowFn& jac_row) {
  EquilibriumSolution sol;
  const int nu = static_cast<int>(unknowns.size());
  Eigen::VectorXd f(nu);
  Eigen::MatrixXd jac(nu, nu);
  Eigen::RowVectorXd full_row(g.bus_count());

  for (int it = 0; it <= max_iter; ++it) {
    const Eigen::VectorXd lv = lap * v;
    for (int j = 0; j < nu; ++j) f[j] = residual(unknowns[j], v, lv);
    sol.iterations = it;
    sol.residual_norm = nu == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
    if (sol.residual_norm <= tolerance) {
      sol.converged = true;
      break;
    }
    if (it == max_iter) {
      sol.failure_reason = "did not converge within iteration budget";
      break;
    }
    for (int j = 0; j < nu; ++j) {
      jac_row(unknowns[j], v, lv, full_row);
      for (int c = 0; c < nu; ++c) jac(j, c) = full_row[unknowns[c]];
    }
    const Eigen::VectorXd step = Eigen::PartialPivLU<Eigen::MatrixXd>(jac).solve(-f);
    if (!step.allFinite()) {
      sol.failure_reason = "singular Jacobian";
      break;
    }
    double alpha = 1.0;
    while (alpha > 1e-12) {
      bool ok = true;
      for (int j = 0; j < nu; ++j) {
        const int k = unknowns[j];
        if (!g.is_source(k) && v[k] + alpha * step[j] < v_floor) {
          ok = false;
          break;
        }
      }
      if (ok) break;
      alpha *= 0.5;
    }
    if (alpha <= 1e-12) {
      sol.failure_reason = "step damping stalled at the voltage floor";
      break;
    }
    for (int j = 0; j < nu; ++j) v[unknowns[j]] += alpha * step[j];
  }

  sol.v_star = v;
  sol.i_star = line_currents(g, v);
  return sol;
}

}  // namespace

EquilibriumSolution solve_equilibrium(const NetworkGraph& g, double v_ref, double tolerance,
                                      int max_iter) {
  if (tolerance <= 0.0) tolerance = default_tolerance(g);
  const Eigen::MatrixXd lap = weighted_laplacian(g);
  return newton_solve(
      g, lap, g.load_buses(), Eigen::VectorXd::Constant(g.bus_count(), v_ref), 0.01 * v_ref,
      tolerance, max_iter,
      [&](int k, const Eigen::VectorXd& v, const Eigen::VectorXd& lv) {
        return g.load_at(k).power + v[k] * lv[k];
      },
      [&](int k, const Eigen::VectorXd& v, const Eigen::VectorXd& lv, Eigen::RowVectorXd& row) {
        row = v[k] * lap.row(k);
        row[k] += lv[k];
      });
}

EquilibriumSolution solve_droop_equilibrium(const NetworkGraph& g, const Eigen::VectorXd& u,
                                            double tolerance, int max_iter) {
  if (u.size() != g.source_count())
    throw std::invalid_argument("setpoint vector must have one entry per source");
  if (tolerance <= 0.0) tolerance = default_tolerance(g);
  const Eigen::MatrixXd lap = weighted_laplacian(g);

  Eigen::VectorXd u_bus = Eigen::VectorXd::Zero(g.bus_count());
  for (int j = 0; j < g.source_count(); ++j) u_bus[g.source_buses()[j]] = u[j];
  const double u_mean = g.source_count() > 0 ? u.mean() : 0.0;

  std::vector<int> unknowns(g.bus_count());
  std::iota(unknowns.begin(), unknowns.end(), 0);

  return newton_solve(
      g, lap, unknowns, Eigen::VectorXd::Constant(g.bus_count(), u_mean), 0.01 * u_mean,
      tolerance, max_iter,
      [&](int k, const Eigen::VectorXd& v, const Eigen::VectorXd& lv) {
        if (g.is_source(k)) return v[k] + g.source_at(k).droop_resistance * lv[k] - u_bus[k];
        return g.load_at(k).power + v[k] * lv[k];
      },
      [&](int k, const Eigen::VectorXd& v, const Eigen::VectorXd& lv, Eigen::RowVectorXd& row) {
        if (g.is_source(k)) {
          row = g.source_at(k).droop_resistance * lap.row(k);
          row[k] += 1.0;
        } else {
          row = v[k] * lap.row(k);
          row[k] += lv[k];
        }
      });
}

EffectiveImpedance effective_impedance(const NetworkGraph& g) {
  if (g.load_count() == 0) throw std::invalid_argument("effective impedance needs a load bus");
  const Eigen::MatrixXd lap = weighted_laplacian(g);
  const auto& loads = g.load_buses();
  const int nl = g.load_count();
  Eigen::MatrixXd block(nl, nl);
  for (int a = 0; a < nl; ++a)
    for (int b = 0; b < nl; ++b) block(a, b) = lap(loads[a], loads[b]);

  EffectiveImpedance eff;
  eff.z = block.inverse();
  for (int a = 0; a < nl; ++a) {
    eff.z_inf_star = std::max(eff.z_inf_star, eff.z(a, a));
    eff.z_row_sum_norm = std::max(eff.z_row_sum_norm, eff.z.row(a).cwiseAbs().sum());
  }
  return eff;
}

MinVoltageReport check_min_voltage(const NetworkGraph& g, const EquilibriumSolution& sol,
                                   double v_min) {
  MinVoltageReport rep;
  if (g.load_count() == 0) {
    rep.pass = true;
    return rep;
  }
  rep.min_voltage = std::numeric_limits<double>::infinity();
  for (int k : g.load_buses()) {
    if (sol.v_star[k] < rep.min_voltage) {
      rep.min_voltage = sol.v_star[k];
      rep.worst_bus = k;
    }
  }
  rep.pass = rep.min_voltage > v_min;
  return rep;
}

}  // namespace adhocgrid
