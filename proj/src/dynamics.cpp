#include "adhocgrid/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adhocgrid {

namespace {

struct CplCollapse {
  int bus;
};

// Source-eliminated model with the controller state appended to (i, v_load).
class ReducedModel {
 public:
  ReducedModel(const NetworkGraph& g, const ControllerKind& kind, double v_ref)
      : g_(g), kind_(kind), v_ref_(v_ref) {
    m_ = g.line_count();
    nl_ = g.load_count();
    ns_ = g.source_count();
    if (std::holds_alternative<Uncoordinated>(kind) || std::holds_alternative<Multipurpose>(kind))
      ctrl_dim_ = ns_;
    else if (std::holds_alternative<StandardSecondary>(kind))
      ctrl_dim_ = 1;
    else
      ctrl_dim_ = 0;
    u_fixed_.resize(ns_);
    for (int j = 0; j < ns_; ++j)
      u_fixed_[j] = g.source_at(g.source_buses()[j]).initial_setpoint;
    p_current_ = g.load_powers();
  }

  int size() const { return m_ + nl_ + ctrl_dim_; }
  int ctrl_dim() const { return ctrl_dim_; }
  const Eigen::VectorXd& load_powers() const { return p_current_; }
  void set_load_power(int load_index, double p) { p_current_[load_index] = p; }

  Eigen::VectorXd pack(const SystemState& s, double integrator = 0.0) const {
    Eigen::VectorXd y(size());
    y.head(m_) = s.i;
    for (int j = 0; j < nl_; ++j) y[m_ + j] = s.v[g_.load_buses()[j]];
    if (std::holds_alternative<StandardSecondary>(kind_)) {
      if (ctrl_dim_ == 1) y[m_ + nl_] = integrator;
    } else if (ctrl_dim_ == ns_) {
      y.tail(ns_) = s.u;
    }
    return y;
  }

  // Setpoints for the packed state. The shared PI setpoint solves the loop
  // u = v_ref + k_p (v_ref - v_mean) + k_i xi with v_mean = u - mean r (D^T i):
  //   u = v_ref + (k_p d + k_i xi) / (1 + k_p),  d = mean_j r_j (D^T i)_j.
  Eigen::VectorXd setpoints(const Eigen::VectorXd& y, const Eigen::VectorXd& inj) const {
    if (const auto* ss = std::get_if<StandardSecondary>(&kind_)) {
      double d = 0.0;
      for (int j = 0; j < ns_; ++j)
        d += g_.source_at(g_.source_buses()[j]).droop_resistance * inj[g_.source_buses()[j]];
      d /= std::max(1, ns_);
      const double u = v_ref_ + (ss->k_p * d + ss->k_i * y[m_ + nl_]) / (1.0 + ss->k_p);
      return Eigen::VectorXd::Constant(ns_, u);
    }
    if (ctrl_dim_ == ns_) return y.tail(ns_);
    return u_fixed_;
  }

  SystemState unpack(const Eigen::VectorXd& y) const {
    SystemState s;
    s.i = y.head(m_);
    const Eigen::VectorXd inj = incidence_transpose_apply(g_, s.i);
    s.u = setpoints(y, inj);
    s.v.resize(g_.bus_count());
    for (int j = 0; j < nl_; ++j) s.v[g_.load_buses()[j]] = y[m_ + j];
    for (int j = 0; j < ns_; ++j) {
      const int k = g_.source_buses()[j];
      s.v[k] = s.u[j] - g_.source_at(k).droop_resistance * inj[k];
    }
    return s;
  }

  void rhs(const Eigen::VectorXd& y, Eigen::VectorXd& dy) const {
    const SystemState s = unpack(y);
    for (int j = 0; j < nl_; ++j) {
      const int k = g_.load_buses()[j];
      if (s.v[k] <= 0.0 && p_current_[j] != 0.0) throw CplCollapse{k};
    }
    const Eigen::VectorXd dv_lines = incidence_apply(g_, s.v);
    const Eigen::VectorXd inj = incidence_transpose_apply(g_, s.i);
    dy.resize(size());
    for (int a = 0; a < m_; ++a) {
      const auto& ln = g_.line(a);
      dy[a] = (-ln.resistance * s.i[a] + dv_lines[a]) / ln.inductance;
    }
    for (int j = 0; j < nl_; ++j) {
      const int k = g_.load_buses()[j];
      dy[m_ + j] = (-p_current_[j] / s.v[k] - inj[k]) / g_.load_at(k).capacitance;
    }
    if (ctrl_dim_ == 0) return;
    if (std::holds_alternative<StandardSecondary>(kind_)) {
      double v_mean = 0.0;
      for (int k : g_.source_buses()) v_mean += s.v[k];
      v_mean /= std::max(1, ns_);
      dy[m_ + nl_] = v_ref_ - v_mean;
      return;
    }
    const SourceMeasurements meas = measure_sources(g_, s.v, s.i);
    dy.tail(ns_) = control_derivative(kind_, g_, meas, v_ref_);
  }

  // Full derivative for diagnostics: source dv from the algebraic limit
  // dv_k = du_k - r_k (D^T di)_k, and du for the shared PI setpoint by the
  // chain rule of the closed form above.
  StateDerivative full_derivative(const Eigen::VectorXd& y, const Eigen::VectorXd& dy) const {
    StateDerivative d;
    d.di = dy.head(m_);
    d.du = Eigen::VectorXd::Zero(ns_);
    if (const auto* ss = std::get_if<StandardSecondary>(&kind_)) {
      const Eigen::VectorXd dinj = incidence_transpose_apply(g_, d.di);
      double dd = 0.0;
      for (int j = 0; j < ns_; ++j)
        dd += g_.source_at(g_.source_buses()[j]).droop_resistance * dinj[g_.source_buses()[j]];
      dd /= std::max(1, ns_);
      d.du.setConstant((ss->k_p * dd + ss->k_i * dy[m_ + nl_]) / (1.0 + ss->k_p));
    } else if (ctrl_dim_ == ns_) {
      d.du = dy.tail(ns_);
    }
    d.dv.resize(g_.bus_count());
    for (int j = 0; j < nl_; ++j) d.dv[g_.load_buses()[j]] = dy[m_ + j];
    const Eigen::VectorXd dinj = incidence_transpose_apply(g_, d.di);
    for (int j = 0; j < ns_; ++j) {
      const int k = g_.source_buses()[j];
      d.dv[k] = d.du[j] - g_.source_at(k).droop_resistance * dinj[k];
    }
    return d;
  }

  // Global bus id of a powered load pinned near zero volts, -1 when none.
  // Step-size underflow with such a load is the finite-time collapse, not a
  // generic stiffness failure.
  int collapsing_load(const Eigen::VectorXd& y) const {
    for (int j = 0; j < nl_; ++j)
      if (p_current_[j] != 0.0 && y[m_ + j] < 0.05 * v_ref_) return g_.load_buses()[j];
    return -1;
  }

  const NetworkGraph& graph() const { return g_; }
  const ControllerKind& kind() const { return kind_; }

 private:
  const NetworkGraph& g_;
  ControllerKind kind_;
  double v_ref_;
  int m_ = 0, nl_ = 0, ns_ = 0, ctrl_dim_ = 0;
  Eigen::VectorXd u_fixed_;
  Eigen::VectorXd p_current_;
};

// Dormand-Prince 5(4) embedded pair, advanced on the 5th-order solution.
struct Dopri5 {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                          e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;
};

}  // namespace

ReducedDerivative reduced_rhs(const NetworkGraph& g, const ControllerKind& kind,
                              const Eigen::VectorXd& i, const Eigen::VectorXd& v_load,
                              const Eigen::VectorXd& u, const Eigen::VectorXd& p_current,
                              double v_ref) {
  if (i.size() != g.line_count() || v_load.size() != g.load_count() ||
      u.size() != g.source_count() || p_current.size() != g.load_count())
    throw std::invalid_argument("reduced_rhs: vector length mismatch");

  const Eigen::VectorXd inj = incidence_transpose_apply(g, i);
  SystemState s;
  s.i = i;
  s.u = u;
  s.v.resize(g.bus_count());
  for (int j = 0; j < g.load_count(); ++j) s.v[g.load_buses()[j]] = v_load[j];
  for (int j = 0; j < g.source_count(); ++j) {
    const int k = g.source_buses()[j];
    s.v[k] = u[j] - g.source_at(k).droop_resistance * inj[k];
  }

  ReducedDerivative d;
  const Eigen::VectorXd dv_lines = incidence_apply(g, s.v);
  d.di.resize(g.line_count());
  for (int a = 0; a < g.line_count(); ++a) {
    const auto& ln = g.line(a);
    d.di[a] = (-ln.resistance * i[a] + dv_lines[a]) / ln.inductance;
  }
  d.dv_load.resize(g.load_count());
  for (int j = 0; j < g.load_count(); ++j) {
    const int k = g.load_buses()[j];
    if (v_load[j] <= 0.0 && p_current[j] != 0.0)
      throw std::domain_error("reduced_rhs: collapsed load voltage at bus " + std::to_string(k));
    d.dv_load[j] = (-p_current[j] / v_load[j] - inj[k]) / g.load_at(k).capacitance;
  }
  if (std::holds_alternative<Uncoordinated>(kind) || std::holds_alternative<Multipurpose>(kind)) {
    d.du = control_derivative(kind, g, measure_sources(g, s.v, s.i), v_ref);
  } else {
    d.du = Eigen::VectorXd::Zero(g.source_count());
  }
  return d;
}

SystemState default_initial_state(const NetworkGraph& g, const SimConfig& cfg) {
  SystemState s;
  s.u.resize(g.source_count());
  for (int j = 0; j < g.source_count(); ++j)
    s.u[j] = g.source_at(g.source_buses()[j]).initial_setpoint;
  if (cfg.cold_start) {
    s.v = Eigen::VectorXd::Constant(g.bus_count(), cfg.v_ref);
    s.i = Eigen::VectorXd::Zero(g.line_count());
    return s;
  }
  const EquilibriumSolution rest = solve_droop_equilibrium(g, s.u);
  if (!rest.converged)
    throw std::runtime_error("initial droop load flow failed: " + rest.failure_reason);
  s.v = rest.v_star;
  s.i = rest.i_star;
  return s;
}

Trajectory simulate(const NetworkGraph& g, const ControllerKind& kind,
                    const std::vector<Event>& events, const SimConfig& cfg,
                    const std::optional<SystemState>& initial) {
  for (const auto& ev : events) {
    if (ev.bus < 0 || ev.bus >= g.bus_count() || g.is_source(ev.bus))
      throw std::invalid_argument("event target is not a load bus");
    if (ev.time < 0.0 || ev.time > cfg.t_end)
      throw std::invalid_argument("event time outside the run");
  }

  ReducedModel model(g, kind, cfg.v_ref);
  Trajectory traj;
  traj.v_ref = cfg.v_ref;
  traj.lambda = sharing_weights(kind, g.source_count());
  const double c_u_diag =
      std::holds_alternative<Uncoordinated>(kind) ? std::get<Uncoordinated>(kind).c_u : 1.0;

  const SystemState init = initial ? *initial : default_initial_state(g, cfg);
  Eigen::VectorXd y = model.pack(init);

  // map global bus -> load index once
  std::vector<int> load_index(g.bus_count(), -1);
  for (int j = 0; j < g.load_count(); ++j) load_index[g.load_buses()[j]] = j;

  // stop points: sample grid, event times, t_end
  std::vector<double> stops;
  const int n_samples = static_cast<int>(std::ceil(cfg.t_end / cfg.sample_interval - 1e-9));
  for (int j = 1; j <= n_samples; ++j) stops.push_back(std::min(j * cfg.sample_interval, cfg.t_end));
  for (const auto& ev : events)
    if (ev.time > 0.0) stops.push_back(ev.time);
  stops.push_back(cfg.t_end);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-15; }),
              stops.end());

  const double tau = tau_max(g);
  double tau_min = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.line_count(); ++a) tau_min = std::min(tau_min, g.tau(a));

  auto snapshot = g.with_load_powers(model.load_powers());
  auto record = [&](double t) {
    Eigen::VectorXd dy;
    model.rhs(y, dy);
    traj.stats.rhs_evals++;
    TrajectorySample sample;
    sample.t = t;
    sample.state = model.unpack(y);
    const StateDerivative deriv = model.full_derivative(y, dy);
    const SourceMeasurements meas = measure_sources(g, sample.state.v, sample.state.i);
    sample.source_power = meas.powers;
    sample.v_mean = meas.v_mean;
    sample.p_mean = meas.p_mean;
    sample.lyapunov = lyapunov_v(snapshot, sample.state, deriv, tau, c_u_diag);
    sample.bm_potential = bm_potential_p(snapshot, sample.state, deriv, cfg.v_ref, tau);
    traj.samples.push_back(std::move(sample));
  };

  auto is_sample_time = [&](double t) {
    const double q = t / cfg.sample_interval;
    return std::abs(q - std::round(q)) < 1e-9 || std::abs(t - cfg.t_end) < 1e-15;
  };

  double t = 0.0;
  double h = std::min(tau_min / 100.0, cfg.max_step);
  Eigen::VectorXd k1(model.size()), k2, k3, k4, k5, k6, k7, y5(model.size()), y4(model.size()),
      ytmp(model.size());
  bool have_k1 = false;

  std::vector<Event> evs = events;
  std::sort(evs.begin(), evs.end(),
            [](const Event& a, const Event& b) { return a.time < b.time; });
  std::size_t next_event = 0;
  while (next_event < evs.size() && evs[next_event].time <= 0.0) {
    model.set_load_power(load_index[evs[next_event].bus], evs[next_event].power);
    ++next_event;
  }
  snapshot = g.with_load_powers(model.load_powers());

  try {
    record(0.0);

    for (double target : stops) {
      while (t < target - 1e-15 * std::max(1.0, target)) {
        if (!have_k1) {
          model.rhs(y, k1);
          traj.stats.rhs_evals++;
          have_k1 = true;
        }
        double step = std::min({h, cfg.max_step, target - t});
        bool accepted = false;
        while (!accepted) {
          if (step < 1e-15) {
            const int bus = model.collapsing_load(y);
            if (bus >= 0) throw CplCollapse{bus};
            throw std::runtime_error("step size underflow");
          }
          bool collapse_in_stage = false;
          double err = 0.0;
          try {
            using D = Dopri5;
            ytmp = y + step * (D::a21 * k1);
            model.rhs(ytmp, k2);
            ytmp = y + step * (D::a31 * k1 + D::a32 * k2);
            model.rhs(ytmp, k3);
            ytmp = y + step * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3);
            model.rhs(ytmp, k4);
            ytmp = y + step * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4);
            model.rhs(ytmp, k5);
            ytmp = y + step * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 + D::a65 * k5);
            model.rhs(ytmp, k6);
            y5 = y + step * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
            model.rhs(y5, k7);
            traj.stats.rhs_evals += 6;
            y4 = y + step * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 +
                             D::e7 * k7);
            double acc = 0.0;
            for (int c = 0; c < model.size(); ++c) {
              const double scale =
                  cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[c]), std::abs(y5[c]));
              const double e = (y5[c] - y4[c]) / scale;
              acc += e * e;
            }
            err = std::sqrt(acc / model.size());
          } catch (const CplCollapse&) {
            collapse_in_stage = true;
          }
          if (!collapse_in_stage && err <= 1.0) {
            accepted = true;
            t += step;
            y = y5;
            k1 = k7;  // first-same-as-last
            traj.stats.accepted++;
            const double grow = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
            h = step * std::min(5.0, std::max(0.2, grow));
          } else {
            traj.stats.rejected++;
            if (collapse_in_stage) {
              step *= 0.5;
              if (step < 1e-15) {
                throw CplCollapse{-1};
              }
            } else {
              step *= std::min(0.9, std::max(0.2, 0.9 * std::pow(err, -0.2)));
            }
          }
        }
      }
      t = target;

      if (is_sample_time(t)) record(t);
      bool switched = false;
      while (next_event < evs.size() && evs[next_event].time <= t + 1e-15) {
        model.set_load_power(load_index[evs[next_event].bus], evs[next_event].power);
        ++next_event;
        switched = true;
      }
      if (switched) {
        have_k1 = false;  // load powers changed under the cached stage
        snapshot = g.with_load_powers(model.load_powers());
      }
    }
    traj.completed = true;
  } catch (const CplCollapse& c) {
    traj.abort_reason = "constant-power load collapse near t = " + std::to_string(t) +
                        (c.bus >= 0 ? " s at bus " + std::to_string(c.bus) : " s");
  } catch (const std::runtime_error& e) {
    traj.abort_reason = std::string(e.what()) + " near t = " + std::to_string(t) + " s";
  }
  return traj;
}

ConsistencyReport equilibrium_consistency(const NetworkGraph& g, const Trajectory& traj,
                                          const EquilibriumSolution& sol, double v_ref,
                                          double settle_tol, double match_tol) {
  if (traj.samples.empty()) throw std::invalid_argument("empty trajectory");
  ConsistencyReport rep;
  const TrajectorySample& last = traj.samples.back();

  // g must carry the load powers in force at the end of the run
  const Eigen::VectorXd p_now = g.load_powers();
  Eigen::VectorXd v_load(g.load_count());
  for (int j = 0; j < g.load_count(); ++j) v_load[j] = last.state.v[g.load_buses()[j]];
  ControllerKind probe = Uncoordinated{1.0};  // derivative magnitudes of the electrical part
  const ReducedDerivative d =
      reduced_rhs(g, probe, last.state.i, v_load, last.state.u, p_now, v_ref);
  rep.max_derivative = std::max({d.di.cwiseAbs().maxCoeff(), d.dv_load.cwiseAbs().maxCoeff()});
  rep.settled = rep.max_derivative <= settle_tol;

  for (int k : g.load_buses()) {
    const double rel = std::abs(last.state.v[k] - sol.v_star[k]) / std::abs(sol.v_star[k]);
    rep.max_load_mismatch = std::max(rep.max_load_mismatch, rel);
  }
  rep.v_mean_error = std::abs(last.v_mean - v_ref);
  rep.pass = rep.settled && rep.max_load_mismatch <= match_tol &&
             rep.v_mean_error <= match_tol * v_ref;
  return rep;
}

SteadyStateMetrics steady_state_metrics(const Trajectory& traj, double window) {
  if (traj.samples.empty()) throw std::invalid_argument("empty trajectory");
  SteadyStateMetrics m;
  const double t_last = traj.samples.back().t;
  for (const auto& s : traj.samples) {
    if (s.t < t_last - window - 1e-12) continue;
    if (traj.lambda.size() > 0) {
      if (s.p_mean <= 0.0)
        throw std::domain_error("sharing metric undefined: mean source power <= 0 in window");
      double worst = 0.0;
      for (int j = 0; j < traj.lambda.size(); ++j)
        worst = std::max(worst, std::abs(s.source_power[j] - traj.lambda[j] * s.p_mean));
      m.sharing_error += worst / s.p_mean;
    }
    m.voltage_error += std::abs(s.v_mean - traj.v_ref);
    m.samples++;
  }
  if (m.samples > 0) {
    m.sharing_error /= m.samples;
    m.voltage_error /= m.samples;
  }
  return m;
}

}  // namespace adhocgrid
