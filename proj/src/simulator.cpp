#include "gsp2p/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "gsp2p/errors.hpp"
#include "gsp2p/system_model.hpp"

namespace gsp2p {

namespace {

// Classic fixed-step RK4 over a time-invariant right-hand side.
template <typename Rhs>
void rk4_march(Eigen::VectorXd& state, double dt, const Rhs& rhs) {
  const Eigen::VectorXd k1 = rhs(state);
  const Eigen::VectorXd k2 = rhs(state + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = rhs(state + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = rhs(state + dt * k3);
  state += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_config(const SimulationConfig& cfg) {
  if (cfg.dt <= 0.0 || cfg.horizon <= 0.0)
    throw Error(ErrorCode::invalid_argument, "simulation step and horizon must be positive");
}

// Quadratic fit through three equally spaced samples around a discrete peak.
void parabolic_peak(double tm1, double t0, double tp1, double dt, double t_mid,
                    double* t_ref, double* v_ref) {
  const double denom = tm1 - 2.0 * t0 + tp1;
  if (std::abs(denom) < 1e-300) {
    *t_ref = t_mid;
    *v_ref = t0;
    return;
  }
  const double delta = 0.5 * (tm1 - tp1) / denom;
  *t_ref = t_mid + delta * dt;
  *v_ref = t0 - 0.25 * (tm1 - tp1) * delta;
}

}  // namespace

Trace simulate_aggregate(const AggregateModel& agg, const ControllerGain& gain,
                         double dpl_pu, const SimulationConfig& cfg) {
  check_config(cfg);
  const StateSpace ss = build_state_space(agg, gain);
  const Eigen::RowVector2d k(gain.k1, gain.k2);
  const Eigen::Matrix2d a_cl = ss.a + ss.b1 * k;
  const Eigen::Vector2d forcing = ss.e * dpl_pu;
  const double m_total = agg.m_g + gain.virtual_inertia();

  const auto rhs = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return a_cl * x.head<2>() + forcing;
  };

  const int steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
  Trace trace;
  trace.t.reserve(steps + 1);
  Eigen::VectorXd x(2);
  x << 0.0, dpl_pu / m_total;
  const double d_c = gain.virtual_damping();
  const double m_c = gain.virtual_inertia();
  for (int i = 0; i <= steps; ++i) {
    trace.t.push_back(i * cfg.dt);
    trace.omega.push_back(x(0));
    trace.omega_dot.push_back(x(1));
    trace.p_d.push_back(d_c * x(0));
    trace.p_m.push_back(m_c * x(1));
    trace.dp_c.push_back(trace.p_d.back() + trace.p_m.back());
    if (i < steps) rk4_march(x, cfg.dt, rhs);
  }
  return trace;
}

Trace simulate_full(const FleetDescription& fleet, const Commitment& commitment,
                    const std::vector<ConverterGain>& gains, double dpl_pu,
                    const SimulationConfig& cfg) {
  check_config(cfg);
  if (commitment.size() != fleet.sgs.size())
    throw Error(ErrorCode::invalid_argument, "commitment flags do not match the SG list");
  if (gains.size() != fleet.converters.size())
    throw Error(ErrorCode::invalid_argument, "converter gains do not match the converter list");

  struct SgState {
    double weight, kr, f, t;  // capacity weight, K/R on base, F, governor T
  };
  std::vector<SgState> sgs;
  double m_g = 0.0, d_g = 0.0;
  for (std::size_t i = 0; i < fleet.sgs.size(); ++i) {
    if (!commitment[i]) continue;
    const auto& g = fleet.sgs[i];
    const double w = g.rating_mw / fleet.p_base_mw;
    sgs.push_back({w, g.governor_gain / g.droop_pu * w, g.turbine_fraction,
                   g.governor_time_s});
    m_g += g.inertia_s * w;
    d_g += g.damping_pu * w;
  }
  if (sgs.empty()) throw Error(ErrorCode::invalid_argument, "empty fleet");

  struct CvState {
    double d_c, m_c, t_c;  // support gains (positive), response lag
  };
  std::vector<CvState> lagged, direct;
  for (std::size_t c = 0; c < fleet.converters.size(); ++c) {
    const CvState cs{-gains[c].k1, -gains[c].k2,
                     fleet.converters[c].time_constant_s};
    if (cs.t_c > 0.0)
      lagged.push_back(cs);
    else
      direct.push_back(cs);
  }
  double m_direct = 0.0, d_direct = 0.0;
  for (const auto& cv : direct) {
    m_direct += cv.m_c;
    d_direct += cv.d_c;
  }

  // State layout: [omega, z_i per SG, (q_d, q_m) per lagged converter].
  const int n_sg = static_cast<int>(sgs.size());
  const int n_lag = static_cast<int>(lagged.size());
  const int dim = 1 + n_sg + 2 * n_lag;

  const auto rhs = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd dx(dim);
    const double omega = x(0);
    double gov = 0.0;
    for (int i = 0; i < n_sg; ++i)
      gov += sgs[i].kr * (sgs[i].f * omega + x(1 + i));
    double lag_inject = 0.0;
    for (int l = 0; l < n_lag; ++l)
      lag_inject += x(1 + n_sg + 2 * l) + x(1 + n_sg + 2 * l + 1);
    // Direct converters close an algebraic loop through omega_dot.
    const double omega_dot = (dpl_pu - (d_g + d_direct) * omega - gov -
                              lag_inject) /
                             (m_g + m_direct);
    dx(0) = omega_dot;
    for (int i = 0; i < n_sg; ++i)
      dx(1 + i) = ((1.0 - sgs[i].f) * omega - x(1 + i)) / sgs[i].t;
    for (int l = 0; l < n_lag; ++l) {
      const auto& cv = lagged[l];
      dx(1 + n_sg + 2 * l) = (cv.d_c * omega - x(1 + n_sg + 2 * l)) / cv.t_c;
      dx(1 + n_sg + 2 * l + 1) =
          (cv.m_c * omega_dot - x(1 + n_sg + 2 * l + 1)) / cv.t_c;
    }
    return dx;
  };

  const int steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
  Trace trace;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  // Initial RoCoF carries only the instantaneous inertia (lagged converters
  // start at zero output).
  x(0) = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const Eigen::VectorXd dx = rhs(x);
    const double omega_dot = dx(0);
    double p_d = 0.0, p_m = 0.0;
    for (const auto& cv : direct) {
      p_d += cv.d_c * x(0);
      p_m += cv.m_c * omega_dot;
    }
    for (int l = 0; l < n_lag; ++l) {
      p_d += x(1 + n_sg + 2 * l);
      p_m += x(1 + n_sg + 2 * l + 1);
    }
    trace.t.push_back(i * cfg.dt);
    trace.omega.push_back(x(0));
    trace.omega_dot.push_back(omega_dot);
    trace.p_d.push_back(p_d);
    trace.p_m.push_back(p_m);
    trace.dp_c.push_back(p_d + p_m);
    if (i < steps) rk4_march(x, cfg.dt, rhs);
  }
  return trace;
}

TraceMetrics trace_metrics(const Trace& trace) {
  if (trace.t.empty())
    throw Error(ErrorCode::invalid_argument, "empty trace");
  TraceMetrics m;
  const std::size_t n = trace.t.size();
  std::size_t peak = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(trace.omega[i]) > std::abs(trace.omega[peak])) peak = i;
    m.max_rocof = std::max(m.max_rocof, std::abs(trace.omega_dot[i]));
    m.max_injection = std::max(m.max_injection, std::abs(trace.dp_c[i]));
  }
  if (peak > 0 && peak + 1 < n) {
    const double dt = trace.t[1] - trace.t[0];
    double t_ref = 0.0, v_ref = 0.0;
    parabolic_peak(trace.omega[peak - 1], trace.omega[peak],
                   trace.omega[peak + 1], dt, trace.t[peak], &t_ref, &v_ref);
    m.t_m = t_ref;
    m.nadir = std::abs(v_ref);
  } else {
    m.t_m = trace.t[peak];
    m.nadir = std::abs(trace.omega[peak]);
  }
  m.ss_deviation = trace.omega.back();
  return m;
}

double check_invariance(const Trace& trace, const Eigen::Matrix2d& p,
                        const CoordinateShift& shift, double dpl_pu) {
  if (trace.t.empty())
    throw Error(ErrorCode::invalid_argument, "empty trace");
  if (dpl_pu == 0.0) return 0.0;
  const Eigen::Matrix2d p_inv = p.inverse();
  double worst = 0.0;
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    const Eigen::Vector2d x_tilde(
        trace.omega[i] / dpl_pu - shift.x_vec(0),
        trace.omega_dot[i] / dpl_pu - shift.x_vec(1));
    worst = std::max(worst, x_tilde.dot(p_inv * x_tilde));
  }
  return worst;
}

void write_trace_csv(const Trace& trace, const std::string& path,
                     double p_base_mw, double f_base_hz) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot open " + path + " for writing");
  f << "t_s,omega_hz,rocof_hz_s,dp_c_mw,p_d_mw,p_m_mw\n";
  char line[256];
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.6f,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  trace.t[i], -trace.omega[i] * f_base_hz,
                  -trace.omega_dot[i] * f_base_hz, trace.dp_c[i] * p_base_mw,
                  trace.p_d[i] * p_base_mw, trace.p_m[i] * p_base_mw);
    f << line;
  }
  if (!f) throw Error(ErrorCode::io, "failed writing " + path);
}

}  // namespace gsp2p
