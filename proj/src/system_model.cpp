#include "gsp2p/system_model.hpp"

#include <cmath>

#include "gsp2p/errors.hpp"

namespace gsp2p {

namespace {

void require(bool cond, const std::string& msg,
             ErrorCode code = ErrorCode::invalid_argument) {
  if (!cond) throw Error(code, msg);
}

}  // namespace

void SyncGenerator::validate() const {
  require(inertia_s > 0.0, "SG " + id + ": inertia must be positive");
  require(governor_time_s > 0.0, "SG " + id + ": governor time must be positive");
  require(droop_pu > 0.0, "SG " + id + ": droop must be positive");
  require(turbine_fraction >= 0.0 && turbine_fraction <= 1.0,
          "SG " + id + ": turbine fraction outside [0, 1]");
  require(p_min_mw > 0.0 && p_min_mw <= p_max_mw && p_max_mw <= rating_mw,
          "SG " + id + ": requires 0 < p_min <= p_max <= rating");
}

void ConverterUnit::validate() const {
  require(rating_mw > 0.0, "converter " + id + ": rating must be positive");
  require(time_constant_s >= 0.0, "converter " + id + ": negative time constant");
  require(p_setpoint_mw >= 0.0 && p_setpoint_mw <= p_limit_mw &&
              p_limit_mw <= rating_mw,
          "converter " + id + ": requires 0 <= setpoint <= limit <= rating");
}

void FleetDescription::validate() const {
  require(p_base_mw > 0.0, "fleet: base power must be positive");
  require(f_base_hz > 0.0, "fleet: base frequency must be positive");
  require(disturbance_mw >= 0.0, "fleet: negative disturbance");
  require(!sgs.empty() || !converters.empty(), "fleet: no units");
  for (const auto& g : sgs) g.validate();
  for (const auto& c : converters) c.validate();
}

AggregateModel aggregate_fleet(const FleetDescription& fleet,
                               const Commitment& commitment) {
  require(commitment.size() == fleet.sgs.size(),
          "commitment flags do not match the SG list");
  require(fleet.p_base_mw > 0.0, "fleet: base power must be positive");

  AggregateModel agg;
  double committed_mw = 0.0;
  double t_weighted = 0.0;
  for (std::size_t i = 0; i < fleet.sgs.size(); ++i) {
    if (!commitment[i]) continue;
    const auto& g = fleet.sgs[i];
    const double w = g.rating_mw / fleet.p_base_mw;
    agg.m_g += g.inertia_s * w;
    agg.d_g += g.damping_pu * w;
    agg.f_g += g.governor_gain * g.turbine_fraction / g.droop_pu * w;
    agg.r_g += g.governor_gain / g.droop_pu * w;
    t_weighted += g.governor_time_s * g.rating_mw;
    committed_mw += g.rating_mw;
  }
  if (committed_mw <= 0.0) throw Error(ErrorCode::invalid_argument, "empty fleet");
  agg.t = t_weighted / committed_mw;
  if (agg.r_g <= agg.f_g)
    throw Error(ErrorCode::numeric, "invalid governor aggregate");
  return agg;
}

ClosedLoopParams closed_loop_params(const AggregateModel& agg, double m_c,
                                    double d_c) {
  ClosedLoopParams p;
  p.m = agg.m_g + m_c;
  p.d = agg.d_g + d_c;
  require(p.m > 0.0, "nonphysical inertia", ErrorCode::numeric);
  if (p.d + agg.r_g <= 0.0)
    throw Error(ErrorCode::numeric, "degenerate fleet: zero damping and droop");
  p.omega_n = std::sqrt((p.d + agg.r_g) / (p.m * agg.t));
  p.zeta = (p.m + agg.t * (p.d + agg.f_g)) /
           (2.0 * std::sqrt(p.m * agg.t * (p.d + agg.r_g)));
  if (p.zeta >= 1.0) throw Error(ErrorCode::numeric, "overdamped regime");
  p.omega_d = p.omega_n * std::sqrt(1.0 - p.zeta * p.zeta);
  p.phi = std::asin(std::sqrt(1.0 - p.zeta * p.zeta));
  return p;
}

double nadir_time(const ClosedLoopParams& p, double t_gov) {
  // atan2 lands in (0, pi) for omega_d > 0, which is exactly the first
  // positive stationary point regardless of the sign of zeta*w_n - 1/T.
  return std::atan2(p.omega_d, p.zeta * p.omega_n - 1.0 / t_gov) / p.omega_d;
}

double analytic_nadir(const ClosedLoopParams& p, const AggregateModel& agg,
                      double dpl) {
  if (agg.r_g <= agg.f_g)
    throw Error(ErrorCode::numeric, "invalid governor aggregate");
  const double t_m = nadir_time(p, agg.t);
  return dpl / (p.d + agg.r_g) *
         (1.0 + std::sqrt(agg.t * (agg.r_g - agg.f_g) / p.m) *
                    std::exp(-p.zeta * p.omega_n * t_m));
}

double max_rocof(const ClosedLoopParams& p, double dpl) { return dpl / p.m; }

double steady_state_deviation(const ClosedLoopParams& p,
                              const AggregateModel& agg, double dpl) {
  if (p.d + agg.r_g <= 0.0)
    throw Error(ErrorCode::numeric, "degenerate fleet: zero damping and droop");
  return dpl / (p.d + agg.r_g);
}

double frequency_response(const ClosedLoopParams& p, const AggregateModel& agg,
                          double dpl, double t) {
  const double settle = dpl / (p.m * agg.t * p.omega_n * p.omega_n);
  const double swing =
      dpl / (p.m * p.omega_d) * std::exp(-p.zeta * p.omega_n * t) *
      (std::sin(p.omega_d * t) -
       std::sin(p.omega_d * t + p.phi) / (p.omega_n * agg.t));
  return settle + swing;
}

}  // namespace gsp2p
