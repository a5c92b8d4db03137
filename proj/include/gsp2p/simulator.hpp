#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gsp2p/synthesis.hpp"
#include "gsp2p/types.hpp"

namespace gsp2p {

// Fixed-step integration keeps the oracle bit-deterministic.
struct SimulationConfig {
  double dt = 1e-3;      // s
  double horizon = 30.0; // s
};

// omega > 0 is a frequency drop of omega * f_base; dp_c is the injected
// support power D_c*omega + M_c*omega_dot, split into its damping (p_d) and
// inertia (p_m) shares.
struct Trace {
  std::vector<double> t;
  std::vector<double> omega;      // p.u.
  std::vector<double> omega_dot;  // p.u./s
  std::vector<double> dp_c;       // p.u.
  std::vector<double> p_d;        // p.u.
  std::vector<double> p_m;        // p.u.
};

struct TraceMetrics {
  double nadir = 0.0;          // max |omega|
  double t_m = 0.0;            // argmax time (parabolic sub-step refinement)
  double max_rocof = 0.0;      // max |omega_dot|
  double max_injection = 0.0;  // max |dp_c|
  double ss_deviation = 0.0;   // omega at the end of the horizon
};

// Integrates the 2-state closed loop under a constant step disturbance from
// x(0) = [0, dpl/M].
Trace simulate_aggregate(const AggregateModel& agg, const ControllerGain& gain,
                         double dpl_pu, const SimulationConfig& cfg);

// Per-converter gains (system-level per-unit; they sum to the system gain).
struct ConverterGain {
  double k1 = 0.0;
  double k2 = 0.0;
};

// Full multi-machine model: per-SG governor lags (no common-T assumption) and
// per-converter first-order response lags; t_c = 0 converters act as direct
// feedthrough.
Trace simulate_full(const FleetDescription& fleet, const Commitment& commitment,
                    const std::vector<ConverterGain>& gains, double dpl_pu,
                    const SimulationConfig& cfg);

TraceMetrics trace_metrics(const Trace& trace);

// max_t x~' P^-1 x~ over the trace in normalized coordinates; <= 1 + 1e-6
// certifies containment in the invariant ellipsoid.
double check_invariance(const Trace& trace, const Eigen::Matrix2d& p,
                        const CoordinateShift& shift, double dpl_pu);

// CSV columns: t_s, omega_hz (signed deviation, negative below nominal),
// rocof_hz_s, dp_c_mw, p_d_mw, p_m_mw.
void write_trace_csv(const Trace& trace, const std::string& path,
                     double p_base_mw, double f_base_hz);

}  // namespace gsp2p
