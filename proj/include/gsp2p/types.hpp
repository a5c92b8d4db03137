#pragma once

#include <string>
#include <vector>

namespace gsp2p {

// Synchronous generator: dynamic parameters are per-unit on the machine
// rating; aggregation normalizes them onto the system base.
struct SyncGenerator {
  std::string id;
  double inertia_s = 0.0;          // m_i, seconds
  double damping_pu = 0.0;         // d_i
  double governor_gain = 1.0;      // k_i (K_g)
  double turbine_fraction = 0.0;   // f_i (F_g), in [0, 1]
  double droop_pu = 0.05;          // r_i (R_g)
  double governor_time_s = 8.0;    // t_i, seconds
  double rating_mw = 0.0;
  double cost_noload = 0.0;        // currency/h
  double cost_marginal = 0.0;      // currency/MWh
  double cost_startup = 0.0;       // currency
  double p_min_mw = 0.0;
  double p_max_mw = 0.0;

  void validate() const;
};

// Grid-forming converter (IBR). Gains are assigned at dispatch time, not here.
struct ConverterUnit {
  std::string id;
  double rating_mw = 0.0;
  double time_constant_s = 0.0;    // t_c; 0 means direct feedthrough
  double p_limit_mw = 0.0;         // maximum injectable power
  double p_setpoint_mw = 0.0;      // scheduled output

  void validate() const;
};

struct FleetDescription {
  std::vector<SyncGenerator> sgs;
  std::vector<ConverterUnit> converters;
  double p_base_mw = 0.0;
  double f_base_hz = 50.0;
  double disturbance_mw = 0.0;     // step loss ΔP_L

  void validate() const;
};

// Commitment flags, one per SG, aligned with FleetDescription::sgs.
using Commitment = std::vector<bool>;

// Reduced second-order frequency model of the committed SG fleet (per-unit
// on p_base, governor time constants collapsed to a common T).
struct AggregateModel {
  double m_g = 0.0;  // inertia, p.u.·s
  double d_g = 0.0;  // damping, p.u.
  double f_g = 0.0;  // turbine term, p.u.
  double r_g = 0.0;  // droop term, p.u.
  double t = 0.0;    // common governor time constant, s
};

// Second-order parameters of the (possibly converter-supported) closed loop.
struct ClosedLoopParams {
  double m = 0.0;        // total inertia M = M_g + M_c
  double d = 0.0;        // total damping D = D_g + D_c
  double omega_n = 0.0;  // natural frequency, rad/s
  double zeta = 0.0;     // damping ratio
  double omega_d = 0.0;  // damped frequency, rad/s
  double phi = 0.0;      // phase, rad
};

// State feedback gain K = [k1 k2] acting on [omega, omega_dot]; realized by
// converters as virtual damping D_c = -k1 and virtual inertia M_c = -k2.
struct ControllerGain {
  double k1 = 0.0;
  double k2 = 0.0;

  double virtual_damping() const { return -k1; }
  double virtual_inertia() const { return -k2; }
};

struct FrequencyLimits {
  double w_lim_hz = 0.8;       // max deviation (nadir)
  double w_ss_lim_hz = 0.5;    // max steady-state deviation
  double rocof_lim_hz_s = 1.0; // max rate of change of frequency
};

}  // namespace gsp2p
