#pragma once

#include "gsp2p/types.hpp"

namespace gsp2p {

// Capacity-weighted aggregation of the committed SGs onto the system base.
// Heterogeneous governor time constants collapse to their capacity-weighted
// mean; the full simulator quantifies the error that introduces.
AggregateModel aggregate_fleet(const FleetDescription& fleet,
                               const Commitment& commitment);

// Second-order closed-loop parameters with converter support (m_c, d_c);
// throws "overdamped regime" when zeta >= 1 since the closed-form trajectory
// assumes an underdamped pair.
ClosedLoopParams closed_loop_params(const AggregateModel& agg, double m_c,
                                    double d_c);

// Time of the first post-disturbance frequency extremum, branch-corrected to
// the first positive stationary point.
double nadir_time(const ClosedLoopParams& p, double t_gov);

// Peak frequency deviation for a step loss dpl (per-unit).
double analytic_nadir(const ClosedLoopParams& p, const AggregateModel& agg,
                      double dpl);

// Maximum RoCoF, attained at t = 0+: dpl / M.
double max_rocof(const ClosedLoopParams& p, double dpl);

// Post-event settled deviation dpl / (D + R_g).
double steady_state_deviation(const ClosedLoopParams& p,
                              const AggregateModel& agg, double dpl);

// Closed-form deviation trajectory omega(t); omega > 0 means frequency below
// nominal by omega * f_base.
double frequency_response(const ClosedLoopParams& p, const AggregateModel& agg,
                          double dpl, double t);

}  // namespace gsp2p
