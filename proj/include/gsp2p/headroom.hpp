#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gsp2p/synthesis.hpp"
#include "gsp2p/types.hpp"

namespace gsp2p {

// A group of SGs with identical dynamic parameters; the headroom curve has
// one online-capacity coordinate per group.
struct SgGroup {
  std::string name;
  std::vector<int> sg_indices;  // into FleetDescription::sgs
};

// Online capacity per group plus the commitment realizing it.
struct OperatingPoint {
  std::vector<double> y_mw;
  Commitment commitment;
};

struct HeadroomSample {
  OperatingPoint point;
  double m_pu = 0.0;         // minimum headroom keeping the nadir bound at w_lim
  double b1_at_limit = 0.0;  // effort weight where the bound meets the limit
  SynthesisResult synthesis;
};

struct HeadroomCurve {
  std::vector<double> k_i;  // slope per group, p.u./MW
  double k_0 = 0.0;         // intercept, p.u.
  double r_squared = 0.0;
  std::vector<std::string> group_names;
  std::vector<HeadroomSample> samples;
};

// Groups SGs by identical dynamic parameter tuples (deterministic order of
// first appearance).
std::vector<SgGroup> derive_groups(const FleetDescription& fleet);

// Commit the first n units of each group; y is then exact multiples of the
// group unit ratings.
OperatingPoint make_point(const FleetDescription& fleet,
                          const std::vector<SgGroup>& groups,
                          const std::vector<int>& units_on);

// Cartesian grid over per-group committed-unit counts, levels_per_group
// evenly spaced over 0..n_units (always including both ends).
std::vector<OperatingPoint> generate_grid(const FleetDescription& fleet,
                                          const std::vector<SgGroup>& groups,
                                          int levels_per_group);

// Bisection on the effort weight b1 until the nadir bound meets w_lim within
// 1e-4 relative; the control-effort bound there is the minimum headroom m.
HeadroomSample headroom_for_point(const FleetDescription& fleet,
                                  const OperatingPoint& point, double w_lim_pu,
                                  double dpl_pu,
                                  std::pair<double, double> b1_range = {1e-3,
                                                                        1e3});

// Ordinary least squares for m ~ sum_i k_i y_i + k_0; rejects fits with
// R^2 < 0.95 since an inaccurate curve silently embedded in the scheduler
// would be unsound.
HeadroomCurve fit_headroom_curve(const std::vector<HeadroomSample>& samples,
                                 const std::vector<std::string>& group_names);

// max(0, sum k_i y_i + k_0); headroom is physically non-negative.
double predict_min_headroom(const HeadroomCurve& curve,
                            const std::vector<double>& y_mw);

// Strongest support whose control-effort bound fits inside the reserved
// budget (the dispatch-stage counterpart of headroom_for_point).
SynthesisResult gains_for_budget(const AggregateModel& agg, double dpl_pu,
                                 double budget_pu,
                                 std::pair<double, double> b1_range = {1e-3,
                                                                       1e3});

struct SweepOutcome {
  std::vector<HeadroomSample> samples;       // fitted set (m > 0)
  std::vector<HeadroomSample> zero_samples;  // compliant without support
  std::vector<OperatingPoint> infeasible;    // support cannot meet the limit
  HeadroomCurve curve;
};

// Runs the grid, keeping only points that satisfy the scheduler's
// conservative RoCoF / steady-state screens (the operating domain the curve
// will be queried on). Points are independent synthesis jobs; `jobs` bounds
// the worker threads and the outcome is order-independent.
SweepOutcome run_headroom_sweep(const FleetDescription& fleet,
                                const std::vector<SgGroup>& groups,
                                int levels_per_group, double w_lim_pu,
                                double w_ss_lim_pu, double rocof_lim_pu,
                                double dpl_pu,
                                std::pair<double, double> b1_range, int jobs);

}  // namespace gsp2p
