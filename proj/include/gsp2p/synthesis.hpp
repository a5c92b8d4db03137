#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gsp2p/types.hpp"

namespace gsp2p {

// State-space model of the support loop, normalized so the unit step
// disturbance covers ||eta|| <= 1 (all bounds scale back by dPl).
struct StateSpace {
  Eigen::Matrix2d a;
  Eigen::Vector2d b1;
  Eigen::Vector2d e;
  bool normalized = true;
};

// Coordinate shift x~ = x - X (normalized units, so x0 = X * 1).
struct CoordinateShift {
  double a_scale = 0.0;
  Eigen::Vector2d x_vec = Eigen::Vector2d::Zero();      // X = [0, a/M_g]
  Eigen::Vector2d x0_shifted = Eigen::Vector2d::Zero(); // x(0) - X
};

struct GainIterate {
  ControllerGain gain;
  double alpha = 0.0;
  double a_scale = 0.0;
  double objective = 0.0;
  double error = 0.0;  // max-norm gain change vs previous iterate
};

struct SynthesisResult {
  ControllerGain gain;
  Eigen::Matrix2d p = Eigen::Matrix2d::Zero();  // invariant-ellipsoid matrix
  double alpha_star = 0.0;
  double a_star = 0.0;
  double effort_bound = 0.0;  // p.u. power, disturbance applied
  double nadir_bound = 0.0;   // p.u. frequency, disturbance applied
  int iterations = 0;
  bool converged = false;
  std::vector<GainIterate> history;
  double b1_weight = 0.0;
  double dpl_pu = 0.0;
  // The shift vector uses M_g while the initial RoCoF involves total M; both
  // are reported since the source derivation leaves them unreconciled.
  double x0_rocof = 0.0;        // 1/M at the final gain (normalized)
  double x0_shift = 0.0;        // a*/M_g (normalized)
  bool scale_warning = false;   // containment already failing at a = 1
};

// Plant matrices at a frozen gain iterate; the gain enters M and D.
StateSpace build_state_space(const AggregateModel& agg,
                             const ControllerGain& gain);

// Shift construction in normalized units: x(0) = [0, 1/M], X = [0, a/M_g].
CoordinateShift make_shift(const AggregateModel& agg,
                           const ControllerGain& gain, double a_scale);

// Et = A X + E + B1 K X; the two extra terms come from the shift.
Eigen::Vector2d shifted_disturbance_matrix(const StateSpace& ss,
                                           const ControllerGain& gain,
                                           const CoordinateShift& shift);

struct ScaleSearchResult {
  double a_star = 1.0;
  bool warned = false;  // exit condition already met at a = 1
};

// Scan a downward from 1 until the shifted initial state leaves the minimal
// invariant ellipse; returns the last contained value, refined one bisection
// level between the final two grid points.
ScaleSearchResult find_optimal_scale(const AggregateModel& agg,
                                     const ControllerGain& gain,
                                     double step = 0.02);

// Fixed-point iteration over the gain-dependent plant: each pass rebuilds the
// plant at the previous gain, refreshes a*, minimizes the structured SDP over
// alpha and re-derives K = Y P^-1, until the gain settles.
SynthesisResult synthesize_gains(const AggregateModel& agg, double dpl_pu,
                                 double b1_weight, double eps = 1e-6,
                                 int max_iter = 50);

// ||K P^1/2|| + |K x0|, scaled by dpl.
double control_effort_bound(const ControllerGain& gain,
                            const Eigen::Matrix2d& p,
                            const Eigen::Vector2d& x0, double dpl_pu);

// sqrt(e1 P e1') scaled by dpl; the shift has zero first component so the
// frequency readout is unaffected by it.
double nadir_bound(const Eigen::Matrix2d& p, double dpl_pu);

// Conservative textbook bound |P_c| + |K1 w_lim| + |K2 rocof_lim| used by the
// analytic-relaxation baseline.
double relaxed_effort_bound(const ControllerGain& gain, double p_setpoint_pu,
                            double w_lim_pu, double rocof_lim_pu);

// Open-loop (K = 0) nadir bound with the shift applied; the no-support
// baseline of the headroom bisection.
SynthesisResult open_loop_bound(const AggregateModel& agg, double dpl_pu);

}  // namespace gsp2p
