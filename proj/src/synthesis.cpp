#include "gsp2p/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "gsp2p/conic.hpp"
#include "gsp2p/errors.hpp"
#include "gsp2p/system_model.hpp"

namespace gsp2p {

namespace {

Eigen::RowVector2d as_row(const ControllerGain& g) {
  return Eigen::RowVector2d(g.k1, g.k2);
}

// Performance matrices of the trade-off sweep: frequency deviation on the
// state side, b1-weighted control effort on the input side.
Eigen::Matrix2d perf_c() {
  Eigen::Matrix2d c;
  c << 1, 0, 0, 0;
  return c;
}

Eigen::Vector2d perf_b2(double b1_weight) {
  return Eigen::Vector2d(0.0, b1_weight);
}

double quad_form_inv(const Eigen::Matrix2d& p, const Eigen::Vector2d& v) {
  return v.dot(p.llt().solve(v));
}

// Minimal fixed-gain ellipsoid of the shifted loop; this is both the a*-scan
// ellipse and the final invariance certificate (the SDP's active LMI lands on
// the same Lyapunov family at the fixed point).
conic::AlphaSearchResult fixed_gain_ellipsoid(const AggregateModel& agg,
                                              const ControllerGain& gain,
                                              double a_scale,
                                              const Eigen::MatrixXd& c_perf) {
  const StateSpace ss = build_state_space(agg, gain);
  const CoordinateShift shift = make_shift(agg, gain, a_scale);
  const Eigen::Vector2d e_tilde = shifted_disturbance_matrix(ss, gain, shift);
  const Eigen::Matrix2d a_cl = ss.a + ss.b1 * as_row(gain);
  return conic::min_trace_alpha_search(a_cl, e_tilde, c_perf);
}

bool shift_contained(const AggregateModel& agg, const ControllerGain& gain,
                     double a_scale) {
  const auto ell = fixed_gain_ellipsoid(agg, gain, a_scale, perf_c());
  const CoordinateShift shift = make_shift(agg, gain, a_scale);
  return quad_form_inv(ell.p_star, shift.x0_shifted) <= 1.0;
}

struct IterationOutcome {
  ControllerGain gain;
  double alpha = 0.0;
  double objective = 0.0;
};

// One Algorithm-1 pass: plant frozen at `frozen`, SDP minimized over alpha,
// new gain K = Y P^-1.
IterationOutcome algorithm1_step(const AggregateModel& agg,
                                 const ControllerGain& frozen, double a_scale,
                                 double b1_weight) {
  const StateSpace ss = build_state_space(agg, frozen);
  const CoordinateShift shift = make_shift(agg, frozen, a_scale);
  const Eigen::Vector2d e_tilde = shifted_disturbance_matrix(ss, frozen, shift);
  const Eigen::Matrix2d a_cl = ss.a + ss.b1 * as_row(frozen);
  const double a_max = conic::alpha_upper_bound(a_cl);

  const auto builder = [&](double alpha) {
    conic::SdpProblem prob;
    prob.a = ss.a;
    prob.b1 = ss.b1;
    prob.e_tilde = e_tilde;
    prob.alpha = alpha;
    prob.c = perf_c();
    prob.b2 = perf_b2(b1_weight);
    prob.k_init = as_row(frozen);
    return prob;
  };
  // Quick probes locate alpha*, then one certified solve provides the gain.
  const auto quick_builder = [&](double alpha) {
    conic::SdpProblem prob = builder(alpha);
    prob.gap_target = 1e-7;
    return prob;
  };
  const auto line = conic::sdp_alpha_line_search(quick_builder, 1e-6 * a_max,
                                                 (1.0 - 1e-6) * a_max);
  const conic::SdpSolution precise = conic::solve_p2p_sdp(builder(line.alpha_star));
  const conic::SdpSolution& sol =
      precise.status == conic::SdpStatus::infeasible ? line.solution : precise;
  IterationOutcome out;
  const Eigen::RowVector2d k_new = sol.y * sol.p.inverse();
  out.gain = ControllerGain{k_new(0), k_new(1)};
  out.alpha = line.alpha_star;
  out.objective = sol.objective;
  return out;
}

SynthesisResult run_synthesis(const AggregateModel& agg, double dpl_pu,
                              double b1_weight, double eps, int max_iter) {
  SynthesisResult result;
  result.b1_weight = b1_weight;
  result.dpl_pu = dpl_pu;

  ControllerGain gain;  // K^(0) = 0
  double err = std::numeric_limits<double>::infinity();
  ScaleSearchResult scale;
  for (int k = 1; k <= max_iter; ++k) {
    scale = find_optimal_scale(agg, gain);
    IterationOutcome step;
    try {
      step = algorithm1_step(agg, gain, scale.a_star, b1_weight);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::infeasible)
        throw Error(ErrorCode::infeasible,
                    "SDP infeasible at iteration " + std::to_string(k) + ": " +
                        e.what());
      throw;
    }
    err = std::max(std::abs(step.gain.k1 - gain.k1),
                   std::abs(step.gain.k2 - gain.k2));
    gain = step.gain;
    result.history.push_back(
        {gain, step.alpha, scale.a_star, step.objective, err});
    result.iterations = k;
    if (err <= eps) {
      result.converged = true;
      break;
    }
  }
  result.gain = gain;
  result.scale_warning = scale.warned;

  // Certificate pass at the exact final gain: refresh a*, then take the
  // minimal fixed-gain ellipsoid under the closed-loop performance matrix
  // C + B2 K. If the shifted initial state falls outside (the scan tracked
  // a slightly different ellipse family), walk a toward M_g/M where the
  // shifted initial state vanishes.
  const ScaleSearchResult cert_scale = find_optimal_scale(agg, gain);
  double a_star = cert_scale.a_star;
  const Eigen::Matrix2d c_cl = perf_c() + perf_b2(b1_weight) * as_row(gain);
  conic::AlphaSearchResult cert = fixed_gain_ellipsoid(agg, gain, a_star, c_cl);
  {
    const double m_total = agg.m_g - gain.k2;
    const double a_target = std::clamp(agg.m_g / m_total, 0.0, 1.0);
    for (int tries = 0; tries < 12; ++tries) {
      const CoordinateShift s = make_shift(agg, gain, a_star);
      if (quad_form_inv(cert.p_star, s.x0_shifted) <= 1.0) break;
      a_star += 0.5 * (a_target - a_star);
      cert = fixed_gain_ellipsoid(agg, gain, a_star, c_cl);
    }
  }
  const CoordinateShift shift = make_shift(agg, gain, a_star);

  result.p = cert.p_star;
  result.alpha_star = cert.alpha_star;
  result.a_star = a_star;
  result.effort_bound = control_effort_bound(gain, cert.p_star, shift.x_vec,
                                             dpl_pu);
  result.nadir_bound = nadir_bound(cert.p_star, dpl_pu);
  result.x0_rocof = 1.0 / (agg.m_g - gain.k2);
  result.x0_shift = shift.x_vec(1);
  return result;
}

}  // namespace

StateSpace build_state_space(const AggregateModel& agg,
                             const ControllerGain& gain) {
  const double m_total = agg.m_g + gain.virtual_inertia();
  const double d_total = agg.d_g + gain.virtual_damping();
  if (m_total <= 0.0) throw Error(ErrorCode::numeric, "nonphysical inertia");
  StateSpace ss;
  const double mt = m_total * agg.t;
  ss.a << 0.0, 1.0,  //
      -(agg.d_g + agg.r_g) / mt,
      -(agg.m_g + agg.t * (d_total + agg.f_g)) / mt;
  ss.b1 << 0.0, 1.0 / mt;
  ss.e = ss.b1;
  ss.normalized = true;
  return ss;
}

CoordinateShift make_shift(const AggregateModel& agg,
                           const ControllerGain& gain, double a_scale) {
  const double m_total = agg.m_g + gain.virtual_inertia();
  if (m_total <= 0.0) throw Error(ErrorCode::numeric, "nonphysical inertia");
  CoordinateShift shift;
  shift.a_scale = a_scale;
  shift.x_vec << 0.0, a_scale / agg.m_g;
  shift.x0_shifted << 0.0, 1.0 / m_total - shift.x_vec(1);
  return shift;
}

Eigen::Vector2d shifted_disturbance_matrix(const StateSpace& ss,
                                           const ControllerGain& gain,
                                           const CoordinateShift& shift) {
  return ss.a * shift.x_vec + ss.e +
         ss.b1 * (as_row(gain) * shift.x_vec)(0, 0);
}

ScaleSearchResult find_optimal_scale(const AggregateModel& agg,
                                     const ControllerGain& gain, double step) {
  ScaleSearchResult res;
  if (!shift_contained(agg, gain, 1.0)) {
    res.a_star = 1.0;
    res.warned = true;  // no shrinkage possible
    return res;
  }
  double prev = 1.0;
  const int max_steps = static_cast<int>(std::ceil(1.0 / step)) + 1;
  for (int k = 1; k <= max_steps; ++k) {
    const double a = std::max(0.0, 1.0 - k * step);
    if (!shift_contained(agg, gain, a)) {
      // One bisection level between the last two grid points.
      const double mid = 0.5 * (prev + a);
      res.a_star = shift_contained(agg, gain, mid) ? mid : prev;
      return res;
    }
    prev = a;
    if (a == 0.0) break;
  }
  res.a_star = prev;
  return res;
}

SynthesisResult synthesize_gains(const AggregateModel& agg, double dpl_pu,
                                 double b1_weight, double eps, int max_iter) {
  if (b1_weight < 0.0)
    throw Error(ErrorCode::invalid_argument, "b1 weight must be non-negative");
  conic::alpha_upper_bound(build_state_space(agg, {}).a);  // open loop Hurwitz

  // A gain with negative virtual inertia or damping cannot be realized by a
  // VSM; retry with the effort weight doubled before giving up.
  double b1 = b1_weight;
  for (int attempt = 0; attempt < 4; ++attempt) {
    SynthesisResult result = run_synthesis(agg, dpl_pu, b1, eps, max_iter);
    if (result.gain.virtual_damping() >= -1e-12 &&
        result.gain.virtual_inertia() >= -1e-12)
      return result;
    b1 *= 2.0;
  }
  throw Error(ErrorCode::numeric,
              "synthesis keeps returning destabilizing gain signs");
}

double control_effort_bound(const ControllerGain& gain,
                            const Eigen::Matrix2d& p,
                            const Eigen::Vector2d& x0, double dpl_pu) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(p);
  const Eigen::Vector2d evals = es.eigenvalues().cwiseMax(0.0);
  const Eigen::Matrix2d sqrt_p = es.eigenvectors() *
                                 evals.cwiseSqrt().asDiagonal() *
                                 es.eigenvectors().transpose();
  const Eigen::RowVector2d k = as_row(gain);
  return ((k * sqrt_p).norm() + std::abs(k.dot(x0))) * dpl_pu;
}

double nadir_bound(const Eigen::Matrix2d& p, double dpl_pu) {
  return std::sqrt(std::max(0.0, p(0, 0))) * dpl_pu;
}

double relaxed_effort_bound(const ControllerGain& gain, double p_setpoint_pu,
                            double w_lim_pu, double rocof_lim_pu) {
  if (w_lim_pu <= 0.0 || rocof_lim_pu <= 0.0)
    throw Error(ErrorCode::invalid_argument, "limits must be positive");
  return std::abs(p_setpoint_pu) + std::abs(gain.k1 * w_lim_pu) +
         std::abs(gain.k2 * rocof_lim_pu);
}

SynthesisResult open_loop_bound(const AggregateModel& agg, double dpl_pu) {
  SynthesisResult result;
  result.dpl_pu = dpl_pu;
  const ControllerGain zero;
  const ScaleSearchResult scale = find_optimal_scale(agg, zero);
  const auto ell = fixed_gain_ellipsoid(agg, zero, scale.a_star, perf_c());
  const CoordinateShift shift = make_shift(agg, zero, scale.a_star);
  result.gain = zero;
  result.p = ell.p_star;
  result.alpha_star = ell.alpha_star;
  result.a_star = scale.a_star;
  result.effort_bound = 0.0;
  result.nadir_bound = nadir_bound(ell.p_star, dpl_pu);
  result.converged = true;
  result.scale_warning = scale.warned;
  result.x0_rocof = 1.0 / agg.m_g;
  result.x0_shift = shift.x_vec(1);
  return result;
}

}  // namespace gsp2p
