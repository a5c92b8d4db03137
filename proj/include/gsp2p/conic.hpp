#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace gsp2p::conic {

// ---------------------------------------------------------------------------
// Small dense conic kernel. Everything here is sized for the 2-state
// frequency model: symmetric unknowns are 2x2, LMI blocks at most 3x3,
// never more than 6 scalar variables. Solves are deterministic.
// ---------------------------------------------------------------------------

inline constexpr double kPsdSlack = 1e-8;      // accepted eigenvalue slack
inline constexpr double kLyapunovTol = 1e-10;  // residual Frobenius norm
inline constexpr double kGapTol = 1e-9;        // complementarity gap at optimal
inline constexpr double kDualTol = 1e-6;       // dual stationarity residual
inline constexpr double kAlphaTol = 1e-6;      // golden-section width on alpha

bool is_psd(const Eigen::MatrixXd& m, double tol = kPsdSlack);
double min_eigenvalue(const Eigen::MatrixXd& m);

// Largest admissible alpha: 2 * |max Re spec(A)| for Hurwitz A.
// Throws "unstable open loop" otherwise.
double alpha_upper_bound(const Eigen::Matrix2d& a);

// Solves A P + P A' + alpha P + (1/alpha) e e' = 0 for symmetric P via the
// 3x3 symmetric-vectorization system. Throws "alpha out of range" when the
// shifted operator is singular (alpha at the spectral boundary).
Eigen::Matrix2d solve_lyapunov(const Eigen::Matrix2d& a, double alpha,
                               const Eigen::Vector2d& e);

// Same linear operator with an arbitrary symmetric right-hand side Q:
// A P + P A' + alpha P + Q = 0.
Eigen::Matrix2d solve_lyapunov_rhs(const Eigen::Matrix2d& a, double alpha,
                                   const Eigen::Matrix2d& q);

// Deterministic golden-section minimizer on [lo, hi].
struct ScalarMin {
  double x = 0.0;
  double value = 0.0;
};
ScalarMin golden_section_min(const std::function<double(double)>& f, double lo,
                             double hi, double tol);

// Minimal invariant ellipsoid of the open/fixed-gain loop: minimizes
// tr(C P(alpha) C') over the admissible alpha interval, with P(alpha) from
// the Lyapunov equation.
struct AlphaSearchResult {
  double alpha_star = 0.0;
  Eigen::Matrix2d p_star;
  double objective = 0.0;
};
AlphaSearchResult min_trace_alpha_search(const Eigen::Matrix2d& a,
                                         const Eigen::Vector2d& e,
                                         const Eigen::MatrixXd& c_perf);

// Minimal-trace ellipsoid subject to containing the initial state x0,
// enforced through the Schur-complement LMI [[1, x0'], [x0, P]] >= 0.
AlphaSearchResult solve_min_trace_with_initial(const Eigen::Matrix2d& a,
                                               const Eigen::Vector2d& e,
                                               const Eigen::MatrixXd& c_perf,
                                               const Eigen::Vector2d& x0);

// ---------------------------------------------------------------------------
// Structured SDP of the closed-loop peak-to-peak design:
//   min  tr(C P C' + C Y' B2' + B2 Y C' + B2 Z B2')
//   s.t. [[A P + P A' + alpha P + B1 Y + (B1 Y)', Et], [Et', -alpha]] <= 0
//        [[Z, Y], [Y', P]] >= 0
// Variables: P sym 2x2, Y 1x2, Z scalar. Solved by a log-det barrier with
// damped Newton steps; no external solver involved.
// ---------------------------------------------------------------------------

enum class SdpStatus { optimal, infeasible, max_iter };

struct SdpProblem {
  Eigen::Matrix2d a;
  Eigen::Vector2d b1;
  Eigen::Vector2d e_tilde;
  double alpha = 0.0;
  Eigen::Matrix2d c;   // performance output on the state
  Eigen::Vector2d b2;  // performance weight on the control input
  bool include_y = true;       // false pins Y = 0 (diagnostic/open-loop mode)
  // Strictly feasible gain for initialization: Y0 = k_init * P0 where P0 is a
  // margin Lyapunov solution of the loop closed with k_init.
  Eigen::RowVector2d k_init = Eigen::RowVector2d::Zero();
  double init_margin = 1e-6;   // interior margin scale of the starting point
  // Line-search probes relax the gap target and skip the strict final
  // centering; only the solve at the chosen alpha needs the certificate.
  double gap_target = kGapTol;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::infeasible;
  Eigen::Matrix2d p = Eigen::Matrix2d::Zero();
  Eigen::RowVector2d y = Eigen::RowVector2d::Zero();
  double z = 0.0;
  double objective = 0.0;
  double dual_objective = 0.0;  // conservative feasible-dual estimate
  double kkt_primal = 0.0;  // worst LMI eigenvalue violation (>= 0)
  double kkt_dual = 0.0;    // stationarity residual norm
  double kkt_gap = 0.0;     // complementarity gap
  int newton_iterations = 0;
};

SdpSolution solve_p2p_sdp(const SdpProblem& prob);

// Golden-section over alpha of the SDP optimum. The builder maps alpha to a
// fully-specified problem; infeasible interior points abort the search.
struct SdpAlphaResult {
  double alpha_star = 0.0;
  SdpSolution solution;
};
SdpAlphaResult sdp_alpha_line_search(
    const std::function<SdpProblem(double)>& prob_builder, double alpha_lo,
    double alpha_hi);

}  // namespace gsp2p::conic
