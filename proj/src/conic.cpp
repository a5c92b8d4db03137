#include "gsp2p/conic.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "gsp2p/errors.hpp"

namespace gsp2p::conic {

namespace {

// The barrier iterations run in extended precision: the central path is
// followed down to a 1e-9 duality gap, where double-precision Hessians of
// the log-det terms become too ill-conditioned. Fixed capacity (at most 6
// variables, 3x3 blocks) keeps the hot loop off the heap.
using MatLD = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic,
                            Eigen::AutoAlign, 6, 6>;
using VecLD = Eigen::Matrix<long double, Eigen::Dynamic, 1, Eigen::AutoAlign,
                            6, 1>;

constexpr double kBigObjective = 1e30;
constexpr int kNewtonCap = 200;  // total Newton steps per solve

MatLD to_ld(const Eigen::MatrixXd& m) { return m.cast<long double>(); }

bool chol_pd(const MatLD& m, MatLD* l = nullptr) {
  Eigen::LLT<MatLD> llt(m);
  if (llt.info() != Eigen::Success) return false;
  if (l) *l = llt.matrixL();
  return true;
}

// One PSD block G(x) = F0 + sum_i x_i F_i of a small SDP.
struct Block {
  MatLD f0;
  std::vector<MatLD> fi;

  MatLD eval(const VecLD& x) const {
    MatLD g = f0;
    for (int i = 0; i < x.size(); ++i) g += x(i) * fi[i];
    return g;
  }
};

struct BarrierProblem {
  VecLD c;
  std::vector<Block> blocks;
};

struct BarrierResult {
  bool ok = false;
  VecLD x;
  int newton_iterations = 0;
  long double gap = 0.0;            // complementarity sum tr(G Lambda) = m/t
  long double dual_residual = 0.0;  // stationarity norm ||c - A*(Lambda)||
  long double dual_slack = 0.0;     // |x . r|, widens the dual objective
};

bool strictly_feasible(const BarrierProblem& prob, const VecLD& x) {
  for (const auto& b : prob.blocks)
    if (!chol_pd(b.eval(x))) return false;
  return true;
}

long double barrier_value(const BarrierProblem& prob, const VecLD& x,
                          long double t, bool* feasible) {
  long double val = t * prob.c.dot(x);
  for (const auto& b : prob.blocks) {
    MatLD l;
    if (!chol_pd(b.eval(x), &l)) {
      *feasible = false;
      return 0.0;
    }
    for (int i = 0; i < l.rows(); ++i) val -= 2.0L * std::log((double)l(i, i));
  }
  *feasible = true;
  return val;
}

// Path-following with damped Newton steps; x0 must be strictly feasible.
BarrierResult barrier_solve(const BarrierProblem& prob, const VecLD& x0,
                            double gap_target) {
  BarrierResult res;
  const int n = static_cast<int>(prob.c.size());
  int m_total = 0;
  for (const auto& b : prob.blocks) m_total += static_cast<int>(b.f0.rows());

  if (!strictly_feasible(prob, x0)) return res;

  VecLD x = x0;
  long double t = 1.0;
  const long double t_final = m_total / (long double)(0.1 * gap_target);
  int newton_total = 0;

  // Best dual-stationarity residual seen during the last stage; Newton
  // directions get noisy near the boundary, so the residual is not monotone
  // in the iteration index.
  VecLD x_best;
  long double best_resid = std::numeric_limits<long double>::infinity();
  long double best_slack = 0.0;

  const bool strict = gap_target <= 1.01 * kGapTol;
  while (true) {
    const bool final_stage = strict && t >= t_final;
    const int inner_cap = final_stage ? 30 : 60;
    for (int inner = 0; inner < inner_cap; ++inner) {
      if (newton_total >= kNewtonCap) break;
      ++newton_total;

      VecLD grad = t * prob.c;
      MatLD hess = MatLD::Zero(n, n);
      for (const auto& b : prob.blocks) {
        const MatLD g = b.eval(x);
        const MatLD ginv = g.inverse();
        std::vector<MatLD> w(n);
        for (int i = 0; i < n; ++i) {
          w[i] = ginv * b.fi[i];
          grad(i) -= w[i].trace();
        }
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            const long double hij = (w[i] * w[j]).trace();
            hess(i, j) += hij;
            if (j > i) hess(j, i) += hij;
          }
      }

      if (final_stage) {
        const long double resid = grad.norm() / t;
        if (resid < best_resid) {
          best_resid = resid;
          best_slack = std::abs(grad.dot(x)) / t;
          x_best = x;
        }
        if (resid <= 3e-8L) break;
      }

      Eigen::LDLT<MatLD> ldlt(hess);
      VecLD dir;
      if (ldlt.info() == Eigen::Success) {
        dir = ldlt.solve(-grad);
        dir += ldlt.solve(-grad - hess * dir);  // one refinement pass
      } else {
        dir = -grad;
      }
      long double decrement = -grad.dot(dir);
      if (!(decrement > 0)) {  // not a descent direction; regularized retry
        MatLD hreg = hess;
        hreg.diagonal().array() += hess.diagonal().maxCoeff() * 1e-12L + 1e-30L;
        dir = Eigen::LDLT<MatLD>(hreg).solve(-grad);
        decrement = -grad.dot(dir);
        if (!(decrement > 0)) break;
      }
      // Intermediate stages only need to track the path loosely; the strict
      // centering work happens once at the final stage.
      if (!final_stage && decrement <= 1e-3L) break;

      // Self-concordant damped Newton step: guaranteed decrease without any
      // barrier-value comparison (which would drown in cancellation at large
      // t). Backtracking on feasibility only, as a numerical safety net.
      const long double lambda = std::sqrt((double)decrement);
      long double step = lambda > 0.25L ? 1.0L / (1.0L + lambda) : 1.0L;
      VecLD x_next = x;
      bool placed = false;
      for (int bt = 0; bt < 70; ++bt) {
        x_next = x + step * dir;
        if (strictly_feasible(prob, x_next)) {
          placed = true;
          break;
        }
        step *= 0.5L;
      }
      if (!placed) break;
      if ((x_next - x).norm() == 0.0L) break;
      x = x_next;
    }

    if (t >= t_final || newton_total >= kNewtonCap) break;
    t = std::min(t * 10.0L, t_final);
  }

  res.gap = m_total / t;
  res.ok = t >= t_final &&
           (!strict ||
            best_resid != std::numeric_limits<long double>::infinity());
  res.x = x_best.size() == n ? x_best : x;
  res.newton_iterations = newton_total;
  res.dual_residual = strict ? best_resid : 0.0L;
  res.dual_slack = strict ? best_slack : res.gap;
  return res;
}

// Diagonal variable scaling from the starting point keeps the Newton system
// well conditioned when the ellipsoid entries span many orders of magnitude.
BarrierResult barrier_solve_scaled(const BarrierProblem& prob, const VecLD& x0,
                                   double gap_target) {
  const int n = static_cast<int>(prob.c.size());
  VecLD scale(n);
  const long double floor_scale = 1e-3L * x0.cwiseAbs().maxCoeff() + 1e-12L;
  for (int i = 0; i < n; ++i)
    scale(i) = std::max<long double>(std::abs((long double)x0(i)), floor_scale);

  BarrierProblem scaled;
  scaled.c = prob.c.cwiseProduct(scale);
  scaled.blocks = prob.blocks;
  for (auto& b : scaled.blocks)
    for (int i = 0; i < n; ++i) b.fi[i] *= scale(i);
  VecLD start = x0.cwiseQuotient(scale);

  BarrierResult res = barrier_solve(scaled, start, gap_target);
  if (res.x.size() == n) res.x = res.x.cwiseProduct(scale);
  return res;
}

// Symmetric 2x2 basis for (p11, p12, p22).
const Eigen::Matrix2d kSymBasis[3] = {
    (Eigen::Matrix2d() << 1, 0, 0, 0).finished(),
    (Eigen::Matrix2d() << 0, 1, 1, 0).finished(),
    (Eigen::Matrix2d() << 0, 0, 0, 1).finished()};

Eigen::Matrix2d sym_from_vars(const VecLD& x, int offset = 0) {
  Eigen::Matrix2d p;
  p << (double)x(offset), (double)x(offset + 1), (double)x(offset + 1),
      (double)x(offset + 2);
  return p;
}

}  // namespace

bool is_psd(const Eigen::MatrixXd& m, double tol) {
  return min_eigenvalue(m) >= -tol;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvalues().minCoeff();
}

double alpha_upper_bound(const Eigen::Matrix2d& a) {
  const Eigen::EigenSolver<Eigen::Matrix2d> es(a);
  const double re_max = es.eigenvalues().real().maxCoeff();
  if (re_max >= 0.0) throw Error(ErrorCode::numeric, "unstable open loop");
  return -2.0 * re_max;
}

Eigen::Matrix2d solve_lyapunov_rhs(const Eigen::Matrix2d& a, double alpha,
                                   const Eigen::Matrix2d& q) {
  const Eigen::Matrix2d as = a + 0.5 * alpha * Eigen::Matrix2d::Identity();
  Eigen::Matrix3d op;
  // Rows: entries (1,1), (1,2), (2,2) of As*P + P*As'.
  op << 2 * as(0, 0), 2 * as(0, 1), 0,  //
      as(1, 0), as(0, 0) + as(1, 1), as(0, 1),  //
      0, 2 * as(1, 0), 2 * as(1, 1);
  const Eigen::Vector3d rhs(-q(0, 0), -q(0, 1), -q(1, 1));
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(op);
  if (!lu.isInvertible())
    throw Error(ErrorCode::numeric, "alpha out of range");
  const Eigen::Vector3d p = lu.solve(rhs);
  Eigen::Matrix2d out;
  out << p(0), p(1), p(1), p(2);
  // Guard against a nearly singular operator passing the rank test.
  const Eigen::Matrix2d residual = as * out + out * as.transpose() + q;
  if (!(residual.norm() <= 1e-8 * (1.0 + out.norm() + q.norm())))
    throw Error(ErrorCode::numeric, "alpha out of range");
  return out;
}

Eigen::Matrix2d solve_lyapunov(const Eigen::Matrix2d& a, double alpha,
                               const Eigen::Vector2d& e) {
  if (alpha <= 0.0) throw Error(ErrorCode::numeric, "alpha out of range");
  return solve_lyapunov_rhs(a, alpha, (e * e.transpose()) / alpha);
}

ScalarMin golden_section_min(const std::function<double(double)>& f, double lo,
                             double hi, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  ScalarMin best = f1 <= f2 ? ScalarMin{x1, f1} : ScalarMin{x2, f2};
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
    const ScalarMin cand = f1 <= f2 ? ScalarMin{x1, f1} : ScalarMin{x2, f2};
    if (cand.value < best.value) best = cand;
  }
  return best;
}

AlphaSearchResult min_trace_alpha_search(const Eigen::Matrix2d& a,
                                         const Eigen::Vector2d& e,
                                         const Eigen::MatrixXd& c_perf) {
  const double a_max = alpha_upper_bound(a);
  const double lo = 1e-6 * a_max;
  const double hi = (1.0 - 1e-6) * a_max;
  const auto trace_of = [&](double alpha) {
    const Eigen::Matrix2d p = solve_lyapunov(a, alpha, e);
    return (c_perf * p * c_perf.transpose()).trace();
  };
  const ScalarMin m = golden_section_min(trace_of, lo, hi, kAlphaTol);
  AlphaSearchResult res;
  res.alpha_star = m.x;
  res.p_star = solve_lyapunov(a, m.x, e);
  res.objective = m.value;
  return res;
}

SdpSolution solve_p2p_sdp(const SdpProblem& prob) {
  SdpSolution sol;
  const int n = prob.include_y ? 6 : 3;
  BarrierProblem bp;
  bp.c = VecLD::Zero(n);

  const Eigen::Matrix2d ctc = prob.c.transpose() * prob.c;
  for (int i = 0; i < 3; ++i)
    bp.c(i) = (ctc.cwiseProduct(kSymBasis[i])).sum();
  if (prob.include_y) {
    const Eigen::Vector2d cb2 = prob.c.transpose() * prob.b2;
    bp.c(3) = 2.0 * cb2(0);
    bp.c(4) = 2.0 * cb2(1);
    bp.c(5) = prob.b2.squaredNorm();
  }

  // Block 1: -[[A P + P A' + alpha P + B1 Y + (B1 Y)', Et], [Et', -alpha]]
  Block lmi1;
  lmi1.f0 = MatLD::Zero(3, 3);
  lmi1.f0(0, 2) = lmi1.f0(2, 0) = -prob.e_tilde(0);
  lmi1.f0(1, 2) = lmi1.f0(2, 1) = -prob.e_tilde(1);
  lmi1.f0(2, 2) = prob.alpha;
  lmi1.fi.resize(n, MatLD::Zero(3, 3));
  for (int i = 0; i < 3; ++i) {
    const Eigen::Matrix2d s = prob.a * kSymBasis[i] +
                              kSymBasis[i] * prob.a.transpose() +
                              prob.alpha * kSymBasis[i];
    lmi1.fi[i].topLeftCorner(2, 2) = -to_ld(s);
  }
  if (prob.include_y) {
    for (int j = 0; j < 2; ++j) {
      const Eigen::Matrix2d by = prob.b1 * Eigen::RowVector2d::Unit(j);
      lmi1.fi[3 + j].topLeftCorner(2, 2) = -to_ld(by + by.transpose());
    }
  }
  bp.blocks.push_back(lmi1);

  if (prob.include_y) {
    // Block 2: [[Z, Y], [Y', P]] >= 0.
    Block lmi2;
    lmi2.f0 = MatLD::Zero(3, 3);
    lmi2.fi.resize(n, MatLD::Zero(3, 3));
    for (int i = 0; i < 3; ++i)
      lmi2.fi[i].bottomRightCorner(2, 2) = to_ld(kSymBasis[i]);
    for (int j = 0; j < 2; ++j) {
      lmi2.fi[3 + j](0, 1 + j) = 1.0;
      lmi2.fi[3 + j](1 + j, 0) = 1.0;
    }
    lmi2.fi[5](0, 0) = 1.0;
    bp.blocks.push_back(lmi2);
  } else {
    Block psd;  // P alone must stay positive definite
    psd.f0 = MatLD::Zero(2, 2);
    psd.fi.resize(n, MatLD::Zero(2, 2));
    for (int i = 0; i < 3; ++i) psd.fi[i] = to_ld(kSymBasis[i]);
    bp.blocks.push_back(psd);
  }

  // Strictly feasible start: margin Lyapunov solution of the loop closed
  // with k_init, Y0 = k_init * P0.
  const Eigen::Matrix2d a_cl =
      prob.a + prob.b1 * (prob.include_y ? prob.k_init
                                         : Eigen::RowVector2d::Zero());
  Eigen::Matrix2d p0;
  try {
    const double margin =
        prob.init_margin *
        (1.0 + prob.e_tilde.squaredNorm() / std::max(prob.alpha, 1e-12));
    Eigen::Matrix2d q = prob.e_tilde * prob.e_tilde.transpose() / prob.alpha;
    q += margin * Eigen::Matrix2d::Identity();
    p0 = solve_lyapunov_rhs(a_cl, prob.alpha, q);
  } catch (const Error&) {
    sol.status = SdpStatus::infeasible;
    return sol;
  }
  if (min_eigenvalue(p0) <= 0.0) {
    sol.status = SdpStatus::infeasible;
    return sol;
  }

  VecLD x0 = VecLD::Zero(n);
  x0(0) = p0(0, 0);
  x0(1) = p0(0, 1);
  x0(2) = p0(1, 1);
  if (prob.include_y) {
    const Eigen::RowVector2d y0 = prob.k_init * p0;
    x0(3) = y0(0);
    x0(4) = y0(1);
    const double ypy = (y0 * p0.inverse() * y0.transpose())(0, 0);
    x0(5) = ypy + std::max(1.0, ypy) * 0.5 + prob.init_margin;
  }

  const BarrierResult br = barrier_solve_scaled(bp, x0, prob.gap_target);
  if (br.x.size() == 0) {
    sol.status = SdpStatus::infeasible;
    return sol;
  }
  sol.p = sym_from_vars(br.x);
  if (prob.include_y) {
    sol.y << (double)br.x(3), (double)br.x(4);
    sol.z = (double)br.x(5);
  }
  sol.objective = (double)bp.c.dot(br.x);
  sol.kkt_gap = (double)br.gap;
  sol.kkt_dual = (double)br.dual_residual;
  sol.dual_objective =
      sol.objective - (double)(br.gap + br.dual_slack);
  double worst = 0.0;
  for (const auto& b : bp.blocks) {
    Eigen::MatrixXd g = b.eval(br.x).cast<double>();
    worst = std::min(worst, min_eigenvalue(g));
  }
  sol.kkt_primal = std::max(0.0, -worst);
  sol.newton_iterations = br.newton_iterations;
  sol.status = br.ok && sol.kkt_gap <= kGapTol && worst >= -kPsdSlack &&
                       sol.kkt_dual <= kDualTol
                   ? SdpStatus::optimal
                   : SdpStatus::max_iter;
  return sol;
}

AlphaSearchResult solve_min_trace_with_initial(const Eigen::Matrix2d& a,
                                               const Eigen::Vector2d& e,
                                               const Eigen::MatrixXd& c_perf,
                                               const Eigen::Vector2d& x0) {
  const double a_max = alpha_upper_bound(a);
  const Eigen::Matrix2d ctc = c_perf.transpose() * c_perf;

  const auto solve_at = [&](double alpha) -> std::pair<double, Eigen::Matrix2d> {
    BarrierProblem bp;
    bp.c = VecLD::Zero(3);
    for (int i = 0; i < 3; ++i)
      bp.c(i) = (ctc.cwiseProduct(kSymBasis[i])).sum();

    Block lyap;  // -(A P + P A' + alpha P + (1/alpha) E E') >= 0
    lyap.f0 = -to_ld(e * e.transpose() / alpha);
    lyap.fi.resize(3);
    for (int i = 0; i < 3; ++i)
      lyap.fi[i] = -to_ld(Eigen::Matrix2d(a * kSymBasis[i] +
                                          kSymBasis[i] * a.transpose() +
                                          alpha * kSymBasis[i]));
    bp.blocks.push_back(lyap);

    Block init;  // [[1, x0'], [x0, P]] >= 0
    init.f0 = MatLD::Zero(3, 3);
    init.f0(0, 0) = 1.0;
    init.f0(0, 1) = init.f0(1, 0) = x0(0);
    init.f0(0, 2) = init.f0(2, 0) = x0(1);
    init.fi.resize(3, MatLD::Zero(3, 3));
    for (int i = 0; i < 3; ++i)
      init.fi[i].bottomRightCorner(2, 2) = to_ld(kSymBasis[i]);
    bp.blocks.push_back(init);

    // Feasible start: scale the margin Lyapunov solution until it strictly
    // contains x0 (scaling keeps the inequality strict).
    const double margin = 1e-6 * (1.0 + e.squaredNorm() / alpha);
    Eigen::Matrix2d q = e * e.transpose() / alpha;
    q += margin * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d p_eps = solve_lyapunov_rhs(a, alpha, q);
    const double contain = (x0.transpose() * p_eps.inverse() * x0)(0, 0);
    const double scale = std::max(1.0, 1.001 * contain);

    VecLD start(3);
    start << scale * p_eps(0, 0), scale * p_eps(0, 1), scale * p_eps(1, 1);
    const BarrierResult br = barrier_solve_scaled(bp, start, kGapTol);
    if (!br.ok)
      throw Error(ErrorCode::numeric,
                  "initial-state ellipsoid SDP did not converge");
    return {(double)bp.c.dot(br.x), sym_from_vars(br.x)};
  };

  const double lo = 1e-6 * a_max;
  const double hi = (1.0 - 1e-6) * a_max;
  const ScalarMin m = golden_section_min(
      [&](double alpha) { return solve_at(alpha).first; }, lo, hi, kAlphaTol);
  AlphaSearchResult res;
  res.alpha_star = m.x;
  auto [obj, p] = solve_at(m.x);
  res.p_star = p;
  res.objective = obj;
  return res;
}

SdpAlphaResult sdp_alpha_line_search(
    const std::function<SdpProblem(double)>& prob_builder, double alpha_lo,
    double alpha_hi) {
  SdpAlphaResult out;
  bool any_feasible = false;
  double best_obj = kBigObjective;
  const auto objective_at = [&](double alpha) {
    const SdpSolution s = solve_p2p_sdp(prob_builder(alpha));
    if (s.status == SdpStatus::infeasible) return kBigObjective;
    any_feasible = true;
    if (s.objective < best_obj) {
      best_obj = s.objective;
      out.alpha_star = alpha;
      out.solution = s;
    }
    return s.objective;
  };
  // The SDP objective is flat to second order at the minimizer, so the
  // interval only needs to undercut the +-1e-3 local-optimality contract.
  golden_section_min(objective_at, alpha_lo, alpha_hi, 1e-4);
  if (!any_feasible || best_obj >= kBigObjective)
    throw Error(ErrorCode::infeasible, "no feasible alpha in search interval");
  return out;
}

}  // namespace gsp2p::conic
