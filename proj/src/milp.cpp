#include "gsp2p/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "gsp2p/errors.hpp"

namespace gsp2p::milp {

namespace {

constexpr double kFeasTol = 1e-7;
constexpr double kCostTol = 1e-9;
constexpr double kIntTol = 1e-6;
constexpr long kIterCap = 200000;
constexpr int kRefactorEvery = 100;

enum class VStat : std::int8_t { at_lb = 0, at_ub = 1, basic = 2 };

// Column-major sparse view of [A | I] where slacks close each row:
// a_i . x + s_i = rhs_i, slack bounds encode the row sense.
struct Tableau {
  int m = 0;       // rows
  int n = 0;       // structural columns
  int total = 0;   // n + m
  std::vector<std::vector<std::pair<int, double>>> cols;
  std::vector<double> lb, ub, cost, rhs;
};

Tableau build_tableau(const Model& model) {
  Tableau t;
  t.m = static_cast<int>(model.rows.size());
  t.n = static_cast<int>(model.vars.size());
  t.total = t.n + t.m;
  t.cols.resize(t.total);
  t.lb.resize(t.total);
  t.ub.resize(t.total);
  t.cost.assign(t.total, 0.0);
  t.rhs.resize(t.m);
  for (int j = 0; j < t.n; ++j) {
    t.lb[j] = model.vars[j].lb;
    t.ub[j] = model.vars[j].ub;
    t.cost[j] = model.vars[j].obj;
  }
  for (int i = 0; i < t.m; ++i) {
    const Row& row = model.rows[i];
    t.rhs[i] = row.rhs;
    for (const auto& [j, v] : row.coeffs)
      if (v != 0.0) t.cols[j].push_back({i, v});
    const int sj = t.n + i;
    t.cols[sj].push_back({i, 1.0});
    switch (row.sense) {
      case RowSense::le:
        t.lb[sj] = 0.0;
        t.ub[sj] = kInf;
        break;
      case RowSense::ge:
        t.lb[sj] = -kInf;
        t.ub[sj] = 0.0;
        break;
      case RowSense::eq:
        t.lb[sj] = 0.0;
        t.ub[sj] = 0.0;
        break;
    }
  }
  return t;
}

struct Basis {
  std::vector<VStat> stat;       // per column
  std::vector<int> basic_cols;   // column basic in each row
};

class Simplex {
 public:
  Simplex(const Tableau& tab) : t_(tab) {}

  // Bounds may be tightened per solve (branching); nullptr keeps the model's.
  SolveStatus solve(const std::vector<double>* lb_override,
                    const std::vector<double>* ub_override, Basis* basis,
                    bool warm, Eigen::VectorXd* x_out, double* obj_out,
                    long* iters_out) {
    lb_ = lb_override ? *lb_override : t_.lb;
    ub_ = ub_override ? *ub_override : t_.ub;
    iterations_ = 0;

    if (warm && basis_consistent(*basis)) {
      stat_ = basis->stat;
      basic_cols_ = basis->basic_cols;
      // Only repair flags a bound change made meaningless; everything else
      // keeps the parent's side so the warm start stays close.
      for (int j = 0; j < t_.total; ++j) {
        if (stat_[j] == VStat::basic) continue;
        if (stat_[j] == VStat::at_ub && !std::isfinite(ub_[j]))
          stat_[j] = pick_bound(j);
      }
    } else {
      stat_.assign(t_.total, VStat::at_lb);
      basic_cols_.resize(t_.m);
      for (int j = 0; j < t_.n; ++j) stat_[j] = pick_bound(j);
      for (int i = 0; i < t_.m; ++i) {
        stat_[t_.n + i] = VStat::basic;
        basic_cols_[i] = t_.n + i;
      }
    }
    refactor();

    SolveStatus st = phase1();
    if (st == SolveStatus::optimal) st = phase2();
    if (st != SolveStatus::optimal) {
      if (iters_out) *iters_out = iterations_;
      return st;
    }

    refactor();  // clean residuals before extraction
    Eigen::VectorXd x(t_.total);
    for (int j = 0; j < t_.total; ++j) x(j) = nonbasic_value(j);
    for (int i = 0; i < t_.m; ++i) x(basic_cols_[i]) = xb_(i);
    double obj = 0.0;
    for (int j = 0; j < t_.n; ++j) obj += t_.cost[j] * x(j);
    if (x_out) *x_out = x.head(t_.n);
    if (obj_out) *obj_out = obj;
    if (iters_out) *iters_out = iterations_;
    if (basis) {
      basis->stat = stat_;
      basis->basic_cols = basic_cols_;
    }
    return SolveStatus::optimal;
  }

 private:
  bool basis_consistent(const Basis& b) const {
    if (static_cast<int>(b.stat.size()) != t_.total) return false;
    if (static_cast<int>(b.basic_cols.size()) != t_.m) return false;
    int basics = 0;
    for (const auto s : b.stat) basics += s == VStat::basic;
    return basics == t_.m;
  }

  VStat pick_bound(int j) const {
    if (std::isfinite(lb_[j])) {
      if (!std::isfinite(ub_[j])) return VStat::at_lb;
      return std::abs(lb_[j]) <= std::abs(ub_[j]) ? VStat::at_lb : VStat::at_ub;
    }
    if (std::isfinite(ub_[j])) return VStat::at_ub;
    return VStat::at_lb;  // free vars rest at 0
  }

  double nonbasic_value(int j) const {
    if (stat_[j] == VStat::at_ub) return ub_[j];
    if (std::isfinite(lb_[j])) return lb_[j];
    return std::isfinite(ub_[j]) ? ub_[j] : 0.0;
  }

  // Free nonbasics (parked at 0) may move either way.
  bool can_increase(int j) const {
    return stat_[j] != VStat::at_ub || !std::isfinite(ub_[j]);
  }
  bool can_decrease(int j) const {
    return stat_[j] != VStat::at_lb || !std::isfinite(lb_[j]);
  }

  void refactor() {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(t_.m, t_.m);
    for (int i = 0; i < t_.m; ++i)
      for (const auto& [r, v] : t_.cols[basic_cols_[i]]) b(r, i) = v;
    lu_.compute(b);
    etas_.clear();
    recompute_xb();
  }

  // Product-form inverse on top of the LU factors: B^-1 = Ek..E1 L^-1.
  struct Eta {
    int row;
    Eigen::VectorXd w;  // pivot column in the basis at creation time
  };

  Eigen::VectorXd apply_ftran(Eigen::VectorXd v) const {
    v = lu_.solve(v);
    for (const auto& eta : etas_) {
      const double t = v(eta.row) / eta.w(eta.row);
      if (t != 0.0) {
        v -= t * eta.w;
      }
      v(eta.row) = t;
    }
    return v;
  }

  Eigen::VectorXd apply_btran(Eigen::VectorXd v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      const double dot = it->w.dot(v);
      v(it->row) -= (dot - v(it->row)) / it->w(it->row);
    }
    return lu_.transpose().solve(v);
  }

  void recompute_xb() {
    Eigen::VectorXd r = Eigen::VectorXd::Map(t_.rhs.data(), t_.m);
    for (int j = 0; j < t_.total; ++j) {
      if (stat_[j] == VStat::basic) continue;
      const double v = nonbasic_value(j);
      if (v == 0.0) continue;
      for (const auto& [i, a] : t_.cols[j]) r(i) -= a * v;
    }
    xb_ = apply_ftran(std::move(r));
  }

  Eigen::VectorXd ftran(int j) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(t_.m);
    for (const auto& [i, a] : t_.cols[j]) w(i) += a;
    return apply_ftran(std::move(w));
  }

  double dot_col(const Eigen::VectorXd& y, int j) const {
    double d = 0.0;
    for (const auto& [i, a] : t_.cols[j]) d += y(i) * a;
    return d;
  }

  // Pivot entering column j (direction dir=+1 from lb, -1 from ub) against
  // basic row r moving by step. Standard product-form inverse update.
  void pivot(int j, int r, const Eigen::VectorXd& w, double step, int dir) {
    const int leaving = basic_cols_[r];
    const double xj_new = nonbasic_value(j) + dir * step;
    // Leaving variable lands on the bound it ran into.
    const double xl = xb_(r) - dir * step * w(r);
    stat_[leaving] =
        std::abs(xl - ub_[leaving]) < std::abs(xl - lb_[leaving])
            ? VStat::at_ub
            : VStat::at_lb;
    xb_ -= dir * step * w;
    xb_(r) = xj_new;
    basic_cols_[r] = j;
    stat_[j] = VStat::basic;
    etas_.push_back({r, w});
    if (static_cast<int>(etas_.size()) >= kRefactorEvery) refactor();
  }

  // Composite phase 1: drive the summed bound violation of the basics to
  // zero; works from any starting basis, which is what branching warm starts
  // need.
  SolveStatus phase1() {
    while (true) {
      if (++iterations_ > kIterCap) return SolveStatus::iteration_limit;
      double infeas = 0.0;
      Eigen::VectorXd sigma = Eigen::VectorXd::Zero(t_.m);
      for (int i = 0; i < t_.m; ++i) {
        const int j = basic_cols_[i];
        if (xb_(i) < lb_[j] - kFeasTol) {
          sigma(i) = 1.0;  // below: increasing xb reduces violation
          infeas += lb_[j] - xb_(i);
        } else if (xb_(i) > ub_[j] + kFeasTol) {
          sigma(i) = -1.0;
          infeas += xb_(i) - ub_[j];
        }
      }
      if (infeas <= kFeasTol * t_.m) return SolveStatus::optimal;

      const Eigen::VectorXd y = apply_btran(sigma);
      int enter = -1, dir = 0;
      double best = kCostTol;
      for (int j = 0; j < t_.total; ++j) {
        if (stat_[j] == VStat::basic) continue;
        if (lb_[j] == ub_[j]) continue;
        const double d = dot_col(y, j);  // dPhi/dt for a unit increase
        if (can_increase(j) && -d > best) {
          best = -d;
          enter = j;
          dir = 1;
        }
        if (can_decrease(j) && d > best) {
          best = d;
          enter = j;
          dir = -1;
        }
      }
      if (enter < 0) return SolveStatus::infeasible;

      const Eigen::VectorXd w = ftran(enter);
      // Blocking step: feasible basics must stay within bounds, infeasible
      // ones stop where they become feasible.
      double step = kInf;
      int block = -1;
      for (int i = 0; i < t_.m; ++i) {
        const double delta = -dir * w(i);
        if (std::abs(delta) < 1e-11) continue;
        const int bj = basic_cols_[i];
        double limit = kInf;
        if (sigma(i) == 0.0) {
          limit = delta > 0 ? (std::isfinite(ub_[bj])
                                   ? (ub_[bj] - xb_(i)) / delta
                                   : kInf)
                            : (std::isfinite(lb_[bj])
                                   ? (lb_[bj] - xb_(i)) / delta
                                   : kInf);
        } else if (sigma(i) > 0.0 && delta > 0) {
          limit = (lb_[bj] - xb_(i)) / delta;
        } else if (sigma(i) < 0.0 && delta < 0) {
          limit = (ub_[bj] - xb_(i)) / delta;
        }
        limit = std::max(0.0, limit);
        if (limit < step - 1e-12 ||
            (limit < step + 1e-12 && (block < 0 || bj < basic_cols_[block]))) {
          step = limit;
          block = i;
        }
      }
      const double range = ub_[enter] - lb_[enter];
      if (range <= step && std::isfinite(range)) {
        // Bound flip, no basis change.
        stat_[enter] = dir > 0 ? VStat::at_ub : VStat::at_lb;
        xb_ -= dir * range * w;
        continue;
      }
      if (block < 0) return SolveStatus::infeasible;  // cannot reduce further
      pivot(enter, block, w, step, dir);
    }
  }

  SolveStatus phase2() {
    long stall = 0;
    double last_obj = kInf;
    bool bland = false;
    while (true) {
      if (++iterations_ > kIterCap) return SolveStatus::iteration_limit;
      Eigen::VectorXd cb(t_.m);
      for (int i = 0; i < t_.m; ++i) cb(i) = t_.cost[basic_cols_[i]];
      const Eigen::VectorXd y = apply_btran(std::move(cb));

      int enter = -1, dir = 0;
      double best = kCostTol * (1.0 + cost_scale());
      for (int j = 0; j < t_.total; ++j) {
        if (stat_[j] == VStat::basic || lb_[j] == ub_[j]) continue;
        const double d = t_.cost[j] - dot_col(y, j);
        if (can_increase(j) && -d > best) {
          best = -d;
          enter = j;
          dir = 1;
          if (bland) break;
        }
        if (can_decrease(j) && d > best) {
          best = d;
          enter = j;
          dir = -1;
          if (bland) break;
        }
      }
      if (enter < 0) return SolveStatus::optimal;

      const Eigen::VectorXd w = ftran(enter);
      double step = kInf;
      int block = -1;
      for (int i = 0; i < t_.m; ++i) {
        const double delta = -dir * w(i);
        if (std::abs(delta) < 1e-11) continue;
        const int bj = basic_cols_[i];
        double limit = kInf;
        if (delta > 0 && std::isfinite(ub_[bj]))
          limit = (ub_[bj] - xb_(i) + kFeasTol) / delta;
        else if (delta < 0 && std::isfinite(lb_[bj]))
          limit = (lb_[bj] - xb_(i) - kFeasTol) / delta;
        limit = std::max(0.0, limit);
        if (limit < step - 1e-12 ||
            (limit < step + 1e-12 && (block < 0 || bj < basic_cols_[block]))) {
          step = limit;
          block = i;
        }
      }
      const double range = ub_[enter] - lb_[enter];
      if (std::isfinite(range) && range <= step) {
        stat_[enter] = dir > 0 ? VStat::at_ub : VStat::at_lb;
        xb_ -= dir * range * w;
        continue;
      }
      if (block < 0) return SolveStatus::unbounded;
      pivot(enter, block, w, step, dir);

      double obj = 0.0;
      for (int i = 0; i < t_.m; ++i) obj += t_.cost[basic_cols_[i]] * xb_(i);
      if (obj < last_obj - 1e-12) {
        last_obj = obj;
        stall = 0;
        bland = false;
      } else if (++stall > 2L * t_.m) {
        bland = true;  // anti-cycling fallback
      }
    }
  }

  double cost_scale() const {
    double s = 0.0;
    for (const double c : t_.cost) s = std::max(s, std::abs(c));
    return s;
  }

  const Tableau& t_;
  std::vector<double> lb_, ub_;
  std::vector<VStat> stat_;
  std::vector<int> basic_cols_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  std::vector<Eta> etas_;
  Eigen::VectorXd xb_;
  long iterations_ = 0;
};

struct Node {
  double bound;
  int branch_var;  // tie-break after bound
  long id;
  std::vector<std::pair<int, double>> fixes;  // (var, value)
  Basis basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.branch_var != b.branch_var) return a.branch_var > b.branch_var;
    return a.id > b.id;
  }
};

}  // namespace

int Model::add_var(const std::string& vname, double vlb, double vub,
                   double vobj, bool is_binary) {
  vars.push_back({vname, vlb, vub, vobj, is_binary});
  return static_cast<int>(vars.size()) - 1;
}

void Model::add_row(const std::string& rname, RowSense sense, double rhs_value,
                    std::vector<std::pair<int, double>> coeffs) {
  std::sort(coeffs.begin(), coeffs.end());
  rows.push_back({rname, std::move(coeffs), sense, rhs_value});
}

void Model::validate() const {
  for (const auto& v : vars) {
    if (!(v.lb <= v.ub))
      throw Error(ErrorCode::invalid_argument,
                  "variable " + v.name + ": lb > ub");
    if (!std::isfinite(v.obj))
      throw Error(ErrorCode::invalid_argument,
                  "variable " + v.name + ": non-finite objective");
    if (v.is_binary && (v.lb < 0.0 || v.ub > 1.0))
      throw Error(ErrorCode::invalid_argument,
                  "binary " + v.name + ": bounds outside [0,1]");
  }
  for (const auto& r : rows) {
    if (!std::isfinite(r.rhs))
      throw Error(ErrorCode::invalid_argument, "row " + r.name + ": bad rhs");
    for (const auto& [j, v] : r.coeffs) {
      if (j < 0 || j >= static_cast<int>(vars.size()) || !std::isfinite(v))
        throw Error(ErrorCode::invalid_argument,
                    "row " + r.name + ": bad coefficient");
    }
  }
}

LpResult solve_lp(const Model& model) {
  model.validate();
  const Tableau tab = build_tableau(model);
  Simplex simplex(tab);
  LpResult res;
  Basis basis;
  res.status = simplex.solve(nullptr, nullptr, &basis, false, &res.x,
                             &res.objective, &res.iterations);
  return res;
}

MilpResult solve_milp(const Model& model, double gap_tol,
                      const std::vector<std::pair<int, double>>* mip_start) {
  model.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Tableau tab = build_tableau(model);
  Simplex simplex(tab);

  std::vector<int> binaries;
  for (int j = 0; j < static_cast<int>(model.vars.size()); ++j)
    if (model.vars[j].is_binary) binaries.push_back(j);

  MilpResult res;
  const auto finish = [&](SolveStatus st) {
    res.status = st;
    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return res;
  };

  const auto solve_with_fixes =
      [&](const std::vector<std::pair<int, double>>& fixes, Basis* basis,
          bool warm, Eigen::VectorXd* x, double* obj) {
        std::vector<double> lb = tab.lb, ub = tab.ub;
        for (const auto& [j, v] : fixes) {
          lb[j] = v;
          ub[j] = v;
        }
        long it = 0;
        const SolveStatus st = simplex.solve(&lb, &ub, basis, warm, x, obj, &it);
        res.lp_iterations += it;
        return st;
      };

  // Branch where the relaxation profits most from fractional commitment:
  // fractionality weighted by the variable's objective coefficient.
  const auto fractional = [&](const Eigen::VectorXd& x) {
    int worst = -1;
    double score = 0.0;
    for (const int j : binaries) {
      const double f = std::abs(x(j) - std::round(x(j)));
      if (f <= kIntTol) continue;
      const double s = f * std::max(1.0, std::abs(model.vars[j].obj));
      if (s > score) {
        score = s;
        worst = j;
      }
    }
    return worst;
  };

  double incumbent = kInf;
  Eigen::VectorXd incumbent_x;

  // Root relaxation.
  Node root;
  root.id = 0;
  root.branch_var = -1;
  Eigen::VectorXd x;
  double obj = 0.0;
  {
    const SolveStatus st = solve_with_fixes({}, &root.basis, false, &x, &obj);
    ++res.nodes;
    if (st == SolveStatus::infeasible) return finish(SolveStatus::infeasible);
    if (st != SolveStatus::optimal) return finish(st);
    root.bound = obj;
  }

  // Caller-provided start pattern seeds the incumbent.
  if (mip_start && !mip_start->empty()) {
    Basis sb = root.basis;
    Eigen::VectorXd sx;
    double sobj = 0.0;
    if (solve_with_fixes(*mip_start, &sb, true, &sx, &sobj) ==
            SolveStatus::optimal &&
        sobj < incumbent) {
      incumbent = sobj;
      incumbent_x = sx;
    }
  }

  // Rounding heuristics for an early incumbent; without one, best-bound
  // search cannot prune at all. Nearest rounding first, then rounding every
  // fractional binary up, then everything on.
  if (fractional(x) >= 0) {
    for (int attempt = 0; attempt < 3 && !std::isfinite(incumbent);
         ++attempt) {
      std::vector<std::pair<int, double>> fixes;
      for (const int j : binaries) {
        double v = 0.0;
        if (attempt == 0)
          v = std::round(x(j));
        else if (attempt == 1)
          v = x(j) > kIntTol ? 1.0 : 0.0;
        else
          v = 1.0;
        fixes.push_back({j, v});
      }
      Basis hb = root.basis;
      Eigen::VectorXd hx;
      double hobj = 0.0;
      if (solve_with_fixes(fixes, &hb, true, &hx, &hobj) ==
          SolveStatus::optimal) {
        incumbent = hobj;
        incumbent_x = hx;
      }
    }
  } else {
    incumbent = obj;
    incumbent_x = x;
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 1;
  {
    const int bv = fractional(x);
    if (bv < 0) {
      if (obj < incumbent) {
        incumbent = obj;
        incumbent_x = x;
      }
    } else {
      for (const double v : {0.0, 1.0}) {
        Node child = root;
        child.id = next_id++;
        child.branch_var = bv;
        child.fixes.push_back({bv, v});
        open.push(std::move(child));
      }
    }
  }

  const auto gap_ok = [&](double bound) {
    return incumbent - bound <= gap_tol * std::max(1.0, std::abs(incumbent));
  };

  double best_bound = incumbent;
#ifdef GSP2P_MILP_TRACE
  long traced = 0;
#endif
  while (!open.empty()) {
    Node node = open.top();
    open.pop();
#ifdef GSP2P_MILP_TRACE
    if (++traced % 25 == 0)
      std::fprintf(stderr, "nodes=%ld open=%zu bound=%.2f incumbent=%.2f\n",
                   res.nodes, open.size(), node.bound, incumbent);
#endif
    if (std::isfinite(incumbent) && gap_ok(node.bound)) {
      best_bound = node.bound;
      break;
    }

    Basis basis = node.basis;
    const SolveStatus st = solve_with_fixes(node.fixes, &basis, true, &x, &obj);
    ++res.nodes;
    if (st == SolveStatus::infeasible) continue;
    if (st != SolveStatus::optimal) return finish(st);
    if (std::isfinite(incumbent) && gap_ok(obj)) continue;

    const int bv = fractional(x);
    if (bv < 0) {
      if (obj < incumbent) {
        incumbent = obj;
        incumbent_x = x;
      }
      continue;
    }

    // Periodic plunge: round the node relaxation to chase the incumbent
    // down; best-bound alone rarely reaches integral leaves in deep trees.
    if (res.nodes % 16 == 1) {
      std::vector<std::pair<int, double>> fixes = node.fixes;
      std::vector<bool> fixed(model.vars.size(), false);
      for (const auto& [j, v] : fixes) fixed[j] = true;
      for (const int j : binaries)
        if (!fixed[j]) fixes.push_back({j, x(j) > 0.5 ? 1.0 : 0.0});
      Basis hb = basis;
      Eigen::VectorXd hx;
      double hobj = 0.0;
      if (solve_with_fixes(fixes, &hb, true, &hx, &hobj) ==
              SolveStatus::optimal &&
          hobj < incumbent) {
        incumbent = hobj;
        incumbent_x = hx;
      }
    }

    for (const double v : {0.0, 1.0}) {
      Node child;
      child.bound = obj;
      child.branch_var = bv;
      child.id = next_id++;
      child.fixes = node.fixes;
      child.fixes.push_back({bv, v});
      child.basis = basis;
      open.push(std::move(child));
    }
  }

  if (!std::isfinite(incumbent)) return finish(SolveStatus::infeasible);
  res.objective = incumbent;
  res.x = incumbent_x;
  res.gap = std::max(0.0, (incumbent - best_bound) /
                              std::max(1.0, std::abs(incumbent)));
  return finish(SolveStatus::optimal);
}

}  // namespace gsp2p::milp
