#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

namespace gsp2p::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : char { le = 'L', ge = 'G', eq = 'E' };

struct Variable {
  std::string name;
  double lb = 0.0;
  double ub = kInf;
  double obj = 0.0;
  bool is_binary = false;
};

struct Row {
  std::string name;
  std::vector<std::pair<int, double>> coeffs;  // (column, value), sorted
  RowSense sense = RowSense::le;
  double rhs = 0.0;
};

struct Model {
  std::string name = "model";
  std::vector<Variable> vars;
  std::vector<Row> rows;

  int add_var(const std::string& name, double lb, double ub, double obj,
              bool is_binary = false);
  void add_row(const std::string& name, RowSense sense, double rhs,
               std::vector<std::pair<int, double>> coeffs);
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
  SolveStatus status = SolveStatus::infeasible;
  double objective = 0.0;
  Eigen::VectorXd x;
  long iterations = 0;
};

struct MilpResult {
  SolveStatus status = SolveStatus::infeasible;
  double objective = 0.0;
  Eigen::VectorXd x;
  long nodes = 0;
  long lp_iterations = 0;
  double gap = 0.0;
  double wall_time_s = 0.0;
};

// Dense bounded-variable simplex (two-phase primal). Binary markers are
// ignored: binaries relax to their [0,1] range unless bounds say otherwise.
LpResult solve_lp(const Model& model);

// Best-bound branch and bound over the binaries, ties broken by variable
// index; deterministic for identical inputs. A caller-provided start fixes
// binaries to a known-good pattern and seeds the incumbent.
MilpResult solve_milp(const Model& model, double gap_tol = 1e-6,
                      const std::vector<std::pair<int, double>>* mip_start =
                          nullptr);

}  // namespace gsp2p::milp
