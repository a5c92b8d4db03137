#pragma once

#include <optional>
#include <vector>

#include "gsp2p/headroom.hpp"
#include "gsp2p/milp.hpp"
#include "gsp2p/simulator.hpp"
#include "gsp2p/types.hpp"

namespace gsp2p {

enum class UcMode { base, proposed_linear, analytic_relaxed };

// Conservative SG-only commitment screens: virtual support only helps, so
// requiring the committed SGs alone to satisfy the RoCoF and steady-state
// limits is sufficient and keeps the rows linear in the binaries.
struct CommitmentScreens {
  double min_inertia_pu = 0.0;  // M_g >= dpl / rocof_lim
  double min_droop_pu = 0.0;    // D_g + R_g >= dpl / w_ss_lim
};
CommitmentScreens commitment_screens(const FrequencyLimits& limits,
                                     double dpl_pu, double f_base_hz);

struct UcInstance {
  int periods = 24;
  double period_hours = 1.0;
  std::vector<double> demand_mw;                        // per period
  std::vector<std::vector<double>> wind_available_mw;   // [period][converter]
  FleetDescription fleet;
  FrequencyLimits limits;
  double dpl_mw = 0.0;
  UcMode mode = UcMode::base;
  std::optional<HeadroomCurve> curve;        // proposed_linear only
  std::optional<ControllerGain> fixed_gain;  // analytic_relaxed only
  Commitment initial_on;                     // state before period 0

  void validate() const;
};

struct UcSolveStats {
  long nodes = 0;
  long lp_iterations = 0;
  double wall_time_s = 0.0;
};

struct UcSolution {
  std::vector<Commitment> commitment;              // [period][sg]
  std::vector<std::vector<double>> dispatch_mw;    // [period][sg]
  std::vector<std::vector<double>> wind_used_mw;   // [period][converter]
  std::vector<std::vector<double>> wind_curtailed_mw;
  std::vector<std::vector<double>> headroom_mw;    // [period][converter]
  std::vector<double> headroom_total_mw;           // [period]
  std::vector<double> implied_reserve_mw;          // [period], fixed-gain mode
  double cost = 0.0;
  UcSolveStats stats;

  double balance_residual_mw(const UcInstance& instance) const;
};

// MILP assembly with the index maps needed to decode a solution vector.
struct UcBuild {
  milp::Model model;
  // Variable index lookups, -1 where a block is absent in the mode.
  std::vector<std::vector<int>> u, v, p;     // [period][sg]
  std::vector<std::vector<int>> w, r;        // [period][converter]
  std::vector<int> r_total;                  // [period]
  std::vector<double> fixed_reserve_mw;      // per converter, fixed-gain mode
};

UcBuild build_uc(const UcInstance& instance);

UcSolution solve_uc(const UcInstance& instance, double gap_tol = 1e-6);

// Deterministic pre-defined-control anchor for the fixed-gain baseline:
// commit in merit order up to the median demand, then take the gains whose
// nadir bound sits exactly at the limit there.
ControllerGain median_point_gain(const UcInstance& instance);

// Proportional split of the system gain over converters by headroom share;
// the parts always sum back to the system gain.
std::vector<ConverterGain> allocate_gains(const ControllerGain& system_gain,
                                          const std::vector<double>& headroom);

struct RedispatchOptions {
  bool freeze_allocation = false;  // per-converter reserves pinned to stage 1
  bool record_synthesis = false;   // run per-period synthesis + gain split
  double shed_penalty_per_mwh = 2e4;
};

struct PeriodRedispatch {
  std::vector<double> dispatch_mw;   // per sg
  std::vector<double> wind_used_mw;  // per converter
  std::vector<double> headroom_mw;   // per converter
  double shed_mw = 0.0;
  double cost = 0.0;  // commitment costs included for comparability
  std::vector<ConverterGain> gains;  // populated when recording synthesis
};

struct RedispatchResult {
  std::vector<PeriodRedispatch> periods;
  double cost = 0.0;
  double shed_mw_total = 0.0;
};

// Second stage: commitments frozen, per-period LPs against realized wind.
// With a curve present the headroom requirement is re-evaluated at the
// unchanged commitment point and any surplus is released to energy; with
// freeze_allocation the stage-1 per-converter reserves are kept as-is.
RedispatchResult redispatch(const UcInstance& instance,
                            const UcSolution& stage1,
                            const std::vector<std::vector<double>>& realized_wind_mw,
                            const RedispatchOptions& opts);

}  // namespace gsp2p
