#include "gsp2p/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gsp2p/errors.hpp"
#include "gsp2p/system_model.hpp"

namespace gsp2p {

namespace {

std::string tag(const std::string& prefix, int a, int b) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%d_t%02d", prefix.c_str(), a, b);
  return buf;
}

std::vector<double> group_capacity(const FleetDescription& fleet,
                                   const std::vector<SgGroup>& groups,
                                   const Commitment& commitment) {
  std::vector<double> y(groups.size(), 0.0);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (const int i : groups[g].sg_indices)
      if (commitment[i]) y[g] += fleet.sgs[i].rating_mw;
  return y;
}

// Dynamic program over per-group committed-unit counts. Units inside a group
// are interchangeable, so the count vector is a complete commitment state;
// startup costs price the transitions. For such fleets this lands on (or
// extremely near) the MILP optimum and seeds the branch-and-bound incumbent.
std::vector<Commitment> dp_commitment(const UcInstance& inst,
                                      const std::vector<double>& fixed_reserve) {
  const auto& fleet = inst.fleet;
  const std::vector<SgGroup> groups = derive_groups(fleet);
  const int ngroups = static_cast<int>(groups.size());
  const double pb = fleet.p_base_mw;
  const double dpl_pu = inst.dpl_mw / pb;

  // Enumerate count states (mixed radix).
  std::vector<int> radix(ngroups);
  long nstates = 1;
  for (int g = 0; g < ngroups; ++g) {
    radix[g] = static_cast<int>(groups[g].sg_indices.size()) + 1;
    nstates *= radix[g];
    if (nstates > 4096) return {};  // fall back to plain branch and bound
  }
  const auto counts_of = [&](long s) {
    std::vector<int> c(ngroups);
    for (int g = 0; g < ngroups; ++g) {
      c[g] = static_cast<int>(s % radix[g]);
      s /= radix[g];
    }
    return c;
  };

  struct GroupData {
    double rating, p_min, p_max, noload, marginal, startup;
    double m_w, dr_w;  // inertia and damping+droop weights per unit (p.u.)
  };
  std::vector<GroupData> gd(ngroups);
  for (int g = 0; g < ngroups; ++g) {
    const auto& sg = fleet.sgs[groups[g].sg_indices.front()];
    gd[g] = {sg.rating_mw,
             sg.p_min_mw,
             sg.p_max_mw,
             sg.cost_noload,
             sg.cost_marginal,
             sg.cost_startup,
             sg.inertia_s * sg.rating_mw / pb,
             (sg.damping_pu + sg.governor_gain / sg.droop_pu) * sg.rating_mw /
                 pb};
  }
  std::vector<int> merit(ngroups);
  std::iota(merit.begin(), merit.end(), 0);
  std::sort(merit.begin(), merit.end(),
            [&](int a, int b) { return gd[a].marginal < gd[b].marginal; });

  const CommitmentScreens screens =
      commitment_screens(inst.limits, dpl_pu, fleet.f_base_hz);

  // State screens and curve requirements are period-independent.
  std::vector<bool> admissible(nstates, true);
  std::vector<double> requirement(nstates, 0.0);
  for (long s = 0; s < nstates; ++s) {
    const auto c = counts_of(s);
    double inertia = 0.0, droop = 0.0;
    std::vector<double> y(ngroups);
    for (int g = 0; g < ngroups; ++g) {
      inertia += c[g] * gd[g].m_w;
      droop += c[g] * gd[g].dr_w;
      y[g] = c[g] * gd[g].rating;
    }
    if (inst.mode != UcMode::base &&
        (inertia < screens.min_inertia_pu - 1e-12 ||
         droop < screens.min_droop_pu - 1e-12))
      admissible[s] = false;
    if (inst.curve && admissible[s])
      requirement[s] = pb * predict_min_headroom(*inst.curve, y);
  }

  const double big = 1e30;
  std::vector<double> cost(nstates, big);
  std::vector<std::vector<long>> parent(inst.periods,
                                        std::vector<long>(nstates, -1));

  std::vector<int> init_counts(ngroups, 0);
  if (!inst.initial_on.empty())
    for (int g = 0; g < ngroups; ++g)
      for (const int i : groups[g].sg_indices)
        if (inst.initial_on[i]) ++init_counts[g];

  const auto period_cost = [&](int t, const std::vector<int>& c) {
    double w_ub_sum = 0.0, slack_sum = 0.0;
    for (std::size_t cv = 0; cv < fleet.converters.size(); ++cv) {
      double limit = fleet.converters[cv].p_limit_mw;
      if (!fixed_reserve.empty()) limit -= fixed_reserve[cv];
      const double w_ub =
          std::min(inst.wind_available_mw[t][cv], std::max(0.0, limit));
      w_ub_sum += w_ub;
      slack_sum += std::max(0.0, limit - w_ub);
    }
    long s = 0;
    for (int g = ngroups - 1; g >= 0; --g) s = s * radix[g] + c[g];
    if (!admissible[s]) return big;
    // Reserve displaces wind only when the idle converter capacity cannot
    // hold it.
    const double wind_max =
        w_ub_sum - std::max(0.0, requirement[s] - slack_sum);
    double p_min_sum = 0.0, p_max_sum = 0.0, fixed = 0.0;
    for (int g = 0; g < ngroups; ++g) {
      p_min_sum += c[g] * gd[g].p_min;
      p_max_sum += c[g] * gd[g].p_max;
      fixed += c[g] * gd[g].noload * inst.period_hours;
    }
    if (p_min_sum > inst.demand_mw[t] + 1e-9) return big;
    if (p_max_sum + std::max(0.0, wind_max) < inst.demand_mw[t] - 1e-9)
      return big;
    const double wind_use =
        std::min(std::max(0.0, wind_max), inst.demand_mw[t] - p_min_sum);
    double sg_gen = inst.demand_mw[t] - wind_use;
    double cost_t = fixed;
    for (int g = 0; g < ngroups; ++g)
      cost_t += c[g] * gd[g].p_min * gd[g].marginal * inst.period_hours;
    double remaining = sg_gen - p_min_sum;
    for (const int g : merit) {
      const double room = c[g] * (gd[g].p_max - gd[g].p_min);
      const double take = std::min(remaining, room);
      cost_t += take * gd[g].marginal * inst.period_hours;
      remaining -= take;
    }
    return cost_t;
  };

  for (int t = 0; t < inst.periods; ++t) {
    std::vector<double> next(nstates, big);
    for (long s = 0; s < nstates; ++s) {
      const auto c = counts_of(s);
      const double pc = period_cost(t, c);
      if (pc >= big) continue;
      if (t == 0) {
        double start_cost = 0.0;
        for (int g = 0; g < ngroups; ++g)
          start_cost += gd[g].startup * std::max(0, c[g] - init_counts[g]);
        next[s] = pc + start_cost;
        parent[t][s] = -1;
        continue;
      }
      for (long sp = 0; sp < nstates; ++sp) {
        if (cost[sp] >= big) continue;
        const auto cp = counts_of(sp);
        double trans = 0.0;
        for (int g = 0; g < ngroups; ++g)
          trans += gd[g].startup * std::max(0, c[g] - cp[g]);
        const double total = cost[sp] + trans + pc;
        if (total < next[s]) {
          next[s] = total;
          parent[t][s] = sp;
        }
      }
    }
    cost = std::move(next);
  }

  long best = -1;
  for (long s = 0; s < nstates; ++s)
    if (cost[s] < big && (best < 0 || cost[s] < cost[best])) best = s;
  if (best < 0) return {};

  std::vector<Commitment> plan(inst.periods,
                               Commitment(fleet.sgs.size(), false));
  long s = best;
  for (int t = inst.periods - 1; t >= 0; --t) {
    const auto c = counts_of(s);
    for (int g = 0; g < ngroups; ++g)
      for (int k = 0; k < c[g]; ++k)
        plan[t][groups[g].sg_indices[k]] = true;
    s = parent[t][s];
  }
  return plan;
}

}  // namespace

CommitmentScreens commitment_screens(const FrequencyLimits& limits,
                                     double dpl_pu, double f_base_hz) {
  if (limits.rocof_lim_hz_s <= 0.0 || limits.w_ss_lim_hz <= 0.0 ||
      limits.w_lim_hz <= 0.0)
    throw Error(ErrorCode::invalid_argument, "limits must be positive");
  CommitmentScreens s;
  s.min_inertia_pu = dpl_pu / (limits.rocof_lim_hz_s / f_base_hz);
  s.min_droop_pu = dpl_pu / (limits.w_ss_lim_hz / f_base_hz);
  return s;
}

void UcInstance::validate() const {
  fleet.validate();
  if (periods <= 0)
    throw Error(ErrorCode::invalid_argument, "periods must be positive");
  if (static_cast<int>(demand_mw.size()) != periods)
    throw Error(ErrorCode::invalid_argument, "demand length != periods");
  for (const double d : demand_mw)
    if (d <= 0.0)
      throw Error(ErrorCode::invalid_argument, "demand must be positive");
  if (static_cast<int>(wind_available_mw.size()) != periods)
    throw Error(ErrorCode::invalid_argument, "wind profile length != periods");
  for (const auto& row : wind_available_mw)
    if (row.size() != fleet.converters.size())
      throw Error(ErrorCode::invalid_argument,
                  "wind profile width != converter count");
  if (dpl_mw < 0.0)
    throw Error(ErrorCode::invalid_argument, "negative disturbance");
  if (mode == UcMode::proposed_linear && !curve)
    throw Error(ErrorCode::invalid_argument,
                "proposed_linear mode requires a headroom curve");
  if (mode != UcMode::proposed_linear && curve)
    throw Error(ErrorCode::invalid_argument,
                "headroom curve only valid in proposed_linear mode");
  if (mode == UcMode::analytic_relaxed && !fixed_gain)
    throw Error(ErrorCode::invalid_argument,
                "analytic_relaxed mode requires fixed gains");
  if (mode != UcMode::analytic_relaxed && fixed_gain)
    throw Error(ErrorCode::invalid_argument,
                "fixed gains only valid in analytic_relaxed mode");
  if (!initial_on.empty() && initial_on.size() != fleet.sgs.size())
    throw Error(ErrorCode::invalid_argument, "initial_on length mismatch");
}

UcBuild build_uc(const UcInstance& instance) {
  instance.validate();
  const auto& fleet = instance.fleet;
  const int T = instance.periods;
  const int ng = static_cast<int>(fleet.sgs.size());
  const int nc = static_cast<int>(fleet.converters.size());
  const double pb = fleet.p_base_mw;
  const double dpl_pu = instance.dpl_mw / pb;
  const double h = instance.period_hours;

  UcBuild b;
  b.model.name = "uc";
  b.u.assign(T, std::vector<int>(ng, -1));
  b.v.assign(T, std::vector<int>(ng, -1));
  b.p.assign(T, std::vector<int>(ng, -1));
  b.w.assign(T, std::vector<int>(nc, -1));
  b.r.assign(T, std::vector<int>(nc, -1));
  b.r_total.assign(T, -1);

  // Fixed per-converter reserves of the analytic relaxation: the frozen gains
  // allocated in proportion to the converter power limits.
  if (instance.mode == UcMode::analytic_relaxed) {
    const double w_lim_pu = instance.limits.w_lim_hz / fleet.f_base_hz;
    const double rocof_lim_pu =
        instance.limits.rocof_lim_hz_s / fleet.f_base_hz;
    double limit_sum = 0.0;
    for (const auto& c : fleet.converters) limit_sum += c.p_limit_mw;
    b.fixed_reserve_mw.resize(nc);
    for (int c = 0; c < nc; ++c) {
      const double share = fleet.converters[c].p_limit_mw / limit_sum;
      const ControllerGain gc{instance.fixed_gain->k1 * share,
                              instance.fixed_gain->k2 * share};
      b.fixed_reserve_mw[c] =
          relaxed_effort_bound(gc, 0.0, w_lim_pu, rocof_lim_pu) * pb;
      if (b.fixed_reserve_mw[c] > fleet.converters[c].p_limit_mw + 1e-9)
        throw Error(ErrorCode::infeasible,
                    "fixed-gain reserve exceeds converter limit " +
                        fleet.converters[c].id);
    }
  }

  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < ng; ++i) {
      const auto& g = fleet.sgs[i];
      b.u[t][i] = b.model.add_var(tag("u", i, t), 0, 1, g.cost_noload * h, true);
      b.v[t][i] = b.model.add_var(tag("v", i, t), 0, 1, g.cost_startup, false);
      b.p[t][i] =
          b.model.add_var(tag("p", i, t), 0, g.p_max_mw, g.cost_marginal * h,
                          false);
    }
    for (int c = 0; c < nc; ++c) {
      double cap = std::min(instance.wind_available_mw[t][c],
                            fleet.converters[c].p_limit_mw);
      if (instance.mode == UcMode::analytic_relaxed)
        cap = std::min(cap,
                       fleet.converters[c].p_limit_mw - b.fixed_reserve_mw[c]);
      b.w[t][c] = b.model.add_var(tag("w", c, t), 0, std::max(0.0, cap), 0.0,
                                  false);
    }
    if (instance.mode == UcMode::proposed_linear) {
      double limit_sum = 0.0;
      for (int c = 0; c < nc; ++c) {
        b.r[t][c] = b.model.add_var(tag("r", c, t), 0,
                                    fleet.converters[c].p_limit_mw, 0.0, false);
        limit_sum += fleet.converters[c].p_limit_mw;
      }
      b.r_total[t] = b.model.add_var(tag("R", 0, t), 0, limit_sum, 0.0, false);
    }
  }

  const CommitmentScreens screens =
      commitment_screens(instance.limits, dpl_pu, fleet.f_base_hz);
  const std::vector<SgGroup> groups = derive_groups(fleet);
  if (instance.mode == UcMode::proposed_linear &&
      instance.curve->group_names.size() != groups.size())
    throw Error(ErrorCode::invalid_argument,
                "headroom curve groups do not match the fleet");

  for (int t = 0; t < T; ++t) {
    // Presolve capacity check: commitment cannot cover demand.
    double cap = 0.0;
    for (int i = 0; i < ng; ++i) cap += fleet.sgs[i].p_max_mw;
    for (int c = 0; c < nc; ++c) cap += b.model.vars[b.w[t][c]].ub;
    if (cap < instance.demand_mw[t] - 1e-9)
      throw Error(ErrorCode::infeasible,
                  "demand exceeds available capacity in period " +
                      std::to_string(t));

    std::vector<std::pair<int, double>> balance;
    for (int i = 0; i < ng; ++i) balance.push_back({b.p[t][i], 1.0});
    for (int c = 0; c < nc; ++c) balance.push_back({b.w[t][c], 1.0});
    b.model.add_row(tag("bal", 0, t), milp::RowSense::eq,
                    instance.demand_mw[t], std::move(balance));

    for (int i = 0; i < ng; ++i) {
      const auto& g = fleet.sgs[i];
      b.model.add_row(tag("pmax", i, t), milp::RowSense::le, 0.0,
                      {{b.p[t][i], 1.0}, {b.u[t][i], -g.p_max_mw}});
      b.model.add_row(tag("pmin", i, t), milp::RowSense::ge, 0.0,
                      {{b.p[t][i], 1.0}, {b.u[t][i], -g.p_min_mw}});
      if (t == 0) {
        const double init =
            instance.initial_on.empty() ? 0.0 : (instance.initial_on[i] ? 1.0 : 0.0);
        b.model.add_row(tag("start", i, t), milp::RowSense::ge, -init,
                        {{b.v[t][i], 1.0}, {b.u[t][i], -1.0}});
      } else {
        b.model.add_row(
            tag("start", i, t), milp::RowSense::ge, 0.0,
            {{b.v[t][i], 1.0}, {b.u[t][i], -1.0}, {b.u[t - 1][i], 1.0}});
      }
    }

    if (instance.mode != UcMode::base) {
      std::vector<std::pair<int, double>> rocof, droop;
      for (int i = 0; i < ng; ++i) {
        const auto& g = fleet.sgs[i];
        const double wgt = g.rating_mw / pb;
        rocof.push_back({b.u[t][i], g.inertia_s * wgt});
        droop.push_back(
            {b.u[t][i],
             (g.damping_pu + g.governor_gain / g.droop_pu) * wgt});
      }
      b.model.add_row(tag("rocof", 0, t), milp::RowSense::ge,
                      screens.min_inertia_pu, std::move(rocof));
      b.model.add_row(tag("ss", 0, t), milp::RowSense::ge, screens.min_droop_pu,
                      std::move(droop));
    }

    if (instance.mode == UcMode::proposed_linear) {
      for (int c = 0; c < nc; ++c)
        b.model.add_row(tag("cap", c, t), milp::RowSense::le,
                        fleet.converters[c].p_limit_mw,
                        {{b.w[t][c], 1.0}, {b.r[t][c], 1.0}});
      std::vector<std::pair<int, double>> sum_row{{b.r_total[t], -1.0}};
      for (int c = 0; c < nc; ++c) sum_row.push_back({b.r[t][c], 1.0});
      b.model.add_row(tag("rsum", 0, t), milp::RowSense::eq, 0.0,
                      std::move(sum_row));
      // R >= p_base * (sum_g k_g y_g + k_0), y in MW of committed rating.
      std::vector<std::pair<int, double>> curve_row{{b.r_total[t], 1.0}};
      for (std::size_t g = 0; g < groups.size(); ++g)
        for (const int i : groups[g].sg_indices)
          curve_row.push_back(
              {b.u[t][i],
               -pb * instance.curve->k_i[g] * fleet.sgs[i].rating_mw});
      b.model.add_row(tag("curve", 0, t), milp::RowSense::ge,
                      pb * instance.curve->k_0, std::move(curve_row));
    }
  }
  return b;
}

UcSolution solve_uc(const UcInstance& instance, double gap_tol) {
  const UcBuild b = build_uc(instance);
  const std::vector<Commitment> plan =
      dp_commitment(instance, b.fixed_reserve_mw);
  std::vector<std::pair<int, double>> start;
  for (int t = 0; t < instance.periods && t < (int)plan.size(); ++t)
    for (std::size_t i = 0; i < instance.fleet.sgs.size(); ++i)
      start.push_back({b.u[t][i], plan[t][i] ? 1.0 : 0.0});
  const milp::MilpResult res =
      milp::solve_milp(b.model, gap_tol, start.empty() ? nullptr : &start);
  if (res.status == milp::SolveStatus::infeasible)
    throw Error(ErrorCode::infeasible, "unit commitment infeasible");
  if (res.status != milp::SolveStatus::optimal)
    throw Error(ErrorCode::numeric, "unit commitment did not solve to optimality");

  const int T = instance.periods;
  const int ng = static_cast<int>(instance.fleet.sgs.size());
  const int nc = static_cast<int>(instance.fleet.converters.size());
  UcSolution sol;
  sol.commitment.assign(T, Commitment(ng, false));
  sol.dispatch_mw.assign(T, std::vector<double>(ng, 0.0));
  sol.wind_used_mw.assign(T, std::vector<double>(nc, 0.0));
  sol.wind_curtailed_mw.assign(T, std::vector<double>(nc, 0.0));
  sol.headroom_mw.assign(T, std::vector<double>(nc, 0.0));
  sol.headroom_total_mw.assign(T, 0.0);
  sol.implied_reserve_mw.assign(T, 0.0);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < ng; ++i) {
      sol.commitment[t][i] = res.x(b.u[t][i]) > 0.5;
      sol.dispatch_mw[t][i] = sol.commitment[t][i] ? res.x(b.p[t][i]) : 0.0;
    }
    for (int c = 0; c < nc; ++c) {
      sol.wind_used_mw[t][c] = res.x(b.w[t][c]);
      sol.wind_curtailed_mw[t][c] = std::max(
          0.0, instance.wind_available_mw[t][c] - sol.wind_used_mw[t][c]);
      if (instance.mode == UcMode::proposed_linear) {
        sol.headroom_mw[t][c] = res.x(b.r[t][c]);
        sol.headroom_total_mw[t] += sol.headroom_mw[t][c];
      }
    }
    if (instance.mode == UcMode::analytic_relaxed)
      sol.implied_reserve_mw[t] = std::accumulate(
          b.fixed_reserve_mw.begin(), b.fixed_reserve_mw.end(), 0.0);
  }
  sol.cost = res.objective;
  sol.stats = {res.nodes, res.lp_iterations, res.wall_time_s};
  return sol;
}

double UcSolution::balance_residual_mw(const UcInstance& instance) const {
  double worst = 0.0;
  for (int t = 0; t < instance.periods; ++t) {
    double sum = 0.0;
    for (const double p : dispatch_mw[t]) sum += p;
    for (const double w : wind_used_mw[t]) sum += w;
    worst = std::max(worst, std::abs(sum - instance.demand_mw[t]));
  }
  return worst;
}

ControllerGain median_point_gain(const UcInstance& instance) {
  std::vector<double> demand = instance.demand_mw;
  std::sort(demand.begin(), demand.end());
  const double target = demand[(demand.size() - 1) / 2];

  // Merit-order commitment up to the median demand.
  std::vector<int> order(instance.fleet.sgs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int bdx) {
    const auto& ga = instance.fleet.sgs[a];
    const auto& gb = instance.fleet.sgs[bdx];
    if (ga.cost_marginal != gb.cost_marginal)
      return ga.cost_marginal < gb.cost_marginal;
    return ga.id < gb.id;
  });
  Commitment commitment(instance.fleet.sgs.size(), false);
  double cap = 0.0;
  for (const int i : order) {
    if (cap >= target) break;
    commitment[i] = true;
    cap += instance.fleet.sgs[i].p_max_mw;
  }

  OperatingPoint point;
  point.commitment = commitment;
  const double w_lim_pu = instance.limits.w_lim_hz / instance.fleet.f_base_hz;
  const double dpl_pu = instance.dpl_mw / instance.fleet.p_base_mw;
  const HeadroomSample sample =
      headroom_for_point(instance.fleet, point, w_lim_pu, dpl_pu);
  return sample.synthesis.gain;
}

std::vector<ConverterGain> allocate_gains(const ControllerGain& system_gain,
                                          const std::vector<double>& headroom) {
  double total = 0.0;
  for (const double h : headroom) total += h;
  const bool have_gain =
      system_gain.k1 != 0.0 || system_gain.k2 != 0.0;
  if (total <= 0.0) {
    if (have_gain)
      throw Error(ErrorCode::invalid_argument, "no headroom to allocate");
    return std::vector<ConverterGain>(headroom.size());
  }
  std::vector<ConverterGain> gains(headroom.size());
  for (std::size_t c = 0; c < headroom.size(); ++c) {
    const double share = headroom[c] / total;
    gains[c] = {system_gain.k1 * share, system_gain.k2 * share};
  }
  return gains;
}

RedispatchResult redispatch(const UcInstance& instance,
                            const UcSolution& stage1,
                            const std::vector<std::vector<double>>& realized_wind_mw,
                            const RedispatchOptions& opts) {
  instance.validate();
  if (static_cast<int>(realized_wind_mw.size()) != instance.periods)
    throw Error(ErrorCode::invalid_argument, "realized wind length mismatch");
  const auto& fleet = instance.fleet;
  const int ng = static_cast<int>(fleet.sgs.size());
  const int nc = static_cast<int>(fleet.converters.size());
  const double pb = fleet.p_base_mw;
  const double dpl_pu = instance.dpl_mw / pb;
  const std::vector<SgGroup> groups = derive_groups(fleet);

  RedispatchResult out;
  for (int t = 0; t < instance.periods; ++t) {
    const Commitment& commit = stage1.commitment[t];

    double requirement_mw = 0.0;
    if (instance.curve) {
      const std::vector<double> y = group_capacity(fleet, groups, commit);
      requirement_mw = pb * predict_min_headroom(*instance.curve, y);
    }

    milp::Model lp;
    lp.name = "redispatch";
    std::vector<int> pj(ng, -1), wj(nc, -1), rj(nc, -1);
    for (int i = 0; i < ng; ++i) {
      if (!commit[i]) continue;
      pj[i] = lp.add_var(tag("p", i, t), fleet.sgs[i].p_min_mw,
                         fleet.sgs[i].p_max_mw,
                         fleet.sgs[i].cost_marginal * instance.period_hours);
    }
    for (int c = 0; c < nc; ++c) {
      double cap = std::min(realized_wind_mw[t][c],
                            fleet.converters[c].p_limit_mw);
      if (opts.freeze_allocation)
        cap = std::min(cap, fleet.converters[c].p_limit_mw -
                                stage1.headroom_mw[t][c]);
      wj[c] = lp.add_var(tag("w", c, t), 0.0, std::max(0.0, cap), 0.0);
    }
    const int shed =
        lp.add_var(tag("shed", 0, t), 0.0, milp::kInf,
                   opts.shed_penalty_per_mwh * instance.period_hours);

    std::vector<std::pair<int, double>> balance{{shed, 1.0}};
    for (int i = 0; i < ng; ++i)
      if (pj[i] >= 0) balance.push_back({pj[i], 1.0});
    for (int c = 0; c < nc; ++c) balance.push_back({wj[c], 1.0});
    lp.add_row(tag("bal", 0, t), milp::RowSense::eq, instance.demand_mw[t],
               std::move(balance));

    if (!opts.freeze_allocation && requirement_mw > 0.0) {
      std::vector<std::pair<int, double>> req;
      for (int c = 0; c < nc; ++c) {
        rj[c] = lp.add_var(tag("r", c, t), 0.0,
                           fleet.converters[c].p_limit_mw, 0.0);
        lp.add_row(tag("cap", c, t), milp::RowSense::le,
                   fleet.converters[c].p_limit_mw,
                   {{wj[c], 1.0}, {rj[c], 1.0}});
        req.push_back({rj[c], 1.0});
      }
      lp.add_row(tag("req", 0, t), milp::RowSense::ge, requirement_mw,
                 std::move(req));
    }

    const milp::LpResult res = milp::solve_lp(lp);
    if (res.status != milp::SolveStatus::optimal)
      throw Error(ErrorCode::numeric,
                  "redispatch LP failed in period " + std::to_string(t));

    PeriodRedispatch pr;
    pr.dispatch_mw.assign(ng, 0.0);
    pr.wind_used_mw.assign(nc, 0.0);
    pr.headroom_mw.assign(nc, 0.0);
    for (int i = 0; i < ng; ++i)
      if (pj[i] >= 0) pr.dispatch_mw[i] = res.x(pj[i]);
    for (int c = 0; c < nc; ++c) pr.wind_used_mw[c] = res.x(wj[c]);
    if (opts.freeze_allocation) {
      pr.headroom_mw = stage1.headroom_mw[t];
    } else if (requirement_mw > 0.0) {
      for (int c = 0; c < nc; ++c) pr.headroom_mw[c] = res.x(rj[c]);
    }
    pr.shed_mw = res.x(shed);

    // Commitment costs carried over so stage totals stay comparable.
    double fixed_cost = 0.0;
    for (int i = 0; i < ng; ++i) {
      if (commit[i]) fixed_cost += fleet.sgs[i].cost_noload * instance.period_hours;
      const bool was_on =
          t == 0 ? (!instance.initial_on.empty() && instance.initial_on[i])
                 : stage1.commitment[t - 1][i];
      if (commit[i] && !was_on) fixed_cost += fleet.sgs[i].cost_startup;
    }
    pr.cost = res.objective + fixed_cost;

    if (opts.record_synthesis) {
      const AggregateModel agg = aggregate_fleet(fleet, commit);
      double budget = 0.0;
      for (const double r : pr.headroom_mw) budget += r;
      const SynthesisResult synth =
          gains_for_budget(agg, dpl_pu, budget / pb);
      pr.gains = allocate_gains(synth.gain, pr.headroom_mw);
    }

    out.cost += pr.cost;
    out.shed_mw_total += pr.shed_mw;
    out.periods.push_back(std::move(pr));
  }
  return out;
}

}  // namespace gsp2p
