#include "gsp2p/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "gsp2p/errors.hpp"
#include "gsp2p/lp_format.hpp"
#include "gsp2p/system_model.hpp"
#include "gsp2p/version.hpp"

namespace gsp2p {

namespace {

namespace fs = std::filesystem;
using io::json;

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct Study {
  io::StudyConfig cfg;
  FleetDescription fleet;
  std::vector<SgGroup> groups;
  double dpl_mw = 0.0;
  double dpl_pu = 0.0;
  double w_lim_pu = 0.0;
  double ss_lim_pu = 0.0;
  double rocof_lim_pu = 0.0;
  std::string out;
  int jobs = 1;
  std::uint64_t seed = 1;
};

Study load_study(const io::StudyConfig& cfg, const PipelineOptions& opts) {
  Study s;
  s.cfg = cfg;
  s.fleet = io::load_fleet(cfg.fleet_path);
  s.dpl_mw = cfg.disturbance_mw.value_or(s.fleet.disturbance_mw);
  if (s.dpl_mw <= 0.0)
    throw Error(ErrorCode::invalid_argument,
                "disturbance must be positive (set disturbance_mw)");
  s.dpl_pu = s.dpl_mw / s.fleet.p_base_mw;
  s.w_lim_pu = cfg.limits.w_lim_hz / s.fleet.f_base_hz;
  s.ss_lim_pu = cfg.limits.w_ss_lim_hz / s.fleet.f_base_hz;
  s.rocof_lim_pu = cfg.limits.rocof_lim_hz_s / s.fleet.f_base_hz;

  if (cfg.groups) {
    for (std::size_t g = 0; g < cfg.groups->size(); ++g) {
      SgGroup group;
      group.name = "y" + std::to_string(g + 1);
      for (const auto& id : (*cfg.groups)[g]) {
        int found = -1;
        for (std::size_t i = 0; i < s.fleet.sgs.size(); ++i)
          if (s.fleet.sgs[i].id == id) found = static_cast<int>(i);
        if (found < 0)
          throw Error(ErrorCode::invalid_argument, "unknown SG id " + id);
        group.sg_indices.push_back(found);
      }
      s.groups.push_back(std::move(group));
    }
  } else {
    s.groups = derive_groups(s.fleet);
  }

  s.out = opts.out_dir_override.empty() ? cfg.output_dir : opts.out_dir_override;
  if (s.out.empty()) s.out = "out";
  fs::create_directories(s.out);
  s.jobs = opts.jobs;
  s.seed = opts.seed;
  return s;
}

std::string out_path(const Study& s, const std::string& name) {
  return (fs::path(s.out) / name).string();
}

std::vector<int> merit_order(const FleetDescription& fleet) {
  std::vector<int> order(fleet.sgs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (fleet.sgs[a].cost_marginal != fleet.sgs[b].cost_marginal)
      return fleet.sgs[a].cost_marginal < fleet.sgs[b].cost_marginal;
    return fleet.sgs[a].id < fleet.sgs[b].id;
  });
  return order;
}

Commitment point_commitment(const Study& s, double capacity_target_mw) {
  Commitment commit(s.fleet.sgs.size(), true);
  if (capacity_target_mw < 0.0) return commit;
  commit.assign(s.fleet.sgs.size(), false);
  double cap = 0.0;
  for (const int i : merit_order(s.fleet)) {
    if (cap >= capacity_target_mw) break;
    commit[i] = true;
    cap += s.fleet.sgs[i].p_max_mw;
  }
  if (cap == 0.0)
    throw Error(ErrorCode::invalid_argument, "capacity target commits no SG");
  return commit;
}

// The synthesis shown by point commands: explicit b1 when given, otherwise
// the weight where the nadir bound meets the deviation limit.
SynthesisResult point_synthesis(const Study& s, const Commitment& commit,
                                double b1_weight) {
  const AggregateModel agg = aggregate_fleet(s.fleet, commit);
  if (b1_weight > 0.0)
    return synthesize_gains(agg, s.dpl_pu, b1_weight);
  OperatingPoint point;
  point.commitment = commit;
  return headroom_for_point(s.fleet, point, s.w_lim_pu, s.dpl_pu, s.cfg.b1_range)
      .synthesis;
}

json point_metrics_json(const Study& s, const AggregateModel& agg,
                        const ClosedLoopParams& cl) {
  const double f = s.fleet.f_base_hz;
  json doc;
  doc["aggregate"] = {{"m_g", agg.m_g}, {"d_g", agg.d_g},  {"f_g", agg.f_g},
                      {"r_g", agg.r_g}, {"t_s", agg.t}};
  doc["closed_loop"] = {{"m", cl.m},
                        {"d", cl.d},
                        {"omega_n_rad_s", cl.omega_n},
                        {"zeta", cl.zeta},
                        {"omega_d_rad_s", cl.omega_d},
                        {"phi_rad", cl.phi}};
  doc["metrics"] = {
      {"nadir_time_s", nadir_time(cl, agg.t)},
      {"nadir_hz", analytic_nadir(cl, agg, s.dpl_pu) * f},
      {"max_rocof_hz_s", max_rocof(cl, s.dpl_pu) * f},
      {"steady_state_hz", steady_state_deviation(cl, agg, s.dpl_pu) * f}};
  return doc;
}

void write_gain_iterations_csv(const Study& s, const SynthesisResult& r) {
  std::string csv = "iteration,k1,k2,alpha,a_scale,objective,error\n";
  for (std::size_t k = 0; k < r.history.size(); ++k) {
    const auto& it = r.history[k];
    csv += std::to_string(k + 1) + "," + fmt(it.gain.k1) + "," +
           fmt(it.gain.k2) + "," + fmt(it.alpha) + "," + fmt(it.a_scale) + "," +
           fmt(it.objective) + "," + fmt(it.error) + "\n";
  }
  io::write_text_file(out_path(s, "gains_iterations.csv"), csv);
}

void write_ellipse_csv(const Study& s, const AggregateModel& agg,
                       const SynthesisResult& r) {
  // Display convention: dips are negative, axes in SI.
  const double f = s.fleet.f_base_hz;
  const double scale = r.dpl_pu * f;
  std::string csv = "kind,x1_hz,x2_hz_s\n";
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(r.p);
  const Eigen::Matrix2d sqrt_p =
      es.eigenvectors() *
      es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
      es.eigenvectors().transpose();
  for (int k = 0; k <= 256; ++k) {
    const double th = 2.0 * M_PI * k / 256.0;
    const Eigen::Vector2d b =
        sqrt_p * Eigen::Vector2d(std::cos(th), std::sin(th));
    csv += "ellipse," + fmt(-b(0) * scale) + "," + fmt(-b(1) * scale) + "\n";
  }
  const SimulationConfig sim{s.cfg.sim_dt_s, s.cfg.sim_horizon_s};
  const Trace trace = simulate_aggregate(agg, r.gain, r.dpl_pu, sim);
  const CoordinateShift shift = make_shift(agg, r.gain, r.a_star);
  for (std::size_t i = 0; i < trace.t.size(); i += 20) {
    const double x1 = trace.omega[i] / r.dpl_pu - shift.x_vec(0);
    const double x2 = trace.omega_dot[i] / r.dpl_pu - shift.x_vec(1);
    csv += "trajectory," + fmt(-x1 * scale) + "," + fmt(-x2 * scale) + "\n";
  }
  const CoordinateShift sh0 = make_shift(agg, r.gain, r.a_star);
  csv += "initial," + fmt(-sh0.x0_shifted(0) * scale) + "," +
         fmt(-sh0.x0_shifted(1) * scale) + "\n";
  io::write_text_file(out_path(s, "ellipse.csv"), csv);
}

struct Profiles {
  std::vector<double> demand;
  std::vector<std::vector<double>> wind;
};

Profiles load_profiles(const Study& s) {
  if (s.cfg.demand_path.empty() || s.cfg.wind_path.empty())
    throw Error(ErrorCode::invalid_argument,
                "this command needs demand and wind profiles in the config");
  Profiles p;
  p.demand = io::load_demand_csv(s.cfg.demand_path);
  p.wind = io::load_wind_csv(s.cfg.wind_path, s.fleet);
  if (p.wind.size() != p.demand.size())
    throw Error(ErrorCode::parse, "demand and wind profiles disagree on length");
  return p;
}

UcInstance make_instance(const Study& s, const Profiles& profiles, UcMode mode,
                         double wind_scale) {
  UcInstance inst;
  inst.fleet = s.fleet;
  for (auto& c : inst.fleet.converters) {
    c.rating_mw *= wind_scale;
    c.p_limit_mw *= wind_scale;
  }
  inst.periods = static_cast<int>(profiles.demand.size());
  inst.demand_mw = profiles.demand;
  inst.wind_available_mw = profiles.wind;
  for (auto& row : inst.wind_available_mw)
    for (auto& v : row) v *= wind_scale;
  inst.limits = s.cfg.limits;
  inst.dpl_mw = s.dpl_mw;
  inst.mode = mode;
  return inst;
}

HeadroomCurve load_curve(const Study& s) {
  const std::string path = out_path(s, "curve.json");
  if (!fs::exists(path))
    throw Error(ErrorCode::invalid_argument,
                "no headroom curve found; run headroom-curve first");
  return io::curve_from_json(json::parse(io::read_text_file(path)));
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

json cmd_aggregate(const Study& s, const PipelineOptions& opts,
                   std::vector<std::string>& artifacts) {
  const Commitment commit = point_commitment(s, opts.capacity_target_mw);
  const AggregateModel agg = aggregate_fleet(s.fleet, commit);
  const ClosedLoopParams cl = closed_loop_params(agg, 0.0, 0.0);
  json doc = point_metrics_json(s, agg, cl);
  doc["committed"] = json::array();
  for (std::size_t i = 0; i < commit.size(); ++i)
    if (commit[i]) doc["committed"].push_back(s.fleet.sgs[i].id);
  io::write_text_file(out_path(s, "aggregate.json"), doc.dump(2) + "\n");
  artifacts.push_back("aggregate.json");
  return doc;
}

json cmd_synthesize(const Study& s, const PipelineOptions& opts,
                    std::vector<std::string>& artifacts) {
  const Commitment commit = point_commitment(s, opts.capacity_target_mw);
  const AggregateModel agg = aggregate_fleet(s.fleet, commit);
  const SynthesisResult r = point_synthesis(s, commit, opts.b1_weight);
  json doc = io::synthesis_to_json(r);
  doc["effort_bound_mw"] = r.effort_bound * s.fleet.p_base_mw;
  doc["nadir_bound_hz"] = r.nadir_bound * s.fleet.f_base_hz;
  io::write_text_file(out_path(s, "synthesis.json"), doc.dump(2) + "\n");
  write_gain_iterations_csv(s, r);
  write_ellipse_csv(s, agg, r);
  artifacts.insert(artifacts.end(),
                   {"synthesis.json", "gains_iterations.csv", "ellipse.csv"});
  return doc;
}

json cmd_bounds(const Study& s, const PipelineOptions& opts,
                std::vector<std::string>& artifacts) {
  const Commitment commit = point_commitment(s, opts.capacity_target_mw);
  const AggregateModel agg = aggregate_fleet(s.fleet, commit);
  const SynthesisResult r = point_synthesis(s, commit, opts.b1_weight);
  const SimulationConfig sim{s.cfg.sim_dt_s, s.cfg.sim_horizon_s};
  const Trace trace = simulate_aggregate(agg, r.gain, r.dpl_pu, sim);
  const TraceMetrics metrics = trace_metrics(trace);
  const double relaxed =
      relaxed_effort_bound(r.gain, 0.0, s.w_lim_pu, s.rocof_lim_pu);

  json doc;
  doc["gain"] = {r.gain.k1, r.gain.k2};
  doc["effort_bound_pu"] = r.effort_bound;
  doc["nadir_bound_pu"] = r.nadir_bound;
  doc["relaxed_bound_pu"] = relaxed;
  doc["simulated"] = {{"max_injection_pu", metrics.max_injection},
                      {"nadir_pu", metrics.nadir},
                      {"nadir_hz", metrics.nadir * s.fleet.f_base_hz},
                      {"t_m_s", metrics.t_m}};
  doc["effort_tightness"] =
      metrics.max_injection > 0 ? r.effort_bound / metrics.max_injection : 1.0;
  doc["relaxed_over_p2p"] =
      r.effort_bound > 0 ? relaxed / r.effort_bound : 0.0;
  io::write_text_file(out_path(s, "bounds.json"), doc.dump(2) + "\n");
  artifacts.push_back("bounds.json");
  return doc;
}

json cmd_headroom_curve(const Study& s, const PipelineOptions&,
                        std::vector<std::string>& artifacts) {
  const SweepOutcome sweep = run_headroom_sweep(
      s.fleet, s.groups, s.cfg.headroom_levels_per_group, s.w_lim_pu,
      s.ss_lim_pu, s.rocof_lim_pu, s.dpl_pu, s.cfg.b1_range, s.jobs);

  json doc = io::curve_to_json(sweep.curve, s.fleet);
  doc["zero_samples"] = static_cast<int>(sweep.zero_samples.size());
  doc["infeasible_points"] = static_cast<int>(sweep.infeasible.size());
  io::write_text_file(out_path(s, "curve.json"), doc.dump(2) + "\n");

  std::string csv;
  for (const auto& g : sweep.curve.group_names) csv += g + "_mw,";
  csv += "y_total_mw,m_pu,m_mw,fit_mw,in_fit,b1_at_limit,k1,k2\n";
  const auto add_row = [&](const HeadroomSample& sample, bool in_fit) {
    double y_total = 0.0;
    for (const double y : sample.point.y_mw) {
      csv += fmt(y) + ",";
      y_total += y;
    }
    const double fit_mw =
        predict_min_headroom(sweep.curve, sample.point.y_mw) *
        s.fleet.p_base_mw;
    csv += fmt(y_total) + "," + fmt(sample.m_pu) + "," +
           fmt(sample.m_pu * s.fleet.p_base_mw) + "," + fmt(fit_mw) + "," +
           (in_fit ? "1" : "0") + "," + fmt(sample.b1_at_limit) + "," +
           fmt(sample.synthesis.gain.k1) + "," + fmt(sample.synthesis.gain.k2) +
           "\n";
  };
  for (const auto& sample : sweep.curve.samples) add_row(sample, true);
  for (const auto& sample : sweep.zero_samples) add_row(sample, false);
  io::write_text_file(out_path(s, "headroom_sweep.csv"), csv);

  // Trade-off sweep at the median-demand operating point.
  if (!s.cfg.demand_path.empty()) {
    std::vector<double> demand = io::load_demand_csv(s.cfg.demand_path);
    std::sort(demand.begin(), demand.end());
    const Commitment commit =
        point_commitment(s, demand[(demand.size() - 1) / 2]);
    const AggregateModel agg = aggregate_fleet(s.fleet, commit);
    std::string tcsv = "b1,effort_bound_pu,nadir_bound_pu\n";
    for (int k = 0; k < 12; ++k) {
      const double b1 =
          s.cfg.b1_range.first *
          std::pow(s.cfg.b1_range.second / s.cfg.b1_range.first, k / 11.0);
      const SynthesisResult r = synthesize_gains(agg, s.dpl_pu, b1);
      tcsv += fmt(b1) + "," + fmt(r.effort_bound) + "," + fmt(r.nadir_bound) +
              "\n";
    }
    io::write_text_file(out_path(s, "tradeoff.csv"), tcsv);
    artifacts.push_back("tradeoff.csv");
  }

  artifacts.insert(artifacts.end(), {"curve.json", "headroom_sweep.csv"});
  doc["samples_fitted"] = static_cast<int>(sweep.curve.samples.size());
  return doc;
}

json solve_and_export(const Study& s, const UcInstance& inst,
                      const std::string& stem,
                      std::vector<std::string>& artifacts, UcSolution* out) {
  const UcBuild build = build_uc(inst);
  milp::write_lp_file(build.model, out_path(s, stem + ".lp"));
  artifacts.push_back(stem + ".lp");
  const UcSolution sol = solve_uc(inst, s.cfg.uc_gap);
  json doc = io::solution_to_json(sol, inst);

  std::string csv =
      "period,demand_mw,sg_dispatch_mw,wind_used_mw,wind_curtailed_mw,"
      "headroom_mw,implied_reserve_mw,committed_capacity_mw\n";
  for (int t = 0; t < inst.periods; ++t) {
    double sg_sum = 0.0, wind = 0.0, curt = 0.0, cap = 0.0;
    for (const double p : sol.dispatch_mw[t]) sg_sum += p;
    for (const double w : sol.wind_used_mw[t]) wind += w;
    for (const double w : sol.wind_curtailed_mw[t]) curt += w;
    for (std::size_t i = 0; i < inst.fleet.sgs.size(); ++i)
      if (sol.commitment[t][i]) cap += inst.fleet.sgs[i].rating_mw;
    csv += std::to_string(t) + "," + fmt(inst.demand_mw[t]) + "," +
           fmt(sg_sum) + "," + fmt(wind) + "," + fmt(curt) + "," +
           fmt(sol.headroom_total_mw[t]) + "," +
           fmt(sol.implied_reserve_mw[t]) + "," + fmt(cap) + "\n";
  }
  io::write_text_file(out_path(s, stem + "_dispatch.csv"), csv);
  artifacts.push_back(stem + "_dispatch.csv");
  if (out) *out = sol;
  return doc;
}

json cmd_schedule(const Study& s, const PipelineOptions&,
                  std::vector<std::string>& artifacts) {
  const Profiles profiles = load_profiles(s);

  // The configured mode at nominal wind capacity is the primary artifact.
  UcInstance inst = make_instance(s, profiles, s.cfg.mode, 1.0);
  if (s.cfg.mode == UcMode::proposed_linear) inst.curve = load_curve(s);
  if (s.cfg.mode == UcMode::analytic_relaxed)
    inst.fixed_gain = median_point_gain(inst);
  UcSolution solution;
  json doc = solve_and_export(s, inst, "solution", artifacts, &solution);
  io::write_text_file(out_path(s, "solution.json"), doc.dump(2) + "\n");
  artifacts.push_back("solution.json");

  // Cost / reserve comparison across modes and installed wind capacities.
  std::string cost_csv =
      "wind_capacity_mw,cost_base,cost_proposed_linear,cost_analytic_relaxed\n";
  std::string res_csv =
      "wind_capacity_mw,reserve_proposed_linear,reserve_analytic_relaxed\n";
  json comparison = json::array();
  for (const double scale : s.cfg.wind_scales) {
    double capacity = 0.0;
    for (const auto& c : s.fleet.converters) capacity += c.p_limit_mw * scale;
    json entry;
    entry["wind_capacity_mw"] = capacity;
    double cost_base = 0.0, cost_pl = 0.0, cost_ar = 0.0;
    double reserve_pl = 0.0, reserve_ar = 0.0;
    {
      UcInstance i2 = make_instance(s, profiles, UcMode::base, scale);
      cost_base = solve_uc(i2, s.cfg.uc_gap).cost;
    }
    {
      UcInstance i2 = make_instance(s, profiles, UcMode::proposed_linear, scale);
      i2.curve = load_curve(s);
      const UcSolution sol = solve_uc(i2, s.cfg.uc_gap);
      cost_pl = sol.cost;
      reserve_pl = mean(sol.headroom_total_mw);
    }
    {
      UcInstance i2 = make_instance(s, profiles, UcMode::analytic_relaxed, scale);
      i2.fixed_gain = median_point_gain(i2);
      const UcSolution sol = solve_uc(i2, s.cfg.uc_gap);
      cost_ar = sol.cost;
      reserve_ar = mean(sol.implied_reserve_mw);
    }
    cost_csv += fmt(capacity) + "," + fmt(cost_base) + "," + fmt(cost_pl) +
                "," + fmt(cost_ar) + "\n";
    res_csv += fmt(capacity) + "," + fmt(reserve_pl) + "," + fmt(reserve_ar) +
               "\n";
    entry["cost_base"] = cost_base;
    entry["cost_proposed_linear"] = cost_pl;
    entry["cost_analytic_relaxed"] = cost_ar;
    entry["reserve_proposed_linear_mw"] = reserve_pl;
    entry["reserve_analytic_relaxed_mw"] = reserve_ar;
    comparison.push_back(std::move(entry));
  }
  io::write_text_file(out_path(s, "cost_comparison.csv"), cost_csv);
  io::write_text_file(out_path(s, "reserve_comparison.csv"), res_csv);
  artifacts.insert(artifacts.end(),
                   {"cost_comparison.csv", "reserve_comparison.csv"});
  doc["comparison"] = std::move(comparison);
  return doc;
}

json cmd_redispatch(const Study& s, const PipelineOptions&,
                    std::vector<std::string>& artifacts) {
  const Profiles profiles = load_profiles(s);
  UcInstance inst = make_instance(s, profiles, UcMode::proposed_linear, 1.0);
  inst.curve = load_curve(s);
  const std::string sol_path = out_path(s, "solution.json");
  if (!fs::exists(sol_path))
    throw Error(ErrorCode::invalid_argument,
                "no stage-1 solution found; run schedule first");
  const UcSolution stage1 = io::solution_from_json(
      json::parse(io::read_text_file(sol_path)), inst);

  std::vector<double> p_limits;
  for (const auto& c : inst.fleet.converters) p_limits.push_back(c.p_limit_mw);

  std::string csv =
      "sigma_over_mu,scenario,cost_redesign,cost_frozen,shed_redesign_mw,"
      "shed_frozen_mw\n";
  json doc;
  doc["levels"] = json::array();
  bool recorded = false;
  for (const double sigma : s.cfg.sigma_over_mu) {
    const auto scenarios = io::wind_scenarios(inst.wind_available_mw, p_limits,
                                              sigma, s.cfg.scenarios, s.seed);
    double sum_redesign = 0.0, sum_frozen = 0.0;
    for (int sc = 0; sc < s.cfg.scenarios; ++sc) {
      RedispatchOptions redesign_opts;
      redesign_opts.record_synthesis = !recorded;
      const RedispatchResult redesign =
          redispatch(inst, stage1, scenarios[sc], redesign_opts);
      RedispatchOptions frozen_opts;
      frozen_opts.freeze_allocation = true;
      const RedispatchResult frozen =
          redispatch(inst, stage1, scenarios[sc], frozen_opts);
      sum_redesign += redesign.cost;
      sum_frozen += frozen.cost;
      csv += fmt(sigma) + "," + std::to_string(sc) + "," + fmt(redesign.cost) +
             "," + fmt(frozen.cost) + "," + fmt(redesign.shed_mw_total) + "," +
             fmt(frozen.shed_mw_total) + "\n";

      if (!recorded) {
        // Ex-post guarantee record on the first scenario: simulate the
        // re-synthesized loop in every period.
        recorded = true;
        json record = json::array();
        const SimulationConfig sim{s.cfg.sim_dt_s, s.cfg.sim_horizon_s};
        for (int t = 0; t < inst.periods; ++t) {
          const auto& pr = redesign.periods[t];
          ControllerGain total;
          for (const auto& g : pr.gains) {
            total.k1 += g.k1;
            total.k2 += g.k2;
          }
          const AggregateModel agg =
              aggregate_fleet(inst.fleet, stage1.commitment[t]);
          const Trace trace = simulate_aggregate(agg, total, s.dpl_pu, sim);
          const TraceMetrics m = trace_metrics(trace);
          double headroom = 0.0;
          for (const double r : pr.headroom_mw) headroom += r;
          record.push_back(
              {{"period", t},
               {"nadir_hz", m.nadir * s.fleet.f_base_hz},
               {"max_injection_mw", m.max_injection * s.fleet.p_base_mw},
               {"headroom_mw", headroom},
               {"nadir_ok", m.nadir <= s.w_lim_pu + 1e-9},
               {"injection_ok",
                m.max_injection * s.fleet.p_base_mw <= headroom + 1e-6}});
        }
        doc["ex_post_check"] = std::move(record);
      }
    }
    doc["levels"].push_back({{"sigma_over_mu", sigma},
                             {"mean_cost_redesign", sum_redesign / s.cfg.scenarios},
                             {"mean_cost_frozen", sum_frozen / s.cfg.scenarios}});
  }
  io::write_text_file(out_path(s, "redispatch.csv"), csv);
  io::write_text_file(out_path(s, "redispatch.json"), doc.dump(2) + "\n");
  artifacts.insert(artifacts.end(), {"redispatch.csv", "redispatch.json"});
  return doc;
}

json cmd_simulate(const Study& s, const PipelineOptions& opts,
                  std::vector<std::string>& artifacts) {
  const Commitment commit = point_commitment(s, opts.capacity_target_mw);
  const AggregateModel agg = aggregate_fleet(s.fleet, commit);
  const SimulationConfig sim{s.cfg.sim_dt_s, s.cfg.sim_horizon_s};

  const Trace open_loop = simulate_aggregate(agg, {}, s.dpl_pu, sim);
  write_trace_csv(open_loop, out_path(s, "trace_open.csv"), s.fleet.p_base_mw,
                  s.fleet.f_base_hz);
  const SynthesisResult r = point_synthesis(s, commit, opts.b1_weight);
  const Trace closed = simulate_aggregate(agg, r.gain, s.dpl_pu, sim);
  write_trace_csv(closed, out_path(s, "trace_closed.csv"), s.fleet.p_base_mw,
                  s.fleet.f_base_hz);

  const TraceMetrics mo = trace_metrics(open_loop);
  const TraceMetrics mc = trace_metrics(closed);
  json doc;
  doc["open_loop"] = {{"nadir_hz", mo.nadir * s.fleet.f_base_hz},
                      {"t_m_s", mo.t_m},
                      {"max_rocof_hz_s", mo.max_rocof * s.fleet.f_base_hz}};
  doc["closed_loop"] = {{"nadir_hz", mc.nadir * s.fleet.f_base_hz},
                        {"t_m_s", mc.t_m},
                        {"max_rocof_hz_s", mc.max_rocof * s.fleet.f_base_hz},
                        {"max_injection_mw",
                         mc.max_injection * s.fleet.p_base_mw},
                        {"gain", {r.gain.k1, r.gain.k2}}};
  doc["limit_hz"] = s.cfg.limits.w_lim_hz;
  io::write_text_file(out_path(s, "simulate.json"), doc.dump(2) + "\n");
  artifacts.insert(artifacts.end(),
                   {"trace_open.csv", "trace_closed.csv", "simulate.json"});
  return doc;
}

}  // namespace

ReportBundle run_pipeline(const io::StudyConfig& cfg, const std::string& command,
                          const PipelineOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  Study study = load_study(cfg, opts);
  ReportBundle bundle;
  try {
    if (command == "aggregate")
      bundle.result = cmd_aggregate(study, opts, bundle.artifacts);
    else if (command == "synthesize")
      bundle.result = cmd_synthesize(study, opts, bundle.artifacts);
    else if (command == "bounds")
      bundle.result = cmd_bounds(study, opts, bundle.artifacts);
    else if (command == "headroom-curve")
      bundle.result = cmd_headroom_curve(study, opts, bundle.artifacts);
    else if (command == "schedule")
      bundle.result = cmd_schedule(study, opts, bundle.artifacts);
    else if (command == "redispatch")
      bundle.result = cmd_redispatch(study, opts, bundle.artifacts);
    else if (command == "simulate")
      bundle.result = cmd_simulate(study, opts, bundle.artifacts);
    else if (command == "report") {
      bundle.artifacts = render_reports(study.out);
      bundle.result = {{"written", bundle.artifacts}};
    } else {
      throw Error(ErrorCode::invalid_argument, "unknown command " + command);
    }
  } catch (const Error& e) {
    throw Error(e.code(), command + ": " + e.what());
  }

  json meta;
  meta["command"] = command;
  meta["version"] = kVersion;
  meta["config_hash"] = io::config_hash(io::config_to_json(study.cfg));
  meta["seed"] = study.seed;
  meta["jobs"] = study.jobs;
  meta["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  io::write_text_file(out_path(study, "run_meta.json"), meta.dump(2) + "\n");
  return bundle;
}

}  // namespace gsp2p
