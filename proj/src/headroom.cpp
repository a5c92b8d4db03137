#include "gsp2p/headroom.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <iostream>
#include <map>
#include <thread>

#include "gsp2p/conic.hpp"
#include "gsp2p/errors.hpp"
#include "gsp2p/system_model.hpp"

namespace gsp2p {

namespace {

constexpr double kNadirTolRel = 1e-4;
constexpr int kBisectionCap = 40;

struct Probe {
  double b1 = 0.0;
  SynthesisResult synthesis;
};

HeadroomSample make_sample(const OperatingPoint& point, const Probe& probe) {
  HeadroomSample s;
  s.point = point;
  s.m_pu = probe.synthesis.effort_bound;
  s.b1_at_limit = probe.b1;
  s.synthesis = probe.synthesis;
  return s;
}

}  // namespace

std::vector<SgGroup> derive_groups(const FleetDescription& fleet) {
  std::vector<SgGroup> groups;
  std::map<std::array<double, 7>, int> seen;
  for (int i = 0; i < static_cast<int>(fleet.sgs.size()); ++i) {
    const auto& g = fleet.sgs[i];
    const std::array<double, 7> key = {g.inertia_s,     g.damping_pu,
                                       g.governor_gain, g.turbine_fraction,
                                       g.droop_pu,      g.governor_time_s,
                                       g.rating_mw};
    const auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, static_cast<int>(groups.size()));
      groups.push_back({"y" + std::to_string(groups.size() + 1), {i}});
    } else {
      groups[it->second].sg_indices.push_back(i);
    }
  }
  return groups;
}

OperatingPoint make_point(const FleetDescription& fleet,
                          const std::vector<SgGroup>& groups,
                          const std::vector<int>& units_on) {
  if (units_on.size() != groups.size())
    throw Error(ErrorCode::invalid_argument, "units_on does not match groups");
  OperatingPoint point;
  point.commitment.assign(fleet.sgs.size(), false);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g].sg_indices;
    if (units_on[g] < 0 || units_on[g] > static_cast<int>(members.size()))
      throw Error(ErrorCode::invalid_argument,
                  "unit count out of range for group " + groups[g].name);
    double y = 0.0;
    for (int k = 0; k < units_on[g]; ++k) {
      point.commitment[members[k]] = true;
      y += fleet.sgs[members[k]].rating_mw;
    }
    point.y_mw.push_back(y);
  }
  return point;
}

std::vector<OperatingPoint> generate_grid(const FleetDescription& fleet,
                                          const std::vector<SgGroup>& groups,
                                          int levels_per_group) {
  if (levels_per_group < 2)
    throw Error(ErrorCode::invalid_argument, "need at least 2 levels per group");
  std::vector<std::vector<int>> levels(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const int n = static_cast<int>(groups[g].sg_indices.size());
    const int count = std::min(levels_per_group, n + 1);
    for (int k = 0; k < count; ++k) {
      const int units = static_cast<int>(
          std::lround(static_cast<double>(k) * n / (count - 1)));
      if (levels[g].empty() || levels[g].back() != units)
        levels[g].push_back(units);
    }
  }
  std::vector<OperatingPoint> grid;
  std::vector<std::size_t> idx(groups.size(), 0);
  while (true) {
    std::vector<int> units(groups.size());
    int total = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      units[g] = levels[g][idx[g]];
      total += units[g];
    }
    if (total > 0) grid.push_back(make_point(fleet, groups, units));
    // Odometer increment.
    std::size_t g = 0;
    for (; g < groups.size(); ++g) {
      if (++idx[g] < levels[g].size()) break;
      idx[g] = 0;
    }
    if (g == groups.size()) break;
  }
  if (grid.empty()) throw Error(ErrorCode::invalid_argument, "empty grid");
  return grid;
}

HeadroomSample headroom_for_point(const FleetDescription& fleet,
                                  const OperatingPoint& point, double w_lim_pu,
                                  double dpl_pu,
                                  std::pair<double, double> b1_range) {
  const AggregateModel agg = aggregate_fleet(fleet, point.commitment);
  const double lo = b1_range.first, hi = b1_range.second;
  if (!(lo > 0.0 && hi > lo))
    throw Error(ErrorCode::invalid_argument, "bad b1 range");

  // No support needed when the open loop already satisfies the bound.
  const SynthesisResult open_loop = open_loop_bound(agg, dpl_pu);
  if (open_loop.nadir_bound <= w_lim_pu) {
    Probe probe{hi, open_loop};
    HeadroomSample s = make_sample(point, probe);
    s.m_pu = 0.0;
    return s;
  }

  const auto synth = [&](double b1) {
    return Probe{b1, synthesize_gains(agg, dpl_pu, b1)};
  };
  const double tol = kNadirTolRel * w_lim_pu;

  // Log-spaced probing from the weak-support end establishes the bisection
  // bracket without visiting extreme weights the fixed point dislikes.
  constexpr int kProbes = 7;
  Probe feasible;  // strongest-support side, bound <= limit
  bool have_feasible = false;
  double bracket_hi = hi;
  double prev_bound = open_loop.nadir_bound;
  for (int k = 1; k <= kProbes; ++k) {
    const double b1 = hi * std::pow(lo / hi, static_cast<double>(k) / kProbes);
    const Probe p = synth(b1);
    if (std::abs(p.synthesis.nadir_bound - w_lim_pu) <= tol)
      return make_sample(point, p);
    if (p.synthesis.nadir_bound <= w_lim_pu) {
      feasible = p;
      have_feasible = true;
      break;
    }
    if (p.synthesis.nadir_bound > prev_bound + tol)
      std::cerr << "headroom: non-monotone nadir bound over b1 near " << b1
                << "\n";
    prev_bound = p.synthesis.nadir_bound;
    bracket_hi = b1;
  }
  if (!have_feasible)
    throw Error(ErrorCode::infeasible, "infeasible operating point");

  // Largest b1 keeping the bound at or under the limit. The weight interval
  // stop catches the case where the scale-grid quantization of the bound
  // cannot resolve the nadir tolerance.
  Probe best = feasible;
  double b_lo = feasible.b1, b_hi = bracket_hi;
  for (int it = 0; it < kBisectionCap && b_hi / b_lo > 1.0 + 1e-3; ++it) {
    const double mid = std::sqrt(b_lo * b_hi);
    const Probe p = synth(mid);
    if (std::abs(p.synthesis.nadir_bound - w_lim_pu) <= tol)
      return make_sample(point, p);
    if (p.synthesis.nadir_bound <= w_lim_pu) {
      b_lo = mid;
      best = p;
    } else {
      b_hi = mid;
    }
  }
  return make_sample(point, best);
}

HeadroomCurve fit_headroom_curve(const std::vector<HeadroomSample>& samples,
                                 const std::vector<std::string>& group_names) {
  const int g = static_cast<int>(group_names.size());
  const int n = static_cast<int>(samples.size());
  if (n < g + 1)
    throw Error(ErrorCode::invalid_argument,
                "need at least groups+1 samples to fit");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(samples[i].point.y_mw.size()) != g)
      throw Error(ErrorCode::invalid_argument, "sample dimension mismatch");
    for (int j = i + 1; j < n; ++j)
      if (samples[i].point.y_mw == samples[j].point.y_mw)
        throw Error(ErrorCode::invalid_argument, "duplicate sample point");
  }

  Eigen::MatrixXd design(n, g + 1);
  Eigen::VectorXd target(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < g; ++j) design(i, j) = samples[i].point.y_mw[j];
    design(i, g) = 1.0;
    target(i) = samples[i].m_pu;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < g + 1)
    throw Error(ErrorCode::numeric, "degenerate sampling");
  const Eigen::VectorXd coef = qr.solve(target);

  const Eigen::VectorXd residual = target - design * coef;
  const double ss_res = residual.squaredNorm();
  const double mean = target.mean();
  const double ss_tot = (target.array() - mean).matrix().squaredNorm();
  double r2 = 1.0;
  if (ss_tot > 1e-30)
    r2 = 1.0 - ss_res / ss_tot;
  else if (ss_res > 1e-30)
    r2 = 0.0;

  HeadroomCurve curve;
  curve.k_i.assign(coef.data(), coef.data() + g);
  curve.k_0 = coef(g);
  curve.r_squared = r2;
  curve.group_names = group_names;
  curve.samples = samples;
  if (r2 < 0.95)
    throw Error(ErrorCode::numeric,
                "headroom fit rejected: R^2 = " + std::to_string(r2));
  return curve;
}

double predict_min_headroom(const HeadroomCurve& curve,
                            const std::vector<double>& y_mw) {
  if (y_mw.size() != curve.k_i.size())
    throw Error(ErrorCode::invalid_argument, "point dimension mismatch");
  if (!curve.samples.empty()) {
    for (std::size_t j = 0; j < y_mw.size(); ++j) {
      double lo = curve.samples[0].point.y_mw[j], hi = lo;
      for (const auto& s : curve.samples) {
        lo = std::min(lo, s.point.y_mw[j]);
        hi = std::max(hi, s.point.y_mw[j]);
      }
      if (y_mw[j] < lo - 1e-9 || y_mw[j] > hi + 1e-9) {
        std::cerr << "headroom: prediction outside sampled hull (y" << j + 1
                  << " = " << y_mw[j] << ")\n";
        break;
      }
    }
  }
  double value = curve.k_0;
  for (std::size_t j = 0; j < y_mw.size(); ++j)
    value += curve.k_i[j] * y_mw[j];
  return std::max(0.0, value);
}

SynthesisResult gains_for_budget(const AggregateModel& agg, double dpl_pu,
                                 double budget_pu,
                                 std::pair<double, double> b1_range) {
  const SynthesisResult open_loop = open_loop_bound(agg, dpl_pu);
  if (budget_pu <= 0.0) return open_loop;

  const double lo = b1_range.first, hi = b1_range.second;
  SynthesisResult strongest = synthesize_gains(agg, dpl_pu, lo);
  if (strongest.effort_bound <= budget_pu) return strongest;

  // Effort shrinks as the weight grows; find the smallest b1 still within
  // budget (largest affordable support).
  double b_lo = lo, b_hi = hi;
  SynthesisResult best = open_loop;
  bool have_feasible = false;
  for (int it = 0; it < kBisectionCap; ++it) {
    const double mid = std::sqrt(b_lo * b_hi);
    SynthesisResult r = synthesize_gains(agg, dpl_pu, mid);
    if (r.effort_bound <= budget_pu) {
      best = std::move(r);
      have_feasible = true;
      b_hi = mid;
      if (budget_pu - best.effort_bound <= 1e-4 * budget_pu) break;
    } else {
      b_lo = mid;
    }
  }
  return have_feasible ? best : open_loop;
}

SweepOutcome run_headroom_sweep(const FleetDescription& fleet,
                                const std::vector<SgGroup>& groups,
                                int levels_per_group, double w_lim_pu,
                                double w_ss_lim_pu, double rocof_lim_pu,
                                double dpl_pu,
                                std::pair<double, double> b1_range, int jobs) {
  const std::vector<OperatingPoint> grid =
      generate_grid(fleet, groups, levels_per_group);

  // Keep only the operating domain the scheduler can commit: SG-only RoCoF
  // and steady-state screens.
  std::vector<OperatingPoint> domain;
  for (const auto& point : grid) {
    AggregateModel agg;
    try {
      agg = aggregate_fleet(fleet, point.commitment);
    } catch (const Error&) {
      continue;
    }
    if (agg.m_g < dpl_pu / rocof_lim_pu) continue;
    if (agg.d_g + agg.r_g < dpl_pu / w_ss_lim_pu) continue;
    domain.push_back(point);
  }
  if (domain.empty())
    throw Error(ErrorCode::infeasible, "no operating point passes the screens");

  enum class Kind { fitted, zero, infeasible };
  struct Slot {
    Kind kind = Kind::infeasible;
    HeadroomSample sample;
  };
  std::vector<Slot> slots(domain.size());
  std::atomic<std::size_t> cursor{0};
  const auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= domain.size()) return;
      try {
        HeadroomSample s =
            headroom_for_point(fleet, domain[i], w_lim_pu, dpl_pu, b1_range);
        slots[i].kind = s.m_pu > 1e-12 ? Kind::fitted : Kind::zero;
        slots[i].sample = std::move(s);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::infeasible) throw;
        slots[i].kind = Kind::infeasible;
        slots[i].sample.point = domain[i];
      }
    }
  };
  int thread_count = jobs > 0
                         ? jobs
                         : static_cast<int>(std::thread::hardware_concurrency());
  thread_count = std::max(1, std::min<int>(thread_count,
                                           static_cast<int>(domain.size())));
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SweepOutcome out;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    switch (slots[i].kind) {
      case Kind::fitted: out.samples.push_back(slots[i].sample); break;
      case Kind::zero: out.zero_samples.push_back(slots[i].sample); break;
      case Kind::infeasible: out.infeasible.push_back(domain[i]); break;
    }
  }
  std::vector<std::string> names;
  for (const auto& g : groups) names.push_back(g.name);
  out.curve = fit_headroom_curve(out.samples, names);
  return out;
}

}  // namespace gsp2p
