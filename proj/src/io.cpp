#include "gsp2p/io.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gsp2p/errors.hpp"

namespace gsp2p::io {

namespace {

namespace fs = std::filesystem;

[[noreturn]] void schema_error(const std::string& pointer,
                               const std::string& what) {
  throw Error(ErrorCode::parse, "config schema violation at " + pointer + ": " + what);
}

double num_at(const json& j, const std::string& pointer) {
  if (!j.is_number()) schema_error(pointer, "expected a number");
  return j.get<double>();
}

double positive_at(const json& j, const std::string& pointer) {
  const double v = num_at(j, pointer);
  if (!(v > 0.0)) schema_error(pointer, "must be positive");
  return v;
}

void reject_unknown(const json& obj, const std::string& pointer,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok |= key == a;
    if (!ok) schema_error(pointer + "/" + key, "unknown key");
  }
}

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty()) return path;
  const fs::path p(path);
  if (p.is_absolute() || base.empty()) return path;
  return (fs::path(base) / p).string();
}

UcMode mode_from_string(const std::string& s, const std::string& pointer) {
  if (s == "base") return UcMode::base;
  if (s == "proposed_linear") return UcMode::proposed_linear;
  if (s == "analytic_relaxed") return UcMode::analytic_relaxed;
  schema_error(pointer, "expected base | proposed_linear | analytic_relaxed");
}

std::string mode_to_string(UcMode mode) {
  switch (mode) {
    case UcMode::base: return "base";
    case UcMode::proposed_linear: return "proposed_linear";
    case UcMode::analytic_relaxed: return "analytic_relaxed";
  }
  return "base";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
      field.pop_back();
    std::size_t start = 0;
    while (start < field.size() && field[start] == ' ') ++start;
    out.push_back(field.substr(start));
  }
  return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot open " + path + " for writing");
  f << content;
  if (!f) throw Error(ErrorCode::io, "failed writing " + path);
}

StudyConfig parse_config(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) schema_error("", "expected an object");
  reject_unknown(doc, "",
                 {"fleet", "profiles", "limits", "disturbance_mw", "mode",
                  "headroom", "wind_scales", "uncertainty", "simulation",
                  "uc_gap", "output_dir"});
  StudyConfig cfg;
  cfg.base_dir = base_dir;

  if (!doc.contains("fleet") || !doc["fleet"].is_string())
    schema_error("/fleet", "required string path");
  cfg.fleet_path = resolve(base_dir, doc["fleet"].get<std::string>());

  if (doc.contains("profiles")) {
    const json& p = doc["profiles"];
    if (!p.is_object()) schema_error("/profiles", "expected an object");
    reject_unknown(p, "/profiles", {"demand", "wind"});
    if (p.contains("demand")) {
      if (!p["demand"].is_string()) schema_error("/profiles/demand", "expected a string");
      cfg.demand_path = resolve(base_dir, p["demand"].get<std::string>());
    }
    if (p.contains("wind")) {
      if (!p["wind"].is_string()) schema_error("/profiles/wind", "expected a string");
      cfg.wind_path = resolve(base_dir, p["wind"].get<std::string>());
    }
  }

  if (doc.contains("limits")) {
    const json& l = doc["limits"];
    if (!l.is_object()) schema_error("/limits", "expected an object");
    reject_unknown(l, "/limits",
                   {"delta_f_lim_hz", "delta_f_ss_lim_hz", "rocof_lim_hz_s"});
    if (l.contains("delta_f_lim_hz"))
      cfg.limits.w_lim_hz = positive_at(l["delta_f_lim_hz"], "/limits/delta_f_lim_hz");
    if (l.contains("delta_f_ss_lim_hz"))
      cfg.limits.w_ss_lim_hz =
          positive_at(l["delta_f_ss_lim_hz"], "/limits/delta_f_ss_lim_hz");
    if (l.contains("rocof_lim_hz_s"))
      cfg.limits.rocof_lim_hz_s =
          positive_at(l["rocof_lim_hz_s"], "/limits/rocof_lim_hz_s");
  }

  if (doc.contains("disturbance_mw"))
    cfg.disturbance_mw = positive_at(doc["disturbance_mw"], "/disturbance_mw");

  if (doc.contains("mode")) {
    if (!doc["mode"].is_string()) schema_error("/mode", "expected a string");
    cfg.mode = mode_from_string(doc["mode"].get<std::string>(), "/mode");
  }

  if (doc.contains("headroom")) {
    const json& h = doc["headroom"];
    if (!h.is_object()) schema_error("/headroom", "expected an object");
    reject_unknown(h, "/headroom", {"levels_per_group", "b1_range", "groups"});
    if (h.contains("levels_per_group")) {
      if (!h["levels_per_group"].is_number_integer())
        schema_error("/headroom/levels_per_group", "expected an integer");
      cfg.headroom_levels_per_group = h["levels_per_group"].get<int>();
      if (cfg.headroom_levels_per_group < 2)
        schema_error("/headroom/levels_per_group", "must be >= 2");
    }
    if (h.contains("b1_range")) {
      const json& r = h["b1_range"];
      if (!r.is_array() || r.size() != 2)
        schema_error("/headroom/b1_range", "expected [lo, hi]");
      cfg.b1_range = {positive_at(r[0], "/headroom/b1_range/0"),
                      positive_at(r[1], "/headroom/b1_range/1")};
      if (!(cfg.b1_range.first < cfg.b1_range.second))
        schema_error("/headroom/b1_range", "lo must be < hi");
    }
    if (h.contains("groups") && !h["groups"].is_null()) {
      if (!h["groups"].is_array())
        schema_error("/headroom/groups", "expected an array of id arrays");
      std::vector<std::vector<std::string>> groups;
      for (const auto& g : h["groups"]) {
        if (!g.is_array()) schema_error("/headroom/groups", "expected id arrays");
        std::vector<std::string> ids;
        for (const auto& id : g) ids.push_back(id.get<std::string>());
        groups.push_back(std::move(ids));
      }
      cfg.groups = std::move(groups);
    }
  }

  if (doc.contains("wind_scales")) {
    if (!doc["wind_scales"].is_array() || doc["wind_scales"].empty())
      schema_error("/wind_scales", "expected a non-empty array");
    cfg.wind_scales.clear();
    for (std::size_t i = 0; i < doc["wind_scales"].size(); ++i)
      cfg.wind_scales.push_back(positive_at(
          doc["wind_scales"][i], "/wind_scales/" + std::to_string(i)));
  }

  if (doc.contains("uncertainty")) {
    const json& u = doc["uncertainty"];
    if (!u.is_object()) schema_error("/uncertainty", "expected an object");
    reject_unknown(u, "/uncertainty", {"sigma_over_mu", "scenarios"});
    if (u.contains("sigma_over_mu")) {
      if (!u["sigma_over_mu"].is_array() || u["sigma_over_mu"].empty())
        schema_error("/uncertainty/sigma_over_mu", "expected a non-empty array");
      cfg.sigma_over_mu.clear();
      for (std::size_t i = 0; i < u["sigma_over_mu"].size(); ++i)
        cfg.sigma_over_mu.push_back(
            positive_at(u["sigma_over_mu"][i],
                        "/uncertainty/sigma_over_mu/" + std::to_string(i)));
    }
    if (u.contains("scenarios")) {
      if (!u["scenarios"].is_number_integer())
        schema_error("/uncertainty/scenarios", "expected an integer");
      cfg.scenarios = u["scenarios"].get<int>();
      if (cfg.scenarios < 1) schema_error("/uncertainty/scenarios", "must be >= 1");
    }
  }

  if (doc.contains("uc_gap"))
    cfg.uc_gap = positive_at(doc["uc_gap"], "/uc_gap");

  if (doc.contains("simulation")) {
    const json& s = doc["simulation"];
    if (!s.is_object()) schema_error("/simulation", "expected an object");
    reject_unknown(s, "/simulation", {"dt_s", "horizon_s"});
    if (s.contains("dt_s")) cfg.sim_dt_s = positive_at(s["dt_s"], "/simulation/dt_s");
    if (s.contains("horizon_s"))
      cfg.sim_horizon_s = positive_at(s["horizon_s"], "/simulation/horizon_s");
  }

  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string())
      schema_error("/output_dir", "expected a string");
    cfg.output_dir = resolve(base_dir, doc["output_dir"].get<std::string>());
  } else {
    cfg.output_dir = resolve(base_dir, cfg.output_dir);
  }

  if (!fs::exists(cfg.fleet_path))
    schema_error("/fleet", "file not found: " + cfg.fleet_path);
  if (!cfg.demand_path.empty() && !fs::exists(cfg.demand_path))
    schema_error("/profiles/demand", "file not found: " + cfg.demand_path);
  if (!cfg.wind_path.empty() && !fs::exists(cfg.wind_path))
    schema_error("/profiles/wind", "file not found: " + cfg.wind_path);
  return cfg;
}

StudyConfig load_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, path + ": " + e.what());
  }
  return parse_config(doc, fs::path(path).parent_path().string());
}

json config_to_json(const StudyConfig& cfg) {
  json doc;
  doc["fleet"] = cfg.fleet_path;
  doc["profiles"] = {{"demand", cfg.demand_path}, {"wind", cfg.wind_path}};
  doc["limits"] = {{"delta_f_lim_hz", cfg.limits.w_lim_hz},
                   {"delta_f_ss_lim_hz", cfg.limits.w_ss_lim_hz},
                   {"rocof_lim_hz_s", cfg.limits.rocof_lim_hz_s}};
  if (cfg.disturbance_mw) doc["disturbance_mw"] = *cfg.disturbance_mw;
  doc["mode"] = mode_to_string(cfg.mode);
  doc["headroom"] = {
      {"levels_per_group", cfg.headroom_levels_per_group},
      {"b1_range", {cfg.b1_range.first, cfg.b1_range.second}}};
  if (cfg.groups) doc["headroom"]["groups"] = *cfg.groups;
  doc["wind_scales"] = cfg.wind_scales;
  doc["uncertainty"] = {{"sigma_over_mu", cfg.sigma_over_mu},
                        {"scenarios", cfg.scenarios}};
  doc["uc_gap"] = cfg.uc_gap;
  doc["simulation"] = {{"dt_s", cfg.sim_dt_s}, {"horizon_s", cfg.sim_horizon_s}};
  doc["output_dir"] = cfg.output_dir;
  return doc;
}

json fleet_to_json(const FleetDescription& fleet) {
  json doc;
  doc["p_base_mw"] = fleet.p_base_mw;
  doc["f_base_hz"] = fleet.f_base_hz;
  doc["disturbance_mw"] = fleet.disturbance_mw;
  doc["sgs"] = json::array();
  for (const auto& g : fleet.sgs)
    doc["sgs"].push_back({{"id", g.id},
                          {"inertia_s", g.inertia_s},
                          {"damping_pu", g.damping_pu},
                          {"governor_gain", g.governor_gain},
                          {"turbine_fraction", g.turbine_fraction},
                          {"droop_pu", g.droop_pu},
                          {"governor_time_s", g.governor_time_s},
                          {"rating_mw", g.rating_mw},
                          {"cost_noload", g.cost_noload},
                          {"cost_marginal", g.cost_marginal},
                          {"cost_startup", g.cost_startup},
                          {"p_min_mw", g.p_min_mw},
                          {"p_max_mw", g.p_max_mw}});
  doc["converters"] = json::array();
  for (const auto& c : fleet.converters)
    doc["converters"].push_back({{"id", c.id},
                                 {"rating_mw", c.rating_mw},
                                 {"time_constant_s", c.time_constant_s},
                                 {"p_limit_mw", c.p_limit_mw},
                                 {"p_setpoint_mw", c.p_setpoint_mw}});
  return doc;
}

FleetDescription fleet_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::parse, "fleet: expected an object");
  reject_unknown(doc, "",
                 {"p_base_mw", "f_base_hz", "disturbance_mw", "sgs", "converters"});
  FleetDescription fleet;
  fleet.p_base_mw = positive_at(doc.at("p_base_mw"), "/p_base_mw");
  if (doc.contains("f_base_hz"))
    fleet.f_base_hz = positive_at(doc["f_base_hz"], "/f_base_hz");
  if (doc.contains("disturbance_mw"))
    fleet.disturbance_mw = num_at(doc["disturbance_mw"], "/disturbance_mw");
  int idx = 0;
  for (const auto& g : doc.value("sgs", json::array())) {
    const std::string ptr = "/sgs/" + std::to_string(idx++);
    reject_unknown(g, ptr,
                   {"id", "inertia_s", "damping_pu", "governor_gain",
                    "turbine_fraction", "droop_pu", "governor_time_s",
                    "rating_mw", "cost_noload", "cost_marginal", "cost_startup",
                    "p_min_mw", "p_max_mw"});
    SyncGenerator sg;
    sg.id = g.at("id").get<std::string>();
    sg.inertia_s = num_at(g.at("inertia_s"), ptr + "/inertia_s");
    sg.damping_pu = num_at(g.at("damping_pu"), ptr + "/damping_pu");
    sg.governor_gain = num_at(g.at("governor_gain"), ptr + "/governor_gain");
    sg.turbine_fraction =
        num_at(g.at("turbine_fraction"), ptr + "/turbine_fraction");
    sg.droop_pu = num_at(g.at("droop_pu"), ptr + "/droop_pu");
    sg.governor_time_s =
        num_at(g.at("governor_time_s"), ptr + "/governor_time_s");
    sg.rating_mw = num_at(g.at("rating_mw"), ptr + "/rating_mw");
    sg.cost_noload = num_at(g.at("cost_noload"), ptr + "/cost_noload");
    sg.cost_marginal = num_at(g.at("cost_marginal"), ptr + "/cost_marginal");
    sg.cost_startup = num_at(g.at("cost_startup"), ptr + "/cost_startup");
    sg.p_min_mw = num_at(g.at("p_min_mw"), ptr + "/p_min_mw");
    sg.p_max_mw = num_at(g.at("p_max_mw"), ptr + "/p_max_mw");
    fleet.sgs.push_back(std::move(sg));
  }
  idx = 0;
  for (const auto& c : doc.value("converters", json::array())) {
    const std::string ptr = "/converters/" + std::to_string(idx++);
    reject_unknown(c, ptr,
                   {"id", "rating_mw", "time_constant_s", "p_limit_mw",
                    "p_setpoint_mw"});
    ConverterUnit cv;
    cv.id = c.at("id").get<std::string>();
    cv.rating_mw = num_at(c.at("rating_mw"), ptr + "/rating_mw");
    cv.time_constant_s =
        num_at(c.at("time_constant_s"), ptr + "/time_constant_s");
    cv.p_limit_mw = num_at(c.at("p_limit_mw"), ptr + "/p_limit_mw");
    cv.p_setpoint_mw = c.value("p_setpoint_mw", 0.0);
    fleet.converters.push_back(std::move(cv));
  }
  fleet.validate();
  return fleet;
}

FleetDescription load_fleet(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, path + ": " + e.what());
  }
  return fleet_from_json(doc);
}

std::vector<double> load_demand_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::parse, path + ": empty file");
  std::vector<double> demand;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 2)
      throw Error(ErrorCode::parse, path + ": expected hour,demand_mw");
    demand.push_back(std::stod(fields[1]));
  }
  if (demand.empty()) throw Error(ErrorCode::parse, path + ": no data rows");
  return demand;
}

std::vector<std::vector<double>> load_wind_csv(const std::string& path,
                                               const FleetDescription& fleet) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::parse, path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() != fleet.converters.size() + 1)
    throw Error(ErrorCode::parse,
                path + ": expected hour plus one column per converter");
  std::vector<int> order;  // column -> converter index
  for (std::size_t k = 1; k < header.size(); ++k) {
    int found = -1;
    for (std::size_t c = 0; c < fleet.converters.size(); ++c)
      if (fleet.converters[c].id == header[k]) found = static_cast<int>(c);
    if (found < 0)
      throw Error(ErrorCode::parse, path + ": unknown converter " + header[k]);
    order.push_back(found);
  }
  std::vector<std::vector<double>> wind;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw Error(ErrorCode::parse, path + ": ragged row");
    std::vector<double> row(fleet.converters.size(), 0.0);
    for (std::size_t k = 1; k < fields.size(); ++k)
      row[order[k - 1]] = std::stod(fields[k]);
    wind.push_back(std::move(row));
  }
  if (wind.empty()) throw Error(ErrorCode::parse, path + ": no data rows");
  return wind;
}

json curve_to_json(const HeadroomCurve& curve, const FleetDescription& fleet) {
  json doc;
  doc["tool"] = "gsp2p";
  doc["p_base_mw"] = fleet.p_base_mw;
  doc["groups"] = curve.group_names;
  doc["k_i_pu_per_mw"] = curve.k_i;
  doc["k_0_pu"] = curve.k_0;
  doc["r_squared"] = curve.r_squared;
  doc["samples"] = json::array();
  for (const auto& s : curve.samples) {
    doc["samples"].push_back(
        {{"y_mw", s.point.y_mw},
         {"m_pu", s.m_pu},
         {"b1_at_limit", s.b1_at_limit},
         {"gain", {s.synthesis.gain.k1, s.synthesis.gain.k2}},
         {"nadir_bound_pu", s.synthesis.nadir_bound},
         {"effort_bound_pu", s.synthesis.effort_bound}});
  }
  return doc;
}

HeadroomCurve curve_from_json(const json& doc) {
  HeadroomCurve curve;
  curve.group_names = doc.at("groups").get<std::vector<std::string>>();
  curve.k_i = doc.at("k_i_pu_per_mw").get<std::vector<double>>();
  curve.k_0 = doc.at("k_0_pu").get<double>();
  curve.r_squared = doc.at("r_squared").get<double>();
  for (const auto& s : doc.value("samples", json::array())) {
    HeadroomSample sample;
    sample.point.y_mw = s.at("y_mw").get<std::vector<double>>();
    sample.m_pu = s.at("m_pu").get<double>();
    sample.b1_at_limit = s.value("b1_at_limit", 0.0);
    sample.synthesis.gain.k1 = s.at("gain")[0].get<double>();
    sample.synthesis.gain.k2 = s.at("gain")[1].get<double>();
    sample.synthesis.nadir_bound = s.value("nadir_bound_pu", 0.0);
    sample.synthesis.effort_bound = s.value("effort_bound_pu", 0.0);
    curve.samples.push_back(std::move(sample));
  }
  if (curve.k_i.size() != curve.group_names.size())
    throw Error(ErrorCode::parse, "curve: coefficient/group mismatch");
  return curve;
}

json solution_to_json(const UcSolution& sol, const UcInstance& instance) {
  json doc;
  doc["mode"] = mode_to_string(instance.mode);
  doc["cost"] = sol.cost;
  doc["stats"] = {{"nodes", sol.stats.nodes},
                  {"lp_iterations", sol.stats.lp_iterations}};
  doc["periods"] = json::array();
  for (int t = 0; t < instance.periods; ++t) {
    json p;
    p["commitment"] = json::array();
    for (const bool on : sol.commitment[t]) p["commitment"].push_back(on);
    p["dispatch_mw"] = sol.dispatch_mw[t];
    p["wind_used_mw"] = sol.wind_used_mw[t];
    p["wind_curtailed_mw"] = sol.wind_curtailed_mw[t];
    p["headroom_mw"] = sol.headroom_mw[t];
    p["headroom_total_mw"] = sol.headroom_total_mw[t];
    p["implied_reserve_mw"] = sol.implied_reserve_mw[t];
    doc["periods"].push_back(std::move(p));
  }
  return doc;
}

UcSolution solution_from_json(const json& doc, const UcInstance& instance) {
  UcSolution sol;
  sol.cost = doc.at("cost").get<double>();
  sol.stats.nodes = doc.at("stats").at("nodes").get<long>();
  sol.stats.lp_iterations = doc.at("stats").at("lp_iterations").get<long>();
  for (const auto& p : doc.at("periods")) {
    Commitment commit;
    for (const auto& on : p.at("commitment")) commit.push_back(on.get<bool>());
    sol.commitment.push_back(std::move(commit));
    sol.dispatch_mw.push_back(p.at("dispatch_mw").get<std::vector<double>>());
    sol.wind_used_mw.push_back(p.at("wind_used_mw").get<std::vector<double>>());
    sol.wind_curtailed_mw.push_back(
        p.at("wind_curtailed_mw").get<std::vector<double>>());
    sol.headroom_mw.push_back(p.at("headroom_mw").get<std::vector<double>>());
    sol.headroom_total_mw.push_back(p.at("headroom_total_mw").get<double>());
    sol.implied_reserve_mw.push_back(p.at("implied_reserve_mw").get<double>());
  }
  if (static_cast<int>(sol.commitment.size()) != instance.periods)
    throw Error(ErrorCode::parse, "solution: period count mismatch");
  return sol;
}

json synthesis_to_json(const SynthesisResult& result) {
  json doc;
  doc["gain"] = {result.gain.k1, result.gain.k2};
  doc["virtual_damping_pu"] = result.gain.virtual_damping();
  doc["virtual_inertia_pu_s"] = result.gain.virtual_inertia();
  doc["p_matrix"] = {{result.p(0, 0), result.p(0, 1)},
                     {result.p(1, 0), result.p(1, 1)}};
  doc["alpha_star"] = result.alpha_star;
  doc["a_star"] = result.a_star;
  doc["effort_bound_pu"] = result.effort_bound;
  doc["nadir_bound_pu"] = result.nadir_bound;
  doc["iterations"] = result.iterations;
  doc["converged"] = result.converged;
  doc["b1_weight"] = result.b1_weight;
  doc["x0_rocof_pu"] = result.x0_rocof;
  doc["x0_shift_pu"] = result.x0_shift;
  doc["scale_warning"] = result.scale_warning;
  doc["history"] = json::array();
  for (const auto& it : result.history)
    doc["history"].push_back({{"k1", it.gain.k1},
                              {"k2", it.gain.k2},
                              {"alpha", it.alpha},
                              {"a_scale", it.a_scale},
                              {"objective", it.objective},
                              {"error", it.error}});
  return doc;
}

std::string config_hash(const json& canonical) {
  const std::string s = canonical.dump();
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return buf;
}

std::vector<std::vector<std::vector<double>>> wind_scenarios(
    const std::vector<std::vector<double>>& forecast_mw,
    const std::vector<double>& p_limit_mw, double sigma_over_mu, int count,
    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Explicit Box-Muller keeps the draws identical across standard libraries;
  // the same seed reuses the same normal deviates at every sigma level.
  const auto normal = [&rng]() {
    const double u1 =
        (static_cast<double>(rng() >> 11) + 1.0) / 9007199254740993.0;
    const double u2 = static_cast<double>(rng() >> 11) / 9007199254740992.0;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  };
  std::vector<std::vector<std::vector<double>>> scenarios(count);
  for (int s = 0; s < count; ++s) {
    scenarios[s].resize(forecast_mw.size());
    for (std::size_t t = 0; t < forecast_mw.size(); ++t) {
      scenarios[s][t].resize(forecast_mw[t].size());
      for (std::size_t c = 0; c < forecast_mw[t].size(); ++c) {
        const double z = normal();
        const double v = forecast_mw[t][c] * (1.0 + sigma_over_mu * z);
        scenarios[s][t][c] =
            std::min(std::max(0.0, v),
                     c < p_limit_mw.size() ? p_limit_mw[c] : v);
      }
    }
  }
  return scenarios;
}

}  // namespace gsp2p::io
