#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "gsp2p/headroom.hpp"
#include "gsp2p/scheduler.hpp"
#include "gsp2p/types.hpp"

namespace gsp2p::io {

using json = nlohmann::json;

// All file interfaces speak SI units (MW, Hz); per-unit never crosses the
// I/O boundary.
struct StudyConfig {
  std::string fleet_path;
  std::string demand_path;
  std::string wind_path;
  FrequencyLimits limits;
  std::optional<double> disturbance_mw;  // overrides the fleet value
  UcMode mode = UcMode::proposed_linear;
  int headroom_levels_per_group = 5;
  std::pair<double, double> b1_range = {1e-3, 1e3};
  std::optional<std::vector<std::vector<std::string>>> groups;  // by SG id
  std::vector<double> wind_scales = {1.0, 1.5, 2.0};
  std::vector<double> sigma_over_mu = {0.05, 0.10, 0.15};
  int scenarios = 8;
  double uc_gap = 2e-3;  // study-level MILP proof gap; see README
  double sim_dt_s = 1e-3;
  double sim_horizon_s = 30.0;
  std::string output_dir = "out";
  std::string base_dir;  // directory of the config file, for relative paths
};

// Schema-validated load: defaults applied, unknown keys rejected, violations
// reported with their JSON-pointer path.
StudyConfig load_config(const std::string& path);
StudyConfig parse_config(const json& doc, const std::string& base_dir);
json config_to_json(const StudyConfig& cfg);

FleetDescription load_fleet(const std::string& path);
json fleet_to_json(const FleetDescription& fleet);
FleetDescription fleet_from_json(const json& doc);

// Hourly CSV profiles: demand has a single value column, wind one column per
// converter id.
std::vector<double> load_demand_csv(const std::string& path);
std::vector<std::vector<double>> load_wind_csv(const std::string& path,
                                               const FleetDescription& fleet);

json curve_to_json(const HeadroomCurve& curve, const FleetDescription& fleet);
HeadroomCurve curve_from_json(const json& doc);

json solution_to_json(const UcSolution& sol, const UcInstance& instance);
UcSolution solution_from_json(const json& doc, const UcInstance& instance);

json synthesis_to_json(const SynthesisResult& result);

// FNV-1a over the canonical config serialization; identifies a run.
std::string config_hash(const json& canonical);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Deterministic wind scenarios: Box-Muller over a fixed-seed mt19937_64 so
// results do not depend on the platform's distribution implementation. The
// same underlying draws are reused across sigma levels.
std::vector<std::vector<std::vector<double>>> wind_scenarios(
    const std::vector<std::vector<double>>& forecast_mw,
    const std::vector<double>& p_limit_mw, double sigma_over_mu, int count,
    std::uint64_t seed);

}  // namespace gsp2p::io
