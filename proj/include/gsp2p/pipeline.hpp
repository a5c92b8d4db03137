#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gsp2p/io.hpp"

namespace gsp2p {

// Desk-scale study in the spirit of the case-study system: 10 SGs in three
// parameter groups, four converters, 8 GW base, 800 MW design loss, a daily
// demand profile between 5.16 and 6.24 GW. SG dynamic and cost figures are
// repository test data drawn from typical published governor ranges, not a
// reproduction of any particular system.
struct FixtureData {
  FleetDescription fleet;
  std::vector<double> demand_mw;
  std::vector<std::vector<double>> wind_mw;  // [period][converter]
  io::StudyConfig config;                    // paths empty; filled on write
};

FixtureData bundled_fixture();

// Materializes fleet.json, demand.csv, wind.csv and config.json under dir and
// returns the config pointing at them.
io::StudyConfig write_fixture_files(const std::string& dir);

struct PipelineOptions {
  std::string out_dir_override;
  int jobs = 0;          // 0 = hardware concurrency
  std::uint64_t seed = 1;
  bool to_stdout = false;
  // Operating point for point commands (aggregate/synthesize/bounds/simulate):
  // empty = all SGs committed, otherwise a capacity target filled in merit
  // order (cheapest marginal first).
  double capacity_target_mw = -1.0;
  double b1_weight = -1.0;  // <0: use the value where the nadir bound binds
};

struct ReportBundle {
  io::json result;                     // machine-readable command output
  std::vector<std::string> artifacts;  // files written, relative to out dir
};

// Commands: aggregate, synthesize, bounds, headroom-curve, schedule,
// redispatch, simulate, report.
ReportBundle run_pipeline(const io::StudyConfig& cfg, const std::string& command,
                          const PipelineOptions& opts);

// Figure regeneration from the CSV/JSON artifacts already in out_dir; errors
// with "nothing to report" when none are present.
std::vector<std::string> render_reports(const std::string& out_dir);

}  // namespace gsp2p
