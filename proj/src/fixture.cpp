#include <cmath>

#include "gsp2p/pipeline.hpp"

namespace gsp2p {

namespace {

SyncGenerator sg(const std::string& id, double m, double d, double f, double kr,
                 double t, double rating, double noload, double marginal,
                 double startup) {
  SyncGenerator g;
  g.id = id;
  g.inertia_s = m;
  g.damping_pu = d;
  g.governor_gain = 1.0;
  g.turbine_fraction = f;
  g.droop_pu = 1.0 / kr;  // K/R quoted directly
  g.governor_time_s = t;
  g.rating_mw = rating;
  g.cost_noload = noload;
  g.cost_marginal = marginal;
  g.cost_startup = startup;
  g.p_min_mw = 0.4 * rating;
  g.p_max_mw = rating;
  return g;
}

}  // namespace

FixtureData bundled_fixture() {
  FixtureData fx;
  FleetDescription& fleet = fx.fleet;
  fleet.p_base_mw = 8000.0;
  fleet.f_base_hz = 50.0;
  fleet.disturbance_mw = 800.0;

  // Three SG parameter groups; dynamic figures sit in typical published
  // governor ranges and are frozen here as test data.
  for (int i = 1; i <= 4; ++i)
    fleet.sgs.push_back(sg("sg-a" + std::to_string(i), 11.0, 1.2, 0.30, 16.0,
                           7.8, 850.0, 400.0, 28.0, 2000.0));
  for (int i = 1; i <= 3; ++i)
    fleet.sgs.push_back(sg("sg-b" + std::to_string(i), 8.0, 1.0, 0.28, 15.0,
                           7.2, 650.0, 320.0, 41.0, 1200.0));
  for (int i = 1; i <= 3; ++i)
    fleet.sgs.push_back(sg("sg-c" + std::to_string(i), 5.5, 0.9, 0.25, 14.0,
                           6.5, 450.0, 200.0, 58.0, 500.0));

  for (const int bus : {26, 27, 28, 29}) {
    ConverterUnit c;
    c.id = "ibr-" + std::to_string(bus);
    c.rating_mw = 325.0;
    c.time_constant_s = 0.05;
    c.p_limit_mw = 325.0;
    c.p_setpoint_mw = 0.0;
    fleet.converters.push_back(c);
  }

  fx.demand_mw = {5400, 5280, 5200, 5160, 5170, 5260, 5420, 5640,
                  5850, 5990, 6080, 6140, 6190, 6240, 6210, 6150,
                  6080, 6010, 5950, 5900, 5830, 5720, 5590, 5480};

  // Staggered diurnal wind availability per converter.
  const int periods = static_cast<int>(fx.demand_mw.size());
  fx.wind_mw.assign(periods, std::vector<double>(fleet.converters.size(), 0.0));
  constexpr double kPi = 3.14159265358979323846;
  for (int t = 0; t < periods; ++t) {
    for (std::size_t c = 0; c < fleet.converters.size(); ++c) {
      const double phase = 2.0 * kPi * (t + 3.0 + 2.5 * c) / 24.0;
      double cf = 0.55 + 0.33 * std::sin(phase) +
                  0.06 * std::sin(2.0 * kPi * (2.0 * t + 5.0 * c) / 24.0);
      cf = std::min(0.95, std::max(0.15, cf));
      fx.wind_mw[t][c] =
          std::round(cf * fleet.converters[c].rating_mw * 10.0) / 10.0;
    }
  }

  io::StudyConfig& cfg = fx.config;
  cfg.limits = FrequencyLimits{};
  cfg.disturbance_mw = 800.0;
  cfg.mode = UcMode::proposed_linear;
  cfg.headroom_levels_per_group = 5;
  cfg.output_dir = "out";
  return fx;
}

io::StudyConfig write_fixture_files(const std::string& dir) {
  FixtureData fx = bundled_fixture();

  io::write_text_file(dir + "/fleet.json", io::fleet_to_json(fx.fleet).dump(2) + "\n");

  std::string demand = "hour,demand_mw\n";
  for (std::size_t t = 0; t < fx.demand_mw.size(); ++t)
    demand += std::to_string(t) + "," + std::to_string((long)fx.demand_mw[t]) + "\n";
  io::write_text_file(dir + "/demand.csv", demand);

  std::string wind = "hour";
  for (const auto& c : fx.fleet.converters) wind += "," + c.id;
  wind += "\n";
  char cell[32];
  for (std::size_t t = 0; t < fx.wind_mw.size(); ++t) {
    wind += std::to_string(t);
    for (const double v : fx.wind_mw[t]) {
      std::snprintf(cell, sizeof(cell), ",%.1f", v);
      wind += cell;
    }
    wind += "\n";
  }
  io::write_text_file(dir + "/wind.csv", wind);

  io::StudyConfig cfg = fx.config;
  cfg.fleet_path = dir + "/fleet.json";
  cfg.demand_path = dir + "/demand.csv";
  cfg.wind_path = dir + "/wind.csv";
  cfg.output_dir = dir + "/out";
  cfg.base_dir = dir;

  io::json doc = io::config_to_json(cfg);
  doc["fleet"] = "fleet.json";
  doc["profiles"] = {{"demand", "demand.csv"}, {"wind", "wind.csv"}};
  doc["output_dir"] = "out";
  io::write_text_file(dir + "/config.json", doc.dump(2) + "\n");
  return cfg;
}

}  // namespace gsp2p
