#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>

#include "gsp2p/errors.hpp"
#include "gsp2p/io.hpp"
#include "gsp2p/pipeline.hpp"

using namespace gsp2p;
using io::json;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gsp2p_io_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("minimal config populates every default") {
  TempDir dir;
  io::write_text_file(dir.file("fleet.json"),
                      io::fleet_to_json(bundled_fixture().fleet).dump());
  io::write_text_file(dir.file("config.json"),
                      json{{"fleet", "fleet.json"}}.dump());
  const io::StudyConfig cfg = io::load_config(dir.file("config.json"));
  CHECK(cfg.limits.w_lim_hz == doctest::Approx(0.8));
  CHECK(cfg.limits.w_ss_lim_hz == doctest::Approx(0.5));
  CHECK(cfg.limits.rocof_lim_hz_s == doctest::Approx(1.0));
  CHECK(cfg.mode == UcMode::proposed_linear);
  CHECK(cfg.headroom_levels_per_group == 5);
  CHECK(cfg.b1_range.first == doctest::Approx(1e-3));
  CHECK(cfg.b1_range.second == doctest::Approx(1e3));
  CHECK(cfg.scenarios == 8);
  CHECK(cfg.wind_scales.size() == 3);
}

TEST_CASE("config round-trips through serialization") {
  TempDir dir;
  const io::StudyConfig cfg = write_fixture_files(dir.file("fx"));
  const json doc1 = io::config_to_json(cfg);
  const io::StudyConfig cfg2 = io::parse_config(doc1, cfg.base_dir);
  const json doc2 = io::config_to_json(cfg2);
  CHECK(doc1.dump() == doc2.dump());
  CHECK(io::config_hash(doc1) == io::config_hash(doc2));
}

TEST_CASE("schema violations carry a JSON-pointer path") {
  TempDir dir;
  io::write_text_file(dir.file("fleet.json"),
                      io::fleet_to_json(bundled_fixture().fleet).dump());

  SUBCASE("negative limit") {
    const json doc = {{"fleet", dir.file("fleet.json")},
                      {"limits", {{"rocof_lim_hz_s", -1.0}}}};
    try {
      io::parse_config(doc, "");
      FAIL("expected a schema error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("/limits/rocof_lim_hz_s") !=
            std::string::npos);
    }
  }
  SUBCASE("unknown key") {
    const json doc = {{"fleet", dir.file("fleet.json")}, {"frobnicate", 1}};
    try {
      io::parse_config(doc, "");
      FAIL("expected a schema error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("/frobnicate") != std::string::npos);
    }
  }
  SUBCASE("missing fleet file") {
    const json doc = {{"fleet", dir.file("nope.json")}};
    CHECK_THROWS_AS(io::parse_config(doc, ""), Error);
  }
}

TEST_CASE("fleet JSON round-trips exactly") {
  const FleetDescription fleet = bundled_fixture().fleet;
  const json doc = io::fleet_to_json(fleet);
  const FleetDescription back = io::fleet_from_json(doc);
  CHECK(io::fleet_to_json(back).dump() == doc.dump());
  CHECK(back.sgs.size() == fleet.sgs.size());
  CHECK(back.converters.size() == fleet.converters.size());
}

TEST_CASE("profile CSVs load with converter-id column mapping") {
  TempDir dir;
  io::write_text_file(dir.file("demand.csv"),
                      "hour,demand_mw\n0,5400\n1,5280.5\n");
  const auto demand = io::load_demand_csv(dir.file("demand.csv"));
  REQUIRE(demand.size() == 2);
  CHECK(demand[1] == doctest::Approx(5280.5));

  FleetDescription fleet = bundled_fixture().fleet;
  // Columns deliberately out of order relative to the fleet.
  io::write_text_file(dir.file("wind.csv"),
                      "hour,ibr-27,ibr-26,ibr-28,ibr-29\n0,10,20,30,40\n");
  const auto wind = io::load_wind_csv(dir.file("wind.csv"), fleet);
  REQUIRE(wind.size() == 1);
  CHECK(wind[0][0] == doctest::Approx(20.0));  // ibr-26
  CHECK(wind[0][1] == doctest::Approx(10.0));  // ibr-27
  CHECK(wind[0][3] == doctest::Approx(40.0));

  io::write_text_file(dir.file("bad.csv"), "hour,ibr-26\n0,1\n");
  CHECK_THROWS_AS(io::load_wind_csv(dir.file("bad.csv"), fleet), Error);
}

TEST_CASE("curve serialization preserves coefficients and samples") {
  HeadroomCurve curve;
  curve.group_names = {"y1", "y2"};
  curve.k_i = {-2.5e-5, -1.25e-5};
  curve.k_0 = 0.31;
  curve.r_squared = 0.997;
  HeadroomSample s;
  s.point.y_mw = {3400.0, 1300.0};
  s.m_pu = 0.027;
  s.b1_at_limit = 0.35;
  s.synthesis.gain = {-2.08, -1.37};
  s.synthesis.nadir_bound = 0.016;
  s.synthesis.effort_bound = 0.027;
  curve.samples.push_back(s);

  const json doc = io::curve_to_json(curve, bundled_fixture().fleet);
  const HeadroomCurve back = io::curve_from_json(doc);
  CHECK(back.k_i[0] == doctest::Approx(curve.k_i[0]).epsilon(1e-15));
  CHECK(back.k_0 == doctest::Approx(curve.k_0).epsilon(1e-15));
  CHECK(back.samples.size() == 1);
  CHECK(back.samples[0].synthesis.gain.k1 == doctest::Approx(-2.08));
}

TEST_CASE("wind scenarios are deterministic and share draws across levels") {
  const std::vector<std::vector<double>> forecast{{100.0, 200.0},
                                                  {150.0, 250.0}};
  const std::vector<double> limits{300.0, 300.0};
  const auto a = io::wind_scenarios(forecast, limits, 0.1, 3, 42);
  const auto b = io::wind_scenarios(forecast, limits, 0.1, 3, 42);
  CHECK(a == b);

  const auto lo = io::wind_scenarios(forecast, limits, 0.05, 3, 42);
  // Same standard deviates: deviation from forecast scales with sigma.
  const double dev_hi = a[0][0][0] - 100.0;
  const double dev_lo = lo[0][0][0] - 100.0;
  if (std::abs(dev_lo) > 1e-9)
    CHECK(dev_hi / dev_lo == doctest::Approx(2.0).epsilon(1e-9));
  for (const auto& scenario : a)
    for (const auto& row : scenario)
      for (std::size_t c = 0; c < row.size(); ++c) {
        CHECK(row[c] >= 0.0);
        CHECK(row[c] <= limits[c]);
      }
}

TEST_CASE("bundled fixture is self-consistent") {
  const FixtureData fx = bundled_fixture();
  fx.fleet.validate();
  CHECK(fx.fleet.p_base_mw == doctest::Approx(8000.0));
  CHECK(fx.fleet.disturbance_mw == doctest::Approx(800.0));
  CHECK(fx.demand_mw.size() == 24);
  double lo = 1e18, hi = 0.0, sg_cap = 0.0;
  for (const double d : fx.demand_mw) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  CHECK(lo == doctest::Approx(5160.0));
  CHECK(hi == doctest::Approx(6240.0));
  for (const auto& g : fx.fleet.sgs) sg_cap += g.rating_mw;
  double ibr_cap = 0.0;
  for (const auto& c : fx.fleet.converters) ibr_cap += c.rating_mw;
  CHECK(sg_cap + ibr_cap == doctest::Approx(8000.0));
  // SGs alone can cover the peak (wind lulls must not strand demand).
  CHECK(sg_cap >= hi);
}

TEST_CASE("fixture files load back through the config path") {
  TempDir dir;
  const io::StudyConfig cfg = write_fixture_files(dir.file("fx"));
  const io::StudyConfig loaded = io::load_config(dir.file("fx") + "/config.json");
  CHECK(loaded.fleet_path == cfg.fleet_path);
  const FleetDescription fleet = io::load_fleet(loaded.fleet_path);
  CHECK(fleet.sgs.size() == 10);
  const auto demand = io::load_demand_csv(loaded.demand_path);
  CHECK(demand.size() == 24);
  const auto wind = io::load_wind_csv(loaded.wind_path, fleet);
  CHECK(wind.size() == 24);
}
