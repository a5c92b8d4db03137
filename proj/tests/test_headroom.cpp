#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gsp2p/errors.hpp"
#include "gsp2p/headroom.hpp"
#include "gsp2p/pipeline.hpp"
#include "gsp2p/system_model.hpp"
#include "support/oracles.hpp"

using namespace gsp2p;

namespace {

constexpr double kWLim = 0.8 / 50.0;
constexpr double kDpl = 0.1;

const FixtureData& fixture() {
  static const FixtureData fx = bundled_fixture();
  return fx;
}

}  // namespace

TEST_CASE("groups derive from identical dynamic parameters") {
  const auto groups = derive_groups(fixture().fleet);
  REQUIRE(groups.size() == 3);
  CHECK(groups[0].sg_indices.size() == 4);
  CHECK(groups[1].sg_indices.size() == 3);
  CHECK(groups[2].sg_indices.size() == 3);
  CHECK(groups[0].name == "y1");
}

TEST_CASE("grid generation counts") {
  const auto groups = derive_groups(fixture().fleet);

  SUBCASE("single group, five levels") {
    const std::vector<SgGroup> one = {groups[0]};
    // 5 levels over 0..4 units, minus the all-off point.
    CHECK(generate_grid(fixture().fleet, one, 5).size() == 4);
  }
  SUBCASE("two groups, three levels each") {
    const std::vector<SgGroup> two = {groups[0], groups[1]};
    // 3x3 combinations minus the all-off point.
    CHECK(generate_grid(fixture().fleet, two, 3).size() == 8);
  }
  SUBCASE("full grid covers the commitment range") {
    const auto grid = generate_grid(fixture().fleet, groups, 5);
    double y_min = 1e18, y_max = 0.0;
    for (const auto& point : grid) {
      const double y =
          std::accumulate(point.y_mw.begin(), point.y_mw.end(), 0.0);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
    CHECK(y_min == doctest::Approx(450.0));   // one small unit
    CHECK(y_max == doctest::Approx(6700.0));  // everything on
  }
}

TEST_CASE("headroom sample: bound meets the limit and is simulation-sound") {
  const auto groups = derive_groups(fixture().fleet);
  const OperatingPoint point = make_point(fixture().fleet, groups, {3, 2, 3});
  const HeadroomSample sample =
      headroom_for_point(fixture().fleet, point, kWLim, kDpl);

  CHECK(sample.m_pu > 0.0);
  CHECK(sample.synthesis.nadir_bound <= kWLim * (1.0 + 1e-4));

  // Soundness chain: simulated nadir within the limit, injection within m.
  const AggregateModel agg = aggregate_fleet(fixture().fleet, point.commitment);
  const auto sim = oracles::simulate_frequency(
      agg, sample.synthesis.gain.virtual_inertia(),
      sample.synthesis.gain.virtual_damping(), kDpl, 1e-3, 40.0);
  double nadir = 0.0, inj = 0.0;
  for (const auto& x : sim.x) {
    nadir = std::max(nadir, std::abs(x(0)));
    inj = std::max(inj, std::abs(sample.synthesis.gain.k1 * x(0) +
                                 sample.synthesis.gain.k2 * x(1)));
  }
  CHECK(nadir <= kWLim + 1e-4);
  CHECK(inj <= sample.m_pu + 1e-6);
}

TEST_CASE("relaxed limit above the open-loop bound needs no headroom") {
  const auto groups = derive_groups(fixture().fleet);
  const OperatingPoint point = make_point(fixture().fleet, groups, {4, 3, 3});
  const AggregateModel agg = aggregate_fleet(fixture().fleet, point.commitment);
  const double generous =
      open_loop_bound(agg, kDpl).nadir_bound * 1.5;
  const HeadroomSample sample =
      headroom_for_point(fixture().fleet, point, generous, kDpl);
  CHECK(sample.m_pu == 0.0);
}

TEST_CASE("infeasible point: weakest support in range cannot meet the limit") {
  const auto groups = derive_groups(fixture().fleet);
  // Thin commitment with the effort weight restricted to mild support.
  const OperatingPoint point = make_point(fixture().fleet, groups, {1, 1, 1});
  CHECK_THROWS_WITH_AS(
      headroom_for_point(fixture().fleet, point, kWLim, kDpl, {50.0, 1e3}),
      "infeasible operating point", Error);
}

TEST_CASE("exact plane is recovered by the fit") {
  // Synthetic samples on m = a y1 + b y2 + c.
  const double a = -2e-5, b = -1.5e-5, c = 0.2;
  std::vector<HeadroomSample> samples;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 9; ++i) {
    HeadroomSample s;
    s.point.y_mw = {1000.0 + 4000.0 * u(rng), 500.0 + 2500.0 * u(rng)};
    s.m_pu = a * s.point.y_mw[0] + b * s.point.y_mw[1] + c;
    samples.push_back(s);
  }
  const HeadroomCurve curve = fit_headroom_curve(samples, {"y1", "y2"});
  CHECK(curve.k_i[0] == doctest::Approx(a).epsilon(1e-10));
  CHECK(curve.k_i[1] == doctest::Approx(b).epsilon(1e-10));
  CHECK(curve.k_0 == doctest::Approx(c).epsilon(1e-10));
  CHECK(curve.r_squared == doctest::Approx(1.0));

  SUBCASE("permutation invariance") {
    std::vector<HeadroomSample> shuffled = samples;
    std::reverse(shuffled.begin(), shuffled.end());
    const HeadroomCurve curve2 = fit_headroom_curve(shuffled, {"y1", "y2"});
    CHECK(curve2.k_i[0] == doctest::Approx(curve.k_i[0]).epsilon(1e-12));
    CHECK(curve2.k_0 == doctest::Approx(curve.k_0).epsilon(1e-12));
  }

  SUBCASE("residual orthogonality on noisy samples") {
    std::vector<HeadroomSample> noisy = samples;
    for (auto& s : noisy) s.m_pu += 1e-3 * (u(rng) - 0.5);
    const HeadroomCurve curve2 = fit_headroom_curve(noisy, {"y1", "y2"});
    // Residuals orthogonal to each design column.
    for (int col = 0; col < 3; ++col) {
      double dot = 0.0;
      for (const auto& s : noisy) {
        const double fit = curve2.k_i[0] * s.point.y_mw[0] +
                           curve2.k_i[1] * s.point.y_mw[1] + curve2.k_0;
        const double r = s.m_pu - fit;
        dot += r * (col < 2 ? s.point.y_mw[col] : 1.0);
      }
      CHECK(std::abs(dot) < 1e-9 * (1.0 + 5000.0 * noisy.size()));
    }
  }
}

TEST_CASE("degenerate sampling is rejected") {
  std::vector<HeadroomSample> samples;
  for (int i = 0; i < 4; ++i) {
    HeadroomSample s;
    s.point.y_mw = {1000.0 + i * 500.0, 2000.0};  // second column constant
    s.m_pu = 0.1;
    samples.push_back(s);
  }
  CHECK_THROWS_WITH_AS(fit_headroom_curve(samples, {"y1", "y2"}),
                       "degenerate sampling", Error);
}

TEST_CASE("bad linear fits are rejected outright") {
  std::vector<HeadroomSample> samples;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 12; ++i) {
    HeadroomSample s;
    s.point.y_mw = {1000.0 + 4000.0 * u(rng)};
    s.m_pu = u(rng);  // pure noise
    samples.push_back(s);
  }
  CHECK_THROWS_AS(fit_headroom_curve(samples, {"y1"}), Error);
}

TEST_CASE("prediction clamps at zero and stays within fit residuals") {
  const double a = -2e-5, c = 0.05;
  std::vector<HeadroomSample> samples;
  for (int i = 0; i < 4; ++i) {
    HeadroomSample s;
    s.point.y_mw = {500.0 * (i + 1)};
    s.m_pu = std::max(0.0, a * s.point.y_mw[0] + c);
    samples.push_back(s);
  }
  const HeadroomCurve curve = fit_headroom_curve(samples, {"y1"});
  // Far beyond the zero crossing the clamp engages.
  CHECK(predict_min_headroom(curve, {4000.0}) == 0.0);
  // At a training sample the prediction reproduces the sample value.
  CHECK(predict_min_headroom(curve, {1000.0}) ==
        doctest::Approx(samples[1].m_pu).epsilon(1e-9));
}

TEST_CASE("gains_for_budget: effort within budget, monotone support") {
  const auto groups = derive_groups(fixture().fleet);
  const OperatingPoint point = make_point(fixture().fleet, groups, {3, 2, 3});
  const AggregateModel agg = aggregate_fleet(fixture().fleet, point.commitment);
  const HeadroomSample sample =
      headroom_for_point(fixture().fleet, point, kWLim, kDpl);

  const SynthesisResult full = gains_for_budget(agg, kDpl, sample.m_pu);
  CHECK(full.effort_bound <= sample.m_pu + 1e-9);
  CHECK(full.nadir_bound <= kWLim * (1.0 + 2e-2));

  const SynthesisResult half = gains_for_budget(agg, kDpl, 0.5 * sample.m_pu);
  CHECK(half.effort_bound <= 0.5 * sample.m_pu + 1e-9);
  CHECK(half.nadir_bound >= full.nadir_bound - 1e-9);

  const SynthesisResult none = gains_for_budget(agg, kDpl, 0.0);
  CHECK(none.effort_bound == 0.0);
}
