#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gsp2p/errors.hpp"
#include "gsp2p/lp_format.hpp"
#include "gsp2p/milp.hpp"

using namespace gsp2p::milp;

TEST_CASE("pure LP: textbook two-variable problem") {
  // max x + y st x + 2y <= 4, 3x + y <= 6  ->  min -(x+y), optimum (1.6, 1.2).
  Model m;
  const int x = m.add_var("x", 0, kInf, -1.0);
  const int y = m.add_var("y", 0, kInf, -1.0);
  m.add_row("r1", RowSense::le, 4.0, {{x, 1.0}, {y, 2.0}});
  m.add_row("r2", RowSense::le, 6.0, {{x, 3.0}, {y, 1.0}});
  const LpResult res = solve_lp(m);
  REQUIRE(res.status == SolveStatus::optimal);
  CHECK(res.objective == doctest::Approx(-2.8).epsilon(1e-9));
  CHECK(res.x(x) == doctest::Approx(1.6).epsilon(1e-9));
  CHECK(res.x(y) == doctest::Approx(1.2).epsilon(1e-9));
}

TEST_CASE("LP with equality rows and bounded variables") {
  Model m;
  const int a = m.add_var("a", 0.0, 2.0, 1.0);
  const int b = m.add_var("b", 0.5, 3.0, 2.0);
  m.add_row("sum", RowSense::eq, 3.0, {{a, 1.0}, {b, 1.0}});
  const LpResult res = solve_lp(m);
  REQUIRE(res.status == SolveStatus::optimal);
  // Cheapest split: a at its upper bound.
  CHECK(res.x(a) == doctest::Approx(2.0));
  CHECK(res.x(b) == doctest::Approx(1.0));
  CHECK(res.objective == doctest::Approx(4.0));
}

TEST_CASE("infeasible and unbounded LPs are reported") {
  SUBCASE("infeasible") {
    Model m;
    const int x = m.add_var("x", 0.0, 1.0, 1.0);
    m.add_row("r", RowSense::ge, 5.0, {{x, 1.0}});
    CHECK(solve_lp(m).status == SolveStatus::infeasible);
  }
  SUBCASE("unbounded") {
    Model m;
    const int x = m.add_var("x", 0.0, kInf, -1.0);
    m.add_row("r", RowSense::ge, 1.0, {{x, 1.0}});
    CHECK(solve_lp(m).status == SolveStatus::unbounded);
  }
}

TEST_CASE("LP degenerate dispatch matches the merit-order oracle") {
  // Single-period dispatch: fixed commitment, min marginal cost subject to
  // balance; merit order with minimum loads is the exact solution.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 4;
    std::vector<double> pmin(n), pmax(n), cost(n);
    double total_min = 0.0, total_max = 0.0;
    for (int i = 0; i < n; ++i) {
      pmax[i] = 200.0 + 600.0 * u(rng);
      pmin[i] = 0.3 * pmax[i];
      cost[i] = 10.0 + 90.0 * u(rng);
      total_min += pmin[i];
      total_max += pmax[i];
    }
    const double demand = total_min + (total_max - total_min) * u(rng);

    Model m;
    std::vector<int> pj;
    std::vector<std::pair<int, double>> balance;
    for (int i = 0; i < n; ++i) {
      pj.push_back(m.add_var("p" + std::to_string(i), pmin[i], pmax[i], cost[i]));
      balance.push_back({pj[i], 1.0});
    }
    m.add_row("bal", RowSense::eq, demand, std::move(balance));
    const LpResult res = solve_lp(m);
    REQUIRE(res.status == SolveStatus::optimal);

    // Merit order: everyone at minimum, then fill cheapest first.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return cost[a] < cost[b]; });
    double remaining = demand - total_min;
    double expected = 0.0;
    for (int i = 0; i < n; ++i) expected += pmin[i] * cost[i];
    for (const int i : order) {
      const double add = std::min(remaining, pmax[i] - pmin[i]);
      expected += add * cost[i];
      remaining -= add;
    }
    CHECK(res.objective == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("MILP with no binaries is a single LP solve") {
  Model m;
  const int x = m.add_var("x", 0.0, 10.0, 1.0);
  m.add_row("r", RowSense::ge, 3.0, {{x, 1.0}});
  const MilpResult res = solve_milp(m);
  REQUIRE(res.status == SolveStatus::optimal);
  CHECK(res.objective == doctest::Approx(3.0));
  CHECK(res.nodes == 1);
}

TEST_CASE("small knapsack-style MILP against exhaustive enumeration") {
  // min cost selection covering a demand; 10 binaries, brute force 1024.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 10;
    std::vector<double> cap(n), fix(n), var(n);
    for (int i = 0; i < n; ++i) {
      cap[i] = 100.0 + 400.0 * u(rng);
      fix[i] = 500.0 + 2000.0 * u(rng);
      var[i] = 20.0 + 60.0 * u(rng);
    }
    const double demand = 0.55 * std::accumulate(cap.begin(), cap.end(), 0.0);

    Model m;
    std::vector<int> uj(n), pj(n);
    std::vector<std::pair<int, double>> balance;
    for (int i = 0; i < n; ++i) {
      uj[i] = m.add_var("u" + std::to_string(i), 0, 1, fix[i], true);
      pj[i] = m.add_var("p" + std::to_string(i), 0, cap[i], var[i]);
      m.add_row("link" + std::to_string(i), RowSense::le, 0.0,
                {{pj[i], 1.0}, {uj[i], -cap[i]}});
      balance.push_back({pj[i], 1.0});
    }
    m.add_row("bal", RowSense::eq, demand, std::move(balance));
    const MilpResult res = solve_milp(m);
    REQUIRE(res.status == SolveStatus::optimal);

    // Exhaustive oracle: for a fixed selection the LP is merit order.
    double best = kInf;
    for (int mask = 0; mask < (1 << n); ++mask) {
      double capacity = 0.0, cost = 0.0;
      for (int i = 0; i < n; ++i)
        if (mask & (1 << i)) capacity += cap[i];
      if (capacity < demand - 1e-9) continue;
      for (int i = 0; i < n; ++i)
        if (mask & (1 << i)) cost += fix[i];
      std::vector<int> order;
      for (int i = 0; i < n; ++i)
        if (mask & (1 << i)) order.push_back(i);
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return var[a] < var[b]; });
      double remaining = demand;
      for (const int i : order) {
        const double add = std::min(remaining, cap[i]);
        cost += add * var[i];
        remaining -= add;
      }
      best = std::min(best, cost);
    }
    CHECK(res.objective == doctest::Approx(best).epsilon(1e-6));
  }
}

TEST_CASE("deterministic: identical MILP inputs give identical outputs") {
  Model m;
  const int u1 = m.add_var("u1", 0, 1, 100.0, true);
  const int u2 = m.add_var("u2", 0, 1, 120.0, true);
  const int p1 = m.add_var("p1", 0, 5.0, 10.0);
  const int p2 = m.add_var("p2", 0, 5.0, 9.0);
  m.add_row("l1", RowSense::le, 0.0, {{p1, 1.0}, {u1, -5.0}});
  m.add_row("l2", RowSense::le, 0.0, {{p2, 1.0}, {u2, -5.0}});
  m.add_row("bal", RowSense::eq, 7.0, {{p1, 1.0}, {p2, 1.0}});
  const MilpResult r1 = solve_milp(m);
  const MilpResult r2 = solve_milp(m);
  CHECK(r1.objective == r2.objective);
  CHECK((r1.x - r2.x).norm() == 0.0);
  CHECK(r1.nodes == r2.nodes);
}

TEST_CASE("LP text round-trips byte-identically through our reader") {
  Model m;
  m.name = "roundtrip";
  const int u = m.add_var("u0", 0, 1, 1900.0, true);
  const int p = m.add_var("p0", 0.0, 850.0, 28.5);
  const int w = m.add_var("w0", 0.0, 312.5, 0.0);
  const int f = m.add_var("fr", -kInf, kInf, 0.0);
  m.add_var("fixed", 2.5, 2.5, 0.0);
  m.add_row("bal", RowSense::eq, 900.0, {{p, 1.0}, {w, 1.0}});
  m.add_row("pmax", RowSense::le, 0.0, {{p, 1.0}, {u, -850.0}});
  m.add_row("odd", RowSense::ge, -12.25, {{f, 0.3333333333333333}, {w, -1.0}});
  const std::string text1 = write_lp(m);
  const Model parsed = parse_lp(text1);
  const std::string text2 = write_lp(parsed);
  CHECK(text1 == text2);

  // And the parsed model solves to the same optimum.
  const MilpResult a = solve_milp(m);
  const MilpResult b = solve_milp(parsed);
  REQUIRE(a.status == SolveStatus::optimal);
  REQUIRE(b.status == SolveStatus::optimal);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-12));
}

TEST_CASE("empty-constraint model exports header and bounds only") {
  Model m;
  m.add_var("x", 0.0, 2.0, 1.0);
  const std::string text = write_lp(m);
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("Bounds") != std::string::npos);
  CHECK(text.find("Subject To") == std::string::npos);
  const Model parsed = parse_lp(text);
  CHECK(parsed.vars.size() == 1);
  CHECK(parsed.rows.empty());
}

TEST_CASE("model validation rejects malformed input") {
  Model m;
  m.add_var("x", 1.0, 0.0, 1.0);  // lb > ub
  CHECK_THROWS_AS(m.validate(), gsp2p::Error);
}
