#include <filesystem>
#include <map>
#include <sstream>

#include "gsp2p/errors.hpp"
#include "gsp2p/io.hpp"
#include "gsp2p/pipeline.hpp"
#include "gsp2p/svg.hpp"

namespace gsp2p {

namespace {

namespace fs = std::filesystem;

// Column-oriented CSV with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
  std::vector<double> numbers(int c) const {
    std::vector<double> out;
    for (const auto& row : rows) out.push_back(std::stod(row[c]));
    return out;
  }
};

Table read_table(const std::string& path) {
  std::istringstream in(io::read_text_file(path));
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (first) {
      t.header = fields;
      first = false;
    } else {
      t.rows.push_back(fields);
    }
  }
  return t;
}

const char* kBlue = "#1f77b4";
const char* kRed = "#d62728";
const char* kGreen = "#2ca02c";

}  // namespace

std::vector<std::string> render_reports(const std::string& out_dir) {
  std::vector<std::string> written;
  const auto have = [&](const std::string& name) {
    return fs::exists(fs::path(out_dir) / name);
  };
  const auto path_of = [&](const std::string& name) {
    return (fs::path(out_dir) / name).string();
  };

  if (have("ellipse.csv")) {
    const Table t = read_table(path_of("ellipse.csv"));
    svg::Chart chart;
    chart.title = "Invariant ellipse and shifted state trajectory";
    chart.x_label = "frequency deviation [Hz]";
    chart.y_label = "RoCoF [Hz/s]";
    svg::Series ellipse{"ellipse", kBlue, false, false, {}, {}};
    svg::Series traj{"trajectory", kRed, false, false, {}, {}};
    svg::Series init{"initial state", kGreen, false, true, {}, {}};
    const int kind = t.col("kind"), x = t.col("x1_hz"), y = t.col("x2_hz_s");
    for (const auto& row : t.rows) {
      svg::Series* s = row[kind] == "ellipse"
                           ? &ellipse
                           : row[kind] == "trajectory" ? &traj : &init;
      s->x.push_back(std::stod(row[x]));
      s->y.push_back(std::stod(row[y]));
    }
    chart.series = {ellipse, traj, init};
    svg::write(chart, path_of("ellipse.svg"));
    written.push_back("ellipse.svg");
  }

  if (have("gains_iterations.csv")) {
    const Table t = read_table(path_of("gains_iterations.csv"));
    svg::Chart chart;
    chart.title = "Gain iteration progress";
    chart.x_label = "iteration";
    chart.y_label = "gain value [p.u.]";
    const std::vector<double> it = t.numbers(t.col("iteration"));
    chart.series = {{"K1", kBlue, false, true, it, t.numbers(t.col("k1"))},
                    {"K2", kRed, false, true, it, t.numbers(t.col("k2"))}};
    svg::write(chart, path_of("gains_convergence.svg"));
    written.push_back("gains_convergence.svg");
  }

  if (have("trace_open.csv") || have("trace_closed.csv")) {
    svg::Chart chart;
    chart.title = "Frequency deviation after the step disturbance";
    chart.x_label = "time [s]";
    chart.y_label = "frequency deviation [Hz]";
    if (have("trace_open.csv")) {
      const Table t = read_table(path_of("trace_open.csv"));
      chart.series.push_back({"open loop", kBlue, false, false,
                              t.numbers(t.col("t_s")),
                              t.numbers(t.col("omega_hz"))});
    }
    if (have("trace_closed.csv")) {
      const Table t = read_table(path_of("trace_closed.csv"));
      chart.series.push_back({"with support", kRed, false, false,
                              t.numbers(t.col("t_s")),
                              t.numbers(t.col("omega_hz"))});
    }
    chart.hlines.push_back({-0.8, "UFLS threshold", "#333333"});
    svg::write(chart, path_of("frequency.svg"));
    written.push_back("frequency.svg");
  }

  if (have("trace_closed.csv")) {
    const Table t = read_table(path_of("trace_closed.csv"));
    svg::Chart chart;
    chart.title = "Support power injection";
    chart.x_label = "time [s]";
    chart.y_label = "power [MW]";
    const std::vector<double> ts = t.numbers(t.col("t_s"));
    chart.series = {
        {"total", kBlue, false, false, ts, t.numbers(t.col("dp_c_mw"))},
        {"damping share", kGreen, true, false, ts, t.numbers(t.col("p_d_mw"))},
        {"inertia share", kRed, true, false, ts, t.numbers(t.col("p_m_mw"))}};
    svg::write(chart, path_of("injection.svg"));
    written.push_back("injection.svg");
  }

  if (have("tradeoff.csv")) {
    const Table t = read_table(path_of("tradeoff.csv"));
    svg::Chart chart;
    chart.title = "Performance vs control effort";
    chart.x_label = "effort bound [p.u.]";
    chart.y_label = "nadir bound [p.u.]";
    chart.series = {{"sweep", kBlue, false, true,
                     t.numbers(t.col("effort_bound_pu")),
                     t.numbers(t.col("nadir_bound_pu"))}};
    svg::write(chart, path_of("tradeoff.svg"));
    written.push_back("tradeoff.svg");
  }

  if (have("headroom_sweep.csv")) {
    const Table t = read_table(path_of("headroom_sweep.csv"));
    svg::Chart chart;
    chart.title = "Minimum headroom vs online SG capacity";
    chart.x_label = "total online SG capacity [MW]";
    chart.y_label = "headroom m [MW]";
    const int mcol = t.col("m_mw"), fit = t.col("fit_mw");
    std::map<double, std::pair<double, double>> by_y;  // y_total -> (m, fit)
    const int ytot = t.col("y_total_mw");
    for (const auto& row : t.rows)
      by_y[std::stod(row[ytot])] = {std::stod(row[mcol]),
                                    std::stod(row[fit])};
    svg::Series pts{"samples", kBlue, false, true, {}, {}};
    svg::Series line{"linear fit", kRed, true, false, {}, {}};
    for (const auto& [y, mv] : by_y) {
      pts.x.push_back(y);
      pts.y.push_back(mv.first);
      line.x.push_back(y);
      line.y.push_back(mv.second);
    }
    chart.series = {pts, line};
    svg::write(chart, path_of("headroom_curve.svg"));
    written.push_back("headroom_curve.svg");
  }

  if (have("cost_comparison.csv")) {
    const Table t = read_table(path_of("cost_comparison.csv"));
    svg::Chart chart;
    chart.title = "Operation cost vs installed wind capacity";
    chart.x_label = "wind capacity [MW]";
    chart.y_label = "cost [currency]";
    const std::vector<double> w = t.numbers(t.col("wind_capacity_mw"));
    chart.series = {
        {"base", kGreen, false, true, w, t.numbers(t.col("cost_base"))},
        {"proposed", kRed, false, true, w,
         t.numbers(t.col("cost_proposed_linear"))},
        {"analytic relaxed", kBlue, false, true, w,
         t.numbers(t.col("cost_analytic_relaxed"))}};
    svg::write(chart, path_of("cost_comparison.svg"));
    written.push_back("cost_comparison.svg");
  }

  if (have("reserve_comparison.csv")) {
    const Table t = read_table(path_of("reserve_comparison.csv"));
    svg::Chart chart;
    chart.title = "Hourly-averaged IBR reserve";
    chart.x_label = "wind capacity [MW]";
    chart.y_label = "reserve [MW]";
    const std::vector<double> w = t.numbers(t.col("wind_capacity_mw"));
    chart.series = {{"proposed", kRed, false, true, w,
                     t.numbers(t.col("reserve_proposed_linear"))},
                    {"analytic relaxed", kBlue, false, true, w,
                     t.numbers(t.col("reserve_analytic_relaxed"))}};
    svg::write(chart, path_of("reserve_comparison.svg"));
    written.push_back("reserve_comparison.svg");
  }

  if (have("redispatch.csv")) {
    const Table t = read_table(path_of("redispatch.csv"));
    svg::Chart chart;
    chart.title = "Second-stage cost vs wind uncertainty";
    chart.x_label = "sigma / mu";
    chart.y_label = "mean cost [currency]";
    std::map<double, std::pair<double, double>> agg;  // sigma -> (sum I, sum III)
    std::map<double, int> counts;
    const int sc = t.col("sigma_over_mu"), ci = t.col("cost_redesign"),
              cf = t.col("cost_frozen");
    for (const auto& row : t.rows) {
      const double s = std::stod(row[sc]);
      agg[s].first += std::stod(row[ci]);
      agg[s].second += std::stod(row[cf]);
      counts[s] += 1;
    }
    svg::Series a{"redesigned gains", kRed, false, true, {}, {}};
    svg::Series b{"frozen gains", kBlue, false, true, {}, {}};
    for (const auto& [s, sums] : agg) {
      a.x.push_back(s);
      a.y.push_back(sums.first / counts[s]);
      b.x.push_back(s);
      b.y.push_back(sums.second / counts[s]);
    }
    chart.series = {a, b};
    svg::write(chart, path_of("uncertainty.svg"));
    written.push_back("uncertainty.svg");
  }

  if (written.empty())
    throw Error(ErrorCode::invalid_argument, "nothing to report");
  return written;
}

}  // namespace gsp2p
