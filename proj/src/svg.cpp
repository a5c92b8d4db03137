#include "gsp2p/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "gsp2p/errors.hpp"

namespace gsp2p::svg {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (!(lo < hi)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
};

}  // namespace

std::string render(const Chart& chart) {
  const double ml = 64, mr = 16, mt = 32, mb = 46;
  const double pw = chart.width - ml - mr;
  const double ph = chart.height - mt - mb;

  Range xr, yr;
  for (const auto& s : chart.series) {
    for (const double v : s.x) xr.add(v);
    for (const double v : s.y) yr.add(v);
  }
  for (const auto& h : chart.hlines) yr.add(h.y);
  xr.pad();
  yr.pad();

  const auto px = [&](double v) { return ml + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
  const auto py = [&](double v) { return mt + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(chart.width) + "\" height=\"" +
         std::to_string(chart.height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(chart.width / 2.0) +
         "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" +
         escape(chart.title) + "</text>\n";

  // Axes with 5 ticks per side.
  out += "<g stroke=\"#888\" stroke-width=\"1\">\n";
  out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" +
         num(ml + pw) + "\" y2=\"" + num(mt + ph) + "\"/>\n";
  out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) +
         "\" y2=\"" + num(mt + ph) + "\"/>\n";
  out += "</g>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = xr.lo + k * (xr.hi - xr.lo) / 5.0;
    const double yv = yr.lo + k * (yr.hi - yr.lo) / 5.0;
    out += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(mt + ph + 16) +
           "\" text-anchor=\"middle\" fill=\"#444\">" + num(xv) + "</text>\n";
    out += "<text x=\"" + num(ml - 6) + "\" y=\"" + num(py(yv) + 4) +
           "\" text-anchor=\"end\" fill=\"#444\">" + num(yv) + "</text>\n";
    out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(py(yv)) + "\" x2=\"" +
           num(ml + pw) + "\" y2=\"" + num(py(yv)) +
           "\" stroke=\"#eee\" stroke-width=\"1\"/>\n";
  }
  out += "<text x=\"" + num(ml + pw / 2.0) + "\" y=\"" +
         num(chart.height - 8.0) + "\" text-anchor=\"middle\">" +
         escape(chart.x_label) + "</text>\n";
  out += "<text x=\"14\" y=\"" + num(mt + ph / 2.0) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         num(mt + ph / 2.0) + ")\">" + escape(chart.y_label) + "</text>\n";

  for (const auto& h : chart.hlines) {
    out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(py(h.y)) + "\" x2=\"" +
           num(ml + pw) + "\" y2=\"" + num(py(h.y)) + "\" stroke=\"" + h.color +
           "\" stroke-width=\"1.2\" stroke-dasharray=\"6 3\"/>\n";
    if (!h.label.empty())
      out += "<text x=\"" + num(ml + pw - 4) + "\" y=\"" + num(py(h.y) - 4) +
             "\" text-anchor=\"end\" fill=\"" + h.color + "\">" +
             escape(h.label) + "</text>\n";
  }

  double legend_y = mt + 6;
  for (const auto& s : chart.series) {
    if (s.x.empty()) continue;
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      points += num(px(s.x[i])) + "," + num(py(s.y[i]));
      if (i + 1 < s.x.size()) points += " ";
    }
    out += "<polyline fill=\"none\" stroke=\"" + s.color +
           "\" stroke-width=\"1.6\"" +
           (s.dashed ? std::string(" stroke-dasharray=\"5 3\"") : "") +
           " points=\"" + points + "\"/>\n";
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" +
               num(py(s.y[i])) + "\" r=\"2.4\" fill=\"" + s.color + "\"/>\n";
    }
    if (!s.label.empty()) {
      out += "<line x1=\"" + num(ml + pw - 120) + "\" y1=\"" + num(legend_y) +
             "\" x2=\"" + num(ml + pw - 100) + "\" y2=\"" + num(legend_y) +
             "\" stroke=\"" + s.color + "\" stroke-width=\"1.6\"" +
             (s.dashed ? std::string(" stroke-dasharray=\"5 3\"") : "") + "/>\n";
      out += "<text x=\"" + num(ml + pw - 94) + "\" y=\"" + num(legend_y + 4) +
             "\">" + escape(s.label) + "</text>\n";
      legend_y += 16;
    }
  }
  out += "</svg>\n";
  return out;
}

void write(const Chart& chart, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot open " + path + " for writing");
  f << render(chart);
  if (!f) throw Error(ErrorCode::io, "failed writing " + path);
}

}  // namespace gsp2p::svg
