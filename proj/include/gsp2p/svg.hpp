#pragma once

#include <string>
#include <vector>

namespace gsp2p::svg {

struct Series {
  std::string label;
  std::string color = "#1f77b4";
  bool dashed = false;
  bool markers = false;
  std::vector<double> x;
  std::vector<double> y;
};

struct HLine {
  double y = 0.0;
  std::string label;
  std::string color = "#333333";
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<HLine> hlines;
  int width = 640;
  int height = 420;
};

std::string render(const Chart& chart);
void write(const Chart& chart, const std::string& path);

}  // namespace gsp2p::svg
