// Tiny standalone SVG emitters for the run artifacts: line plots for
// training curves and ROC/PR, scatter for PCA projections, bars for API
// frequency tables.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace snipforge::plot {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

namespace detail {

constexpr int kWidth = 640, kHeight = 420;
constexpr int kMarginL = 60, kMarginR = 20, kMarginT = 36, kMarginB = 46;

inline const char* color(size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  return palette[i % 6];
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline std::string header(const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) + "\" height=\"" +
                  std::to_string(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + std::to_string(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" + title +
       "</text>\n";
  return s;
}

inline std::string axes(double xmin, double xmax, double ymin, double ymax, const std::string& xlabel,
                        const std::string& ylabel) {
  int x0 = kMarginL, y0 = kHeight - kMarginB, x1 = kWidth - kMarginR, y1 = kMarginT;
  std::string s;
  s += "<line x1=\"" + std::to_string(x0) + "\" y1=\"" + std::to_string(y0) + "\" x2=\"" + std::to_string(x1) +
       "\" y2=\"" + std::to_string(y0) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + std::to_string(x0) + "\" y1=\"" + std::to_string(y0) + "\" x2=\"" + std::to_string(x0) +
       "\" y2=\"" + std::to_string(y1) + "\" stroke=\"black\"/>\n";
  s += "<text x=\"" + std::to_string((x0 + x1) / 2) + "\" y=\"" + std::to_string(kHeight - 10) +
       "\" text-anchor=\"middle\">" + xlabel + "</text>\n";
  s += "<text x=\"16\" y=\"" + std::to_string((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       std::to_string((y0 + y1) / 2) + ")\">" + ylabel + "</text>\n";
  s += "<text x=\"" + std::to_string(x0) + "\" y=\"" + std::to_string(y0 + 16) + "\">" + fmt(xmin) + "</text>\n";
  s += "<text x=\"" + std::to_string(x1) + "\" y=\"" + std::to_string(y0 + 16) + "\" text-anchor=\"end\">" + fmt(xmax) +
       "</text>\n";
  s += "<text x=\"" + std::to_string(x0 - 6) + "\" y=\"" + std::to_string(y0) + "\" text-anchor=\"end\">" + fmt(ymin) +
       "</text>\n";
  s += "<text x=\"" + std::to_string(x0 - 6) + "\" y=\"" + std::to_string(y1 + 4) + "\" text-anchor=\"end\">" +
       fmt(ymax) + "</text>\n";
  return s;
}

struct Scale {
  double xmin, xmax, ymin, ymax;

  double sx(double x) const {
    double t = xmax > xmin ? (x - xmin) / (xmax - xmin) : 0.5;
    return kMarginL + t * (kWidth - kMarginL - kMarginR);
  }
  double sy(double y) const {
    double t = ymax > ymin ? (y - ymin) / (ymax - ymin) : 0.5;
    return (kHeight - kMarginB) - t * (kHeight - kMarginT - kMarginB);
  }
};

inline Scale fit(const std::vector<Series>& series) {
  Scale s{0, 1, 0, 1};
  bool first = true;
  for (const auto& ser : series)
    for (const auto& [x, y] : ser.points) {
      if (first) {
        s = {x, x, y, y};
        first = false;
      }
      s.xmin = std::min(s.xmin, x);
      s.xmax = std::max(s.xmax, x);
      s.ymin = std::min(s.ymin, y);
      s.ymax = std::max(s.ymax, y);
    }
  if (s.xmax == s.xmin) s.xmax = s.xmin + 1;
  if (s.ymax == s.ymin) s.ymax = s.ymin + 1;
  return s;
}

}  // namespace detail

inline std::string line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                             const std::vector<Series>& series) {
  using namespace detail;
  Scale sc = fit(series);
  std::string s = header(title) + axes(sc.xmin, sc.xmax, sc.ymin, sc.ymax, xlabel, ylabel);
  for (size_t i = 0; i < series.size(); ++i) {
    std::string pts;
    for (const auto& [x, y] : series[i].points) pts += fmt(sc.sx(x)) + "," + fmt(sc.sy(y)) + " ";
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color(i)) + "\" stroke-width=\"1.5\" points=\"" + pts +
         "\"/>\n";
    s += "<text x=\"" + std::to_string(kWidth - kMarginR - 4) + "\" y=\"" + std::to_string(kMarginT + 16 * (i + 1)) +
         "\" text-anchor=\"end\" fill=\"" + color(i) + "\">" + series[i].name + "</text>\n";
  }
  return s + "</svg>\n";
}

struct LabelledPoint {
  double x, y;
  std::string label;
};

inline std::string scatter_plot(const std::string& title, const std::vector<LabelledPoint>& points,
                                size_t max_labels = 25) {
  using namespace detail;
  std::vector<Series> tmp(1);
  for (const auto& p : points) tmp[0].points.emplace_back(p.x, p.y);
  Scale sc = fit(tmp);
  std::string s = header(title) + axes(sc.xmin, sc.xmax, sc.ymin, sc.ymax, "pc1", "pc2");
  for (size_t i = 0; i < points.size(); ++i) {
    double px = sc.sx(points[i].x), py = sc.sy(points[i].y);
    s += "<circle cx=\"" + fmt(px) + "\" cy=\"" + fmt(py) + "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
    if (i < max_labels && !points[i].label.empty())
      s += "<text x=\"" + fmt(px + 4) + "\" y=\"" + fmt(py - 3) + "\" font-size=\"10\">" + points[i].label +
           "</text>\n";
  }
  return s + "</svg>\n";
}

inline std::string bar_chart(const std::string& title, const std::vector<std::pair<std::string, double>>& bars) {
  using namespace detail;
  std::string s = header(title);
  if (bars.empty()) return s + "</svg>\n";
  double vmax = 0;
  for (const auto& [_, v] : bars) vmax = std::max(vmax, v);
  if (vmax <= 0) vmax = 1;
  double span = static_cast<double>(kWidth - kMarginL - kMarginR);
  double bw = span / static_cast<double>(bars.size());
  int base = kHeight - kMarginB;
  for (size_t i = 0; i < bars.size(); ++i) {
    double h = (base - kMarginT) * bars[i].second / vmax;
    double x = kMarginL + bw * static_cast<double>(i);
    s += "<rect x=\"" + fmt(x + 2) + "\" y=\"" + fmt(base - h) + "\" width=\"" + fmt(bw - 4) + "\" height=\"" +
         fmt(h) + "\" fill=\"#1f77b4\"/>\n";
    s += "<text x=\"" + fmt(x + bw / 2) + "\" y=\"" + std::to_string(base + 14) +
         "\" text-anchor=\"middle\" font-size=\"9\">" + bars[i].first + "</text>\n";
  }
  s += "<line x1=\"" + std::to_string(kMarginL) + "\" y1=\"" + std::to_string(base) + "\" x2=\"" +
       std::to_string(kWidth - kMarginR) + "\" y2=\"" + std::to_string(base) + "\" stroke=\"black\"/>\n";
  return s + "</svg>\n";
}

}  // namespace snipforge::plot
