#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "pida2c/errors.hpp"

namespace pida2c {

struct SvgSeries {
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  std::string label;
};

struct SvgPanel {
  std::string title;
  std::string y_label;
  std::vector<SvgSeries> series;
  std::vector<std::pair<double, std::string>> hlines;  // value, color
};

namespace detail {

inline std::string fmt_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline void render_panel(std::string& out, const SvgPanel& panel, double ox,
                         double oy, double w, double h) {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  bool any = false;
  auto widen = [&](double x, double y) {
    if (!any) {
      x_min = x_max = x;
      y_min = y_max = y;
      any = true;
      return;
    }
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  };
  for (const auto& s : panel.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) widen(s.x[i], s.y[i]);
  for (const auto& hl : panel.hlines) widen(any ? x_min : 0.0, hl.first);
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  const double plot_x = ox + 64, plot_y = oy + 28;
  const double plot_w = w - 84, plot_h = h - 64;
  auto sx = [&](double x) {
    return plot_x + (x - x_min) / (x_max - x_min) * plot_w;
  };
  auto sy = [&](double y) {
    return plot_y + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
  };

  out += "<rect x='" + fmt_num(plot_x) + "' y='" + fmt_num(plot_y) +
         "' width='" + fmt_num(plot_w) + "' height='" + fmt_num(plot_h) +
         "' fill='none' stroke='#444'/>\n";
  out += "<text x='" + fmt_num(ox + w / 2) + "' y='" + fmt_num(oy + 16) +
         "' text-anchor='middle' font-size='13' font-family='sans-serif'>" +
         panel.title + "</text>\n";

  for (int k = 0; k <= 4; ++k) {
    const double fx = x_min + (x_max - x_min) * k / 4.0;
    const double fy = y_min + (y_max - y_min) * k / 4.0;
    out += "<text x='" + fmt_num(sx(fx)) + "' y='" +
           fmt_num(plot_y + plot_h + 14) +
           "' text-anchor='middle' font-size='10' font-family='sans-serif'>" +
           fmt_num(fx) + "</text>\n";
    out += "<text x='" + fmt_num(plot_x - 6) + "' y='" + fmt_num(sy(fy) + 3) +
           "' text-anchor='end' font-size='10' font-family='sans-serif'>" +
           fmt_num(fy) + "</text>\n";
    out += "<line x1='" + fmt_num(plot_x) + "' y1='" + fmt_num(sy(fy)) +
           "' x2='" + fmt_num(plot_x + plot_w) + "' y2='" + fmt_num(sy(fy)) +
           "' stroke='#ddd' stroke-width='0.5'/>\n";
  }
  if (!panel.y_label.empty()) {
    out += "<text x='" + fmt_num(ox + 12) + "' y='" +
           fmt_num(plot_y + plot_h / 2) +
           "' font-size='11' font-family='sans-serif' text-anchor='middle' "
           "transform='rotate(-90 " +
           fmt_num(ox + 12) + " " + fmt_num(plot_y + plot_h / 2) + ")'>" +
           panel.y_label + "</text>\n";
  }

  for (const auto& hl : panel.hlines) {
    out += "<line x1='" + fmt_num(plot_x) + "' y1='" + fmt_num(sy(hl.first)) +
           "' x2='" + fmt_num(plot_x + plot_w) + "' y2='" +
           fmt_num(sy(hl.first)) + "' stroke='" + hl.second +
           "' stroke-width='1.5' stroke-dasharray='6,3'/>\n";
  }
  for (const auto& s : panel.series) {
    if (s.x.empty()) continue;
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      pts += fmt_num(sx(s.x[i])) + "," + fmt_num(sy(s.y[i])) + " ";
    }
    out += "<polyline fill='none' stroke='" + s.color +
           "' stroke-width='1' points='" + pts + "'/>\n";
  }
}

}  // namespace detail

// Vertically stacked line-chart panels sharing one x axis meaning.
inline void write_svg_panels(const std::string& path,
                             const std::vector<SvgPanel>& panels,
                             const std::string& x_label,
                             double width = 880, double panel_height = 240) {
  const double height = panel_height * static_cast<double>(panels.size()) + 20;
  std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='" +
                    detail::fmt_num(width) + "' height='" +
                    detail::fmt_num(height) + "'>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    detail::render_panel(out, panels[i], 0, panel_height * static_cast<double>(i),
                         width, panel_height);
  }
  out += "<text x='" + detail::fmt_num(width / 2) + "' y='" +
         detail::fmt_num(height - 4) +
         "' text-anchor='middle' font-size='12' font-family='sans-serif'>" +
         x_label + "</text>\n</svg>\n";
  std::ofstream file(path);
  if (!file) throw IoError(path, "cannot open for writing");
  file << out;
  if (!file) throw IoError(path, "write failed");
}

}  // namespace pida2c
