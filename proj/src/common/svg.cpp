#include "stressfuse/common/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace stressfuse::svg {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string grouped_bars(const std::string& title, const std::vector<std::string>& categories,
                         const std::vector<BarSeries>& series, double y_max) {
  const double left = 60, top = 40, plot_h = 240, group_w = 120, bar_gap = 4;
  const double plot_w = group_w * static_cast<double>(std::max<std::size_t>(categories.size(), 1));
  const double width = left + plot_w + 160, height = top + plot_h + 50;
  const double bar_w = (group_w - 20) / static_cast<double>(std::max<std::size_t>(series.size(), 1)) - bar_gap;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<text x=\"" + num(left) + "\" y=\"20\" font-size=\"14\">" + escape(title) + "</text>\n";
  s += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + plot_h) + "\" x2=\"" + num(left + plot_w) + "\" y2=\"" +
       num(top + plot_h) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = y_max * t / 4.0, y = top + plot_h - plot_h * t / 4.0;
    s += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + num(v) + "</text>\n";
  }
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = left + group_w * static_cast<double>(c) + 10;
    for (std::size_t k = 0; k < series.size(); ++k) {
      const double v = std::clamp(series[k].values.at(c), 0.0, y_max);
      const double h = y_max > 0 ? plot_h * v / y_max : 0.0;
      const double x = gx + static_cast<double>(k) * (bar_w + bar_gap);
      s += "<rect x=\"" + num(x) + "\" y=\"" + num(top + plot_h - h) + "\" width=\"" + num(bar_w) + "\" height=\"" +
           num(h) + "\" fill=\"" + series[k].color + "\"/>\n";
    }
    s += "<text x=\"" + num(gx + (group_w - 20) / 2) + "\" y=\"" + num(top + plot_h + 18) +
         "\" text-anchor=\"middle\">" + escape(categories[c]) + "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double y = top + 20.0 * static_cast<double>(k);
    s += "<rect x=\"" + num(left + plot_w + 20) + "\" y=\"" + num(y) + "\" width=\"12\" height=\"12\" fill=\"" +
         series[k].color + "\"/>\n";
    s += "<text x=\"" + num(left + plot_w + 38) + "\" y=\"" + num(y + 10) + "\">" + escape(series[k].name) +
         "</text>\n";
  }
  return s + "</svg>\n";
}

std::string signed_hbars(const std::string& title, const std::vector<std::string>& labels,
                         const std::vector<double>& values) {
  const double label_w = 200, half = 200, row_h = 18, top = 40;
  const double width = label_w + 2 * half + 40, height = top + row_h * static_cast<double>(labels.size()) + 20;
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  const double axis = label_w + half;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<text x=\"10\" y=\"20\" font-size=\"14\">" + escape(title) + "</text>\n";
  s += "<line x1=\"" + num(axis) + "\" y1=\"" + num(top - 4) + "\" x2=\"" + num(axis) + "\" y2=\"" +
       num(height - 16) + "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = top + row_h * static_cast<double>(i);
    const double len = vmax > 0 ? half * std::abs(values[i]) / vmax : 0.0;
    const double x = values[i] >= 0 ? axis : axis - len;
    const char* color = values[i] >= 0 ? "#d62728" : "#1f77b4";
    s += "<text x=\"" + num(label_w - 6) + "\" y=\"" + num(y + 12) + "\" text-anchor=\"end\">" + escape(labels[i]) +
         "</text>\n";
    s += "<rect x=\"" + num(x) + "\" y=\"" + num(y + 2) + "\" width=\"" + num(len) + "\" height=\"" +
         num(row_h - 4) + "\" fill=\"" + color + "\"/>\n";
  }
  return s + "</svg>\n";
}

}  // namespace stressfuse::svg
