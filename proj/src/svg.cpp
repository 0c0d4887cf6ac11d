// Copyright 2026 The pianorl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pianorl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pianorl {
namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 400;
constexpr double kLeft = 60;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 60;
constexpr const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3",
                                    "#937860"};

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

const char* color(std::size_t i) { return kPalette[i % (sizeof kPalette / sizeof *kPalette)]; }

// Frame, title and a y axis over [0, y_max].
void frame(std::ostringstream& os, const std::string& title, const std::string& y_label,
           double y_max) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n";
  const double plot_h = kHeight - kTop - kBottom;
  for (int i = 0; i <= 5; ++i) {
    const double v = y_max * i / 5.0;
    const double y = kTop + plot_h * (1.0 - i / 5.0);
    os << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kWidth - kRight
       << "\" y2=\"" << y << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << v
       << "</text>\n";
  }
  os << "<text transform=\"translate(16," << kTop + plot_h / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
}

void legend(std::ostringstream& os, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kTop + 18.0 * static_cast<double>(i);
    os << "<rect x=\"" << kWidth - kRight + 12 << "\" y=\"" << y << "\" width=\"12\" height=\"12\" fill=\""
       << color(i) << "\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 30 << "\" y=\"" << y + 10 << "\">" << escape(names[i])
       << "</text>\n";
  }
}

double value_or_zero(const std::vector<double>& v, std::size_t i) {
  return i < v.size() && std::isfinite(v[i]) ? v[i] : 0.0;
}

}  // namespace

std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& series,
                          const std::vector<BarGroup>& groups, const std::string& y_label) {
  std::ostringstream os;
  double y_max = 1.0;
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      if (std::isfinite(g.values[i])) y_max = std::max(y_max, g.values[i] + value_or_zero(g.errors, i));
    }
  }
  frame(os, title, y_label, y_max);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double group_w = plot_w / static_cast<double>(std::max<std::size_t>(1, groups.size()));
  const double bar_w = 0.8 * group_w / static_cast<double>(std::max<std::size_t>(1, series.size()));
  auto to_y = [&](double v) { return kTop + plot_h * (1.0 - v / y_max); };
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double x0 = kLeft + group_w * static_cast<double>(g) + 0.1 * group_w;
    for (std::size_t s = 0; s < groups[g].values.size() && s < series.size(); ++s) {
      const double v = groups[g].values[s];
      if (!std::isfinite(v)) continue;
      const double x = x0 + bar_w * static_cast<double>(s);
      os << "<rect x=\"" << x << "\" y=\"" << to_y(v) << "\" width=\"" << bar_w * 0.9
         << "\" height=\"" << to_y(0) - to_y(v) << "\" fill=\"" << color(s) << "\"/>\n";
      const double e = value_or_zero(groups[g].errors, s);
      if (e > 0) {
        const double cx = x + bar_w * 0.45;
        os << "<line x1=\"" << cx << "\" y1=\"" << to_y(v - e) << "\" x2=\"" << cx << "\" y2=\""
           << to_y(v + e) << "\" stroke=\"black\"/>\n";
      }
    }
    os << "<text x=\"" << x0 + 0.4 * group_w << "\" y=\"" << kHeight - kBottom + 18
       << "\" text-anchor=\"middle\">" << escape(groups[g].label) << "</text>\n";
  }
  legend(os, series);
  os << "</svg>\n";
  return os.str();
}

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<LineSeries>& series) {
  std::ostringstream os;
  double x_min = 0.0;
  double x_max = 1.0;
  double y_max = 1.0;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x_min = x_max = s.x[i];
        first = false;
      }
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      if (i < s.y.size() && std::isfinite(s.y[i])) {
        y_max = std::max(y_max, s.y[i] + value_or_zero(s.errors, i));
      }
    }
  }
  if (x_max <= x_min) x_max = x_min + 1.0;
  frame(os, title, y_label, y_max);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto to_x = [&](double v) { return kLeft + plot_w * (v - x_min) / (x_max - x_min); };
  auto to_y = [&](double v) { return kTop + plot_h * (1.0 - v / y_max); };
  for (int i = 0; i <= 5; ++i) {
    const double v = x_min + (x_max - x_min) * i / 5.0;
    os << "<text x=\"" << to_x(v) << "\" y=\"" << kHeight - kBottom + 18
       << "\" text-anchor=\"middle\">" << v << "</text>\n";
  }
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 16
     << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  std::vector<std::string> names;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    names.push_back(s.name);
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      pts << to_x(s.x[i]) << ',' << to_y(s.y[i]) << ' ';
      os << "<circle cx=\"" << to_x(s.x[i]) << "\" cy=\"" << to_y(s.y[i]) << "\" r=\"3\" fill=\""
         << color(si) << "\"/>\n";
      const double e = value_or_zero(s.errors, i);
      if (e > 0) {
        os << "<line x1=\"" << to_x(s.x[i]) << "\" y1=\"" << to_y(s.y[i] - e) << "\" x2=\""
           << to_x(s.x[i]) << "\" y2=\"" << to_y(s.y[i] + e) << "\" stroke=\"" << color(si)
           << "\"/>\n";
      }
    }
    os << "<polyline fill=\"none\" stroke=\"" << color(si) << "\" stroke-width=\"2\" points=\""
       << pts.str() << "\"/>\n";
  }
  legend(os, names);
  os << "</svg>\n";
  return os.str();
}

}  // namespace pianorl
