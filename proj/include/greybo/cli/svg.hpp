#ifndef GREYBO_CLI_SVG_HPP
#define GREYBO_CLI_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace greybo {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;       // assigned from the palette when empty
  double stroke_width = 1.6;
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 860;
  int height = 520;
  std::vector<PlotSeries> series;
};

namespace detail {

inline const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
inline constexpr int kPaletteSize = 8;
inline constexpr double kLogFloor = 1e-16;

inline std::string fmt(double v, const char* spec = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

inline std::string tick_label(double v, bool log_scale) {
  char buf[48];
  if (log_scale) {
    std::snprintf(buf, sizeof(buf), "1e%d", static_cast<int>(std::lround(v)));
  } else {
    std::snprintf(buf, sizeof(buf), "%.6g", v);
  }
  return buf;
}

inline std::vector<double> linear_ticks(double lo, double hi, int target = 6) {
  std::vector<double> ticks;
  if (!(hi > lo)) {
    ticks.push_back(lo);
    return ticks;
  }
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw) {
      step = mag * mult;
      break;
    }
  }
  const double start = std::ceil(lo / step) * step;
  for (double t = start; t <= hi + 1e-12 * step; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

}  // namespace detail

// Static line plot without external dependencies. All coordinates are
// formatted with fixed precision, so identical inputs give identical bytes.
inline std::string render_svg(const PlotSpec& spec) {
  const double margin_left = 72, margin_right = 170, margin_top = 46,
               margin_bottom = 56;
  const double plot_w = spec.width - margin_left - margin_right;
  const double plot_h = spec.height - margin_top - margin_bottom;

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  const auto transform_y = [&](double y) {
    return spec.log_y ? std::log10(std::max(y, detail::kLogFloor)) : y;
  };
  for (const PlotSeries& s : spec.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      const double ty = transform_y(s.y[i]);
      y_min = std::min(y_min, ty);
      y_max = std::max(y_max, ty);
    }
  }
  if (!(x_max >= x_min)) {
    x_min = 0.0;
    x_max = 1.0;
  }
  if (!(y_max >= y_min)) {
    y_min = 0.0;
    y_max = 1.0;
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;
  const double y_pad = 0.04 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  const auto px = [&](double x) {
    return margin_left + (x - x_min) / (x_max - x_min) * plot_w;
  };
  const auto py = [&](double ty) {
    return margin_top + (y_max - ty) / (y_max - y_min) * plot_h;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
      << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << ' '
      << spec.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << detail::fmt(margin_left + plot_w / 2) << "\" y=\"24\" "
         "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
      << spec.title << "</text>\n";

  // axes and ticks
  out << "<g stroke=\"#444\" stroke-width=\"1\" fill=\"none\">\n";
  out << "<path d=\"M" << detail::fmt(margin_left) << ' ' << detail::fmt(margin_top)
      << " V" << detail::fmt(margin_top + plot_h) << " H"
      << detail::fmt(margin_left + plot_w) << "\"/>\n";
  out << "</g>\n";

  std::vector<double> y_ticks;
  if (spec.log_y) {
    for (int e = static_cast<int>(std::floor(y_min)); e <= static_cast<int>(std::ceil(y_max)); ++e) {
      if (e >= y_min - 1e-9 && e <= y_max + 1e-9) y_ticks.push_back(e);
    }
    if (y_ticks.empty()) y_ticks = detail::linear_ticks(y_min, y_max);
  } else {
    y_ticks = detail::linear_ticks(y_min, y_max);
  }
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n";
  for (const double t : y_ticks) {
    const double yy = py(t);
    out << "<line x1=\"" << detail::fmt(margin_left - 4) << "\" y1=\""
        << detail::fmt(yy) << "\" x2=\"" << detail::fmt(margin_left + plot_w)
        << "\" y2=\"" << detail::fmt(yy)
        << "\" stroke=\"#ddd\" stroke-width=\"0.6\"/>\n";
    out << "<text x=\"" << detail::fmt(margin_left - 8) << "\" y=\""
        << detail::fmt(yy + 3.5) << "\" text-anchor=\"end\">"
        << detail::tick_label(t, spec.log_y) << "</text>\n";
  }
  for (const double t : detail::linear_ticks(x_min, x_max)) {
    const double xx = px(t);
    out << "<line x1=\"" << detail::fmt(xx) << "\" y1=\""
        << detail::fmt(margin_top + plot_h) << "\" x2=\"" << detail::fmt(xx)
        << "\" y2=\"" << detail::fmt(margin_top + plot_h + 4)
        << "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << detail::fmt(xx) << "\" y=\""
        << detail::fmt(margin_top + plot_h + 18) << "\" text-anchor=\"middle\">"
        << detail::tick_label(t, false) << "</text>\n";
  }
  out << "<text x=\"" << detail::fmt(margin_left + plot_w / 2) << "\" y=\""
      << detail::fmt(spec.height - 12.0) << "\" text-anchor=\"middle\" font-size=\"13\">"
      << spec.x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << detail::fmt(margin_top + plot_h / 2)
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << detail::fmt(margin_top + plot_h / 2) << ")\">" << spec.y_label
      << "</text>\n";
  out << "</g>\n";

  // series
  int color_index = 0;
  for (const PlotSeries& s : spec.series) {
    const std::string color =
        s.color.empty()
            ? detail::kPalette[color_index % detail::kPaletteSize]
            : s.color;
    ++color_index;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
        << detail::fmt(s.stroke_width, "%.1f") << '"';
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << " points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << detail::fmt(px(s.x[i])) << ',' << detail::fmt(py(transform_y(s.y[i])))
          << ' ';
    }
    out << "\"/>\n";
  }

  // legend
  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  color_index = 0;
  double legend_y = margin_top + 6;
  for (const PlotSeries& s : spec.series) {
    const std::string color =
        s.color.empty()
            ? detail::kPalette[color_index % detail::kPaletteSize]
            : s.color;
    ++color_index;
    if (s.label.empty()) continue;
    const double lx = margin_left + plot_w + 12;
    out << "<line x1=\"" << detail::fmt(lx) << "\" y1=\"" << detail::fmt(legend_y)
        << "\" x2=\"" << detail::fmt(lx + 22) << "\" y2=\"" << detail::fmt(legend_y)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
    out << "<text x=\"" << detail::fmt(lx + 28) << "\" y=\""
        << detail::fmt(legend_y + 4) << "\">" << s.label << "</text>\n";
    legend_y += 18;
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

inline void write_svg(const PlotSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open plot file for writing: " + path);
  out << render_svg(spec);
  if (!out) throw std::runtime_error("failed while writing plot file: " + path);
}

}  // namespace greybo

#endif  // GREYBO_CLI_SVG_HPP
