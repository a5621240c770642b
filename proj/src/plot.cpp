#include "drcsim/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace drcsim {

namespace {

constexpr double kWidth = 880, kHeight = 540;
constexpr double kLeft = 78, kRight = 24, kTop = 48, kBottom = 64;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (lo > hi) {  // no finite data at all
      lo = 0.0;
      hi = 1.0;
    } else if (lo == hi) {
      lo -= 1.0;
      hi += 1.0;
    }
  }
};

// Tick spacing of the form {1, 2, 5} * 10^k giving roughly `target` steps.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mult * mag >= raw) return mult * mag;
  }
  return 10.0 * mag;
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, std::span<const PlotSeries> series) {
  Range xr, yr;
  for (const auto& s : series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
        xr.include(s.x[i]);
        yr.include(s.y[i]);
      }
    }
  }
  xr.finish();
  yr.finish();

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto sy = [&](double v) { return kTop + plot_h - (v - yr.lo) / (yr.hi - yr.lo) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"28\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"17\" fill=\"#222\">" +
         escape_xml(title) + "</text>\n";

  // Grid and ticks.
  const double x_step = nice_step(xr.hi - xr.lo, 8);
  const double y_step = nice_step(yr.hi - yr.lo, 6);
  svg += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#444\">\n";
  for (double v = std::ceil(xr.lo / x_step) * x_step; v <= xr.hi + 1e-9 * x_step; v += x_step) {
    const double px = sx(v);
    svg += "<line x1=\"" + num(px) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(px) + "\" y2=\"" +
           num(kTop + plot_h) + "\" stroke=\"#e3e3e3\"/>\n";
    svg += "<text x=\"" + num(px) + "\" y=\"" + num(kTop + plot_h + 20) +
           "\" text-anchor=\"middle\">" + num(v) + "</text>\n";
  }
  for (double v = std::ceil(yr.lo / y_step) * y_step; v <= yr.hi + 1e-9 * y_step; v += y_step) {
    const double py = sy(v);
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py) + "\" x2=\"" + num(kLeft + plot_w) +
           "\" y2=\"" + num(py) + "\" stroke=\"#e3e3e3\"/>\n";
    svg += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(py + 4) +
           "\" text-anchor=\"end\">" + num(v) + "</text>\n";
  }
  svg += "</g>\n";

  // Axes.
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(plot_w) +
         "\" height=\"" + num(plot_h) + "\" fill=\"none\" stroke=\"#555\"/>\n";
  svg += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(kHeight - 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#222\">" +
         escape_xml(x_label) + "</text>\n";
  svg += "<text x=\"20\" y=\"" + num(kTop + plot_h / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#222\" "
         "transform=\"rotate(-90 20 " + num(kTop + plot_h / 2) + ")\">" +
         escape_xml(y_label) + "</text>\n";

  // Data.
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
    std::string points;
    bool open = false;
    const std::size_t n = std::min(s.x.size(), s.y.size());
    auto flush = [&] {
      if (open && !points.empty()) {
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.8\" points=\"" + points + "\"/>\n";
      }
      points.clear();
      open = false;
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      points += num(sx(s.x[i])) + "," + num(sy(s.y[i])) + " ";
      open = true;
    }
    flush();
  }

  // Legend.
  svg += "<g font-family=\"sans-serif\" font-size=\"13\">\n";
  double ly = kTop + 14;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
    const double lx = kLeft + plot_w - 170;
    svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(lx + 26) +
           "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2.5\"/>\n";
    svg += "<text x=\"" + num(lx + 32) + "\" y=\"" + num(ly) + "\" fill=\"#222\">" +
           escape_xml(series[si].label) + "</text>\n";
    ly += 18;
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace drcsim
