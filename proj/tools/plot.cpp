#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

namespace pnpkit::cli {

namespace {

constexpr double kPanelW = 420, kPanelH = 300, kMargin = 50, kGap = 40;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
  void pad() {
    if (!valid()) lo = 0, hi = 1;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  }
};

void panel(std::string& svg, double x0, const std::string& title, const std::vector<Trace>& traces,
           const std::function<double(const TraceRow&)>& value) {
  Range xr, yr;
  for (const Trace& t : traces)
    for (const TraceRow& r : t.rows) {
      const double v = value(r);
      if (std::isfinite(v)) {
        xr.add(r.iter);
        yr.add(v);
      }
    }
  xr.pad();
  yr.pad();
  const double top = kMargin, left = x0 + kMargin;
  auto px = [&](double it) { return left + (it - xr.lo) / (xr.hi - xr.lo) * kPanelW; };
  auto py = [&](double v) { return top + (yr.hi - v) / (yr.hi - yr.lo) * kPanelH; };
  svg += "<g>\n<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(kPanelW) + "\" height=\"" +
         num(kPanelH) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg += "<text x=\"" + num(left + kPanelW / 2) + "\" y=\"" + num(top - 15) + "\" text-anchor=\"middle\">" +
         escape(title) + "</text>\n";
  svg += "<text x=\"" + num(left) + "\" y=\"" + num(top + kPanelH + 18) + "\">" + num(xr.lo) + "</text>\n";
  svg += "<text x=\"" + num(left + kPanelW) + "\" y=\"" + num(top + kPanelH + 18) + "\" text-anchor=\"end\">" +
         num(xr.hi) + "</text>\n";
  svg += "<text x=\"" + num(left - 5) + "\" y=\"" + num(top + 5) + "\" text-anchor=\"end\">" + num(yr.hi) + "</text>\n";
  svg += "<text x=\"" + num(left - 5) + "\" y=\"" + num(top + kPanelH) + "\" text-anchor=\"end\">" + num(yr.lo) +
         "</text>\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    std::string pts;
    for (const TraceRow& r : traces[i].rows) {
      const double v = value(r);
      if (!std::isfinite(v)) continue;
      pts += num(px(r.iter)) + "," + num(py(v)) + " ";
    }
    svg += "<polyline class=\"trace\" fill=\"none\" stroke=\"" + std::string(kColors[i % 10]) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
  }
  svg += "</g>\n";
}

}  // namespace

std::string render_svg(const std::vector<Trace>& traces, const std::vector<std::string>& labels) {
  const double width = 2 * (kPanelW + kMargin) + kGap + kMargin;
  const double legend_h = 18.0 * static_cast<double>(traces.size()) + 10;
  const double height = kPanelH + 2 * kMargin + legend_h;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
                    "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  panel(svg, 0, "log10 step residual", traces, [](const TraceRow& r) {
    return r.step_residual > 0 ? std::log10(r.step_residual) : std::numeric_limits<double>::quiet_NaN();
  });
  panel(svg, kPanelW + kMargin + kGap, "PSNR (dB)", traces, [](const TraceRow& r) { return r.psnr; });
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const double y = kPanelH + 2 * kMargin + 18.0 * static_cast<double>(i);
    svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(y - 4) + "\" x2=\"" + num(kMargin + 20) + "\" y2=\"" +
           num(y - 4) + "\" stroke=\"" + kColors[i % 10] + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(kMargin + 26) + "\" y=\"" + num(y) + "\">" + escape(i < labels.size() ? labels[i] : "") +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace pnpkit::cli
