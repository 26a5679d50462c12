#include "everrod/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "everrod/errors.hpp"

namespace everrod {

namespace {

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Tick spacing of 1, 2, or 5 times a power of ten giving about five ticks.
double nice_step(double span) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0;
  return step * mag;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

}  // namespace

std::string plot_curves(std::span<const ForceDisplacementCurve> curves, const PlotStyle& style) {
  if (curves.empty()) throw DataError("plot: no curves");
  double x_max = 0.0, y_max = 0.0;
  for (const auto& c : curves) {
    if (c.samples.empty()) throw DataError("plot: curve '" + c.spec_id + "' is empty");
    for (const auto& s : c.samples) {
      x_max = std::max(x_max, s.displacement * 1e3);
      y_max = std::max(y_max, s.force);
    }
  }
  const double x_step = nice_step(x_max);
  const double y_step = nice_step(y_max);
  x_max = x_max > 0.0 ? std::ceil(x_max / x_step) * x_step : 1.0;
  y_max = y_max > 0.0 ? std::ceil(y_max / y_step) * y_step : 1.0;

  const double left = 70, right = 20 + 150, top = 40, bottom = 50;
  const double pw = style.width - left - right;
  const double ph = style.height - top - bottom;
  auto px = [&](double mm) { return left + pw * mm / x_max; };
  auto py = [&](double n) { return top + ph * (1.0 - n / y_max); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\""
      << style.height << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << escape(style.title) << "</text>\n";

  svg << "<g font-family=\"sans-serif\" font-size=\"11\" stroke-width=\"1\">\n";
  const int x_ticks = static_cast<int>(std::lround(x_max / x_step));
  for (int i = 0; i <= x_ticks; ++i) {
    const double v = i * x_step;
    svg << "<line x1=\"" << fixed(px(v)) << "\" y1=\"" << fixed(top) << "\" x2=\"" << fixed(px(v))
        << "\" y2=\"" << fixed(top + ph) << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<text x=\"" << fixed(px(v)) << "\" y=\"" << fixed(top + ph + 16)
        << "\" text-anchor=\"middle\">" << fixed(v, x_step < 1.0 ? 2 : 0) << "</text>\n";
  }
  const int y_ticks = static_cast<int>(std::lround(y_max / y_step));
  for (int i = 0; i <= y_ticks; ++i) {
    const double v = i * y_step;
    svg << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(py(v)) << "\" x2=\""
        << fixed(left + pw) << "\" y2=\"" << fixed(py(v)) << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(py(v) + 4)
        << "\" text-anchor=\"end\">" << fixed(v, y_step < 1.0 ? 3 : 1) << "</text>\n";
  }
  svg << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw)
      << "\" height=\"" << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(style.height - 12)
      << "\" text-anchor=\"middle\">Tip displacement (mm)</text>\n";
  svg << "<text x=\"16\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 16 " << fixed(top + ph / 2) << ")\">Force (N)</text>\n";
  svg << "</g>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = kPalette[i % kPalette.size()];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    const auto& samples = curves[i].samples;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (k) svg << ' ';
      svg << fixed(px(samples[k].displacement * 1e3)) << ',' << fixed(py(samples[k].force));
    }
    svg << "\"/>\n";
  }

  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const double y = top + 10 + 16.0 * static_cast<double>(i);
    const double x = left + pw + 12;
    const std::string label =
        curves[i].spec_id.empty() ? "curve " + std::to_string(i + 1) : curves[i].spec_id;
    svg << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(x + 18)
        << "\" y2=\"" << fixed(y) << "\" stroke=\"" << kPalette[i % kPalette.size()]
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text class=\"legend\" x=\"" << fixed(x + 24) << "\" y=\"" << fixed(y + 4) << "\">"
        << escape(label) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace everrod
