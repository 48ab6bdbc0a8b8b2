#include "csmlab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "csmlab/spectral.hpp"

namespace csmlab {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
constexpr double kMarginLeft = 80, kMarginRight = 160, kMarginTop = 40, kMarginBottom = 60;

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
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

bool usable(double x, double y, bool log_y) {
  return std::isfinite(x) && std::isfinite(y) && (!log_y || y > 0.0);
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& options) {
  if (options.width < 200 || options.height < 150) throw InvalidInput("plot: canvas too small");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw InvalidInput("plot: series '" + s.label + "' has mismatched x and y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i], options.log_y)) continue;
      const double y = options.log_y ? std::log10(s.y[i]) : s.y[i];
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;

  const double w = options.width, h = options.height;
  const double pw = w - kMarginLeft - kMarginRight, ph = h - kMarginTop - kMarginBottom;
  auto px = [&](double x) { return kMarginLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kMarginTop + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
      << "\" viewBox=\"0 0 " << options.width << ' ' << options.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty())
    svg << "<text x=\"" << fixed(w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << escape(options.title) << "</text>\n";
  svg << "<rect x=\"" << fixed(kMarginLeft) << "\" y=\"" << fixed(kMarginTop) << "\" width=\"" << fixed(pw)
      << "\" height=\"" << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 5.0;
    const double fy = ymin + (ymax - ymin) * i / 5.0;
    svg << "<line x1=\"" << fixed(px(fx)) << "\" y1=\"" << fixed(kMarginTop + ph) << "\" x2=\"" << fixed(px(fx))
        << "\" y2=\"" << fixed(kMarginTop + ph + 5) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fixed(px(fx)) << "\" y=\"" << fixed(kMarginTop + ph + 20) << "\" text-anchor=\"middle\">"
        << tick_label(fx) << "</text>\n";
    const std::string ylabel = options.log_y ? "1e" + tick_label(fy) : tick_label(fy);
    svg << "<line x1=\"" << fixed(kMarginLeft - 5) << "\" y1=\"" << fixed(py(fy)) << "\" x2=\"" << fixed(kMarginLeft)
        << "\" y2=\"" << fixed(py(fy)) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fixed(kMarginLeft - 8) << "\" y=\"" << fixed(py(fy) + 4) << "\" text-anchor=\"end\">"
        << ylabel << "</text>\n";
  }
  svg << "<text x=\"" << fixed(kMarginLeft + pw / 2) << "\" y=\"" << fixed(h - 15) << "\" text-anchor=\"middle\">"
      << escape(options.x_label) << "</text>\n"
      << "<text x=\"18\" y=\"" << fixed(kMarginTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << fixed(kMarginTop + ph / 2) << ")\">" << escape(options.log_y ? options.y_label + " (log10)" : options.y_label)
      << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i], options.log_y)) continue;
      const double y = options.log_y ? std::log10(s.y[i]) : s.y[i];
      svg << (first ? "" : " ") << fixed(px(s.x[i])) << ',' << fixed(py(y));
      first = false;
    }
    svg << "\"/>\n";
    const double ly = kMarginTop + 15 + 18.0 * static_cast<double>(k);
    svg << "<line x1=\"" << fixed(w - kMarginRight + 10) << "\" y1=\"" << fixed(ly) << "\" x2=\""
        << fixed(w - kMarginRight + 30) << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << fixed(w - kMarginRight + 35) << "\" y=\"" << fixed(ly + 4) << "\">" << escape(s.label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace csmlab
