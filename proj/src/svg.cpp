#include "adhocgrid/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace adhocgrid {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

// largest 1-2-5 step not exceeding the raw interval / desired count
double nice_step(double span, int ticks) {
  if (span <= 0.0) return 1.0;
  const double raw = span / std::max(1, ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {5.0, 2.0, 1.0})
    if (mag * mult <= raw * (1.0 + 1e-12)) return mag * mult;
  return mag;
}

}  // namespace

std::string render_line_chart(const SvgChart& chart) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : chart.series) {
    for (double v : s.x) {
      x_lo = std::min(x_lo, v);
      x_hi = std::max(x_hi, v);
    }
    for (double v : s.y) {
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
  }
  if (!(x_lo <= x_hi)) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  if (!(y_lo <= y_hi)) {
    y_lo = 0.0;
    y_hi = 1.0;
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) {
    y_lo -= 0.5;
    y_hi += 0.5;
  } else {
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
  }

  const double ml = 72, mr = 16, mt = 36, mb = 52;
  const double pw = chart.width - ml - mr;
  const double ph = chart.height - mt - mb;
  auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return mt + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << chart.width << "\" height=\""
      << chart.height << "\" viewBox=\"0 0 " << chart.width << ' ' << chart.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << chart.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << chart.title << "</text>\n";

  const double xs = nice_step(x_hi - x_lo, 8);
  const double ys = nice_step(y_hi - y_lo, 6);
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double x = std::ceil(x_lo / xs) * xs; x <= x_hi + 1e-12 * xs; x += xs) {
    out << "<line x1=\"" << fmt(px(x)) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(px(x))
        << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << fmt(px(x)) << "\" y=\"" << fmt(mt + ph + 16)
        << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
  }
  for (double y = std::ceil(y_lo / ys) * ys; y <= y_hi + 1e-12 * ys; y += ys) {
    out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py(y)) << "\" x2=\"" << fmt(ml + pw)
        << "\" y2=\"" << fmt(py(y)) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(py(y) + 4)
        << "\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
  }
  out << "</g>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << fmt(pw) << "\" height=\""
      << fmt(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const auto& ser = chart.series[s];
    if (ser.x.size() != ser.y.size()) throw std::invalid_argument("series length mismatch");
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[s % 8]
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < ser.x.size(); ++j)
      out << fmt(px(ser.x[j])) << ',' << fmt(py(ser.y[j])) << ' ';
    out << "\"/>\n";
  }

  out << "<text x=\"" << chart.width / 2 << "\" y=\"" << chart.height - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << chart.x_label
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">" << chart.y_label << "</text>\n";

  double ly = mt + 10;
  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    out << "<line x1=\"" << ml + pw - 150 << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
        << ml + pw - 126 << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << kPalette[s % 8]
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << ml + pw - 120 << "\" y=\"" << fmt(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << chart.series[s].label
        << "</text>\n";
    ly += 16;
  }
  out << "</svg>\n";
  return out.str();
}

void write_line_chart(const std::string& path, const SvgChart& chart) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << render_line_chart(chart);
}

}  // namespace adhocgrid
