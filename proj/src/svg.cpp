#include "scc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "scc/csv.hpp"

namespace scc {

namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void grow(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  std::vector<double> ticks;
  if (!(hi > lo)) return {lo};
  double raw = (hi - lo) / target;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  double first = std::ceil(lo / step) * step;
  for (double v = first; v <= hi + 0.5 * step; v += step) ticks.push_back(v);
  return ticks;
}

}  // namespace

std::string SvgPlot::render(int width, int height) const {
  const double ml = 70, mr = 20, mt = 34, mb = 52;
  double pw = width - ml - mr, ph = height - mt - mb;

  Range rx, ry;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double xv = s.x[i], yv = s.y[i];
      if (log_x && xv <= 0.0) continue;
      if (log_y && yv <= 0.0) continue;
      rx.grow(log_x ? std::log10(xv) : xv);
      ry.grow(log_y ? std::log10(yv) : yv);
    }
  if (!(rx.hi > rx.lo)) {
    rx.lo -= 0.5;
    rx.hi += 0.5;
  }
  if (!(ry.hi > ry.lo)) {
    ry.lo -= 0.5;
    ry.hi += 0.5;
  }
  double pad_y = 0.05 * (ry.hi - ry.lo);
  ry.lo -= pad_y;
  ry.hi += pad_y;

  auto px = [&](double v) {
    double u = log_x ? std::log10(v) : v;
    return ml + (u - rx.lo) / (rx.hi - rx.lo) * pw;
  };
  auto py = [&](double v) {
    double u = log_y ? std::log10(v) : v;
    return mt + ph - (u - ry.lo) / (ry.hi - ry.lo) * ph;
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";

  // Axes box
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  auto tick_label = [&](double v, bool log_axis) {
    return format_number(log_axis ? std::pow(10.0, v) : v);
  };
  for (double t : nice_ticks(rx.lo, rx.hi)) {
    double x = ml + (t - rx.lo) / (rx.hi - rx.lo) * pw;
    os << "<line x1=\"" << x << "\" y1=\"" << mt + ph << "\" x2=\"" << x << "\" y2=\""
       << mt + ph + 5 << "\" stroke=\"#333333\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << mt + ph + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << tick_label(t, log_x) << "</text>\n";
  }
  for (double t : nice_ticks(ry.lo, ry.hi)) {
    double y = mt + ph - (t - ry.lo) / (ry.hi - ry.lo) * ph;
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << y << "\" x2=\"" << ml << "\" y2=\"" << y
       << "\" stroke=\"#333333\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << tick_label(t, log_y) << "</text>\n";
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << mt + ph / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
     << "transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">" << y_label << "</text>\n";

  double legend_y = mt + 14;
  for (const auto& s : series) {
    std::ostringstream path;
    bool pen_down = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((log_x && s.x[i] <= 0.0) || (log_y && s.y[i] <= 0.0)) {
        pen_down = false;
        continue;
      }
      path << (pen_down ? "L" : "M") << format_number(px(s.x[i])) << ","
           << format_number(py(s.y[i])) << " ";
      pen_down = true;
    }
    os << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"1.5\"/>\n";
    if (s.markers)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if ((log_x && s.x[i] <= 0.0) || (log_y && s.y[i] <= 0.0)) continue;
        os << "<circle cx=\"" << format_number(px(s.x[i])) << "\" cy=\""
           << format_number(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
      }
    if (!s.label.empty()) {
      os << "<line x1=\"" << ml + pw - 150 << "\" y1=\"" << legend_y << "\" x2=\""
         << ml + pw - 130 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
         << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << ml + pw - 124 << "\" y=\"" << legend_y + 4
         << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
      legend_y += 16;
    }
  }
  os << "</svg>\n";
  return os.str();
}

void SvgPlot::write_file(const std::string& path, int width, int height) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << render(width, height);
}

}  // namespace scc
