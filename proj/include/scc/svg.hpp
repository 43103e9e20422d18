#ifndef SCC_SVG_HPP
#define SCC_SVG_HPP

#include <string>
#include <vector>

namespace scc {

// Minimal deterministic SVG line plots; no display dependencies.
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool markers = false;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<SvgSeries> series;

  std::string render(int width = 720, int height = 480) const;
  void write_file(const std::string& path, int width = 720, int height = 480) const;
};

}  // namespace scc

#endif
