#ifndef SCC_PRESETS_HPP
#define SCC_PRESETS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scc/physics.hpp"

namespace scc {

// One printed comparison line: a simulated/fitted number next to the
// published reference value it should resemble.
struct Headline {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  std::string unit;
};

struct FigureOptions {
  DefectParameters params;
  std::uint64_t seed = 1;
  std::optional<long> shots;  // presets pick their own defaults
  std::string out_dir = ".";
  bool write_csv = true;
  bool write_svg = true;
  int threads = 1;
  bool check = false;  // run the preset's pass/fail comparisons
};

struct FigureResult {
  std::string preset;
  std::vector<Headline> headlines;
  std::vector<std::string> files;
  bool check_passed = true;
  std::vector<std::string> check_notes;
};

const std::vector<std::string>& preset_ids();
bool is_preset(const std::string& id);

// Presets that draw random numbers (and therefore need a seed); the
// closed-form and ODE-only presets are deterministic.
bool preset_is_stochastic(const std::string& id);

// Runs one figure preset end to end: simulate/fit, write CSV (and SVG)
// artifacts into out_dir, and collect headline numbers. Throws
// std::invalid_argument for an unknown preset id.
FigureResult run_figure(const std::string& preset_id, const FigureOptions& options);

}  // namespace scc

#endif
