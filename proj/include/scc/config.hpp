#ifndef SCC_CONFIG_HPP
#define SCC_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scc/physics.hpp"
#include "scc/protocol.hpp"

namespace scc {

// Thrown for schema violations; message carries the path to the field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameter files map field names either to a plain value or to
// {"value": ..., "source": "..."} so each entry can cite where the number
// was fitted. Values may be numbers (SI) or strings with unit suffixes.
// Unknown keys are rejected.
DefectParameters parse_defect_parameters(const std::string& json_text);
DefectParameters load_defect_parameters(const std::string& path);
std::string serialize_defect_parameters(const DefectParameters& p);

ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::string& path);
std::string serialize_experiment_spec(const ExperimentSpec& spec);

struct RunConfig {
  std::string params_path;
  std::optional<std::string> preset;
  std::optional<ExperimentSpec> experiment;
  std::uint64_t seed = 0;
  bool seed_given = false;  // stochastic runs refuse to start without one
  std::optional<long> shots;
  std::string out_dir = ".";
  std::vector<std::string> formats = {"csv", "svg"};
  int threads = 1;
};

RunConfig parse_run_config(const std::string& json_text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace scc

#endif
