#include "scc/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "scc/csv.hpp"
#include "scc/units.hpp"

namespace scc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at " + path + ": " + what);
}

double quantity(const json& node, Dimension dim, const std::string& path) {
  try {
    if (node.is_number()) return node.get<double>();
    if (node.is_string()) return parse_quantity(node.get<std::string>(), dim);
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  fail(path, "expected a number or a unit-suffixed string");
}

// Accepts either a bare value or {"value": ..., "source": "..."}.
double annotated_quantity(const json& node, Dimension dim, const std::string& path) {
  if (node.is_object()) {
    for (const auto& [key, sub] : node.items()) {
      if (key != "value" && key != "source" && key != "comment")
        fail(path + "." + key, "unknown key");
      (void)sub;
    }
    if (!node.contains("value")) fail(path, "missing 'value'");
    return quantity(node.at("value"), dim, path + ".value");
  }
  return quantity(node, dim, path);
}

struct ParamField {
  double DefectParameters::* member;
  Dimension dim;
};

const std::map<std::string, ParamField>& param_fields() {
  static const std::map<std::string, ParamField> fields = {
      {"tau_charge", {&DefectParameters::tau_charge, Dimension::Duration}},
      {"spin_flip_lifetime_sat",
       {&DefectParameters::spin_flip_lifetime_sat, Dimension::Duration}},
      {"repump_slope", {&DefectParameters::repump_slope, Dimension::RatePerPower}},
      {"resonant_ion_slope",
       {&DefectParameters::resonant_ion_slope, Dimension::RatePerPower}},
      {"resonant_sat_power", {&DefectParameters::resonant_sat_power, Dimension::Power}},
      {"nir_ion_slope", {&DefectParameters::nir_ion_slope, Dimension::RatePerPower}},
      {"excited_ion_slope",
       {&DefectParameters::excited_ion_slope, Dimension::RatePerPower}},
      {"stim_emission_slope",
       {&DefectParameters::stim_emission_slope, Dimension::RatePerPower}},
      {"spontaneous_rate", {&DefectParameters::spontaneous_rate, Dimension::Rate}},
      {"detected_rate_sat", {&DefectParameters::detected_rate_sat, Dimension::Rate}},
      {"background_rate", {&DefectParameters::background_rate, Dimension::Rate}},
      {"zpl_energy", {&DefectParameters::zpl_energy, Dimension::Energy}},
      {"ion_photon_energy", {&DefectParameters::ion_photon_energy, Dimension::Energy}},
      {"charge_transition_energy",
       {&DefectParameters::charge_transition_energy, Dimension::Energy}},
      {"leak_beta", {&DefectParameters::leak_beta, Dimension::Dimensionless}},
      {"leak_power_scale", {&DefectParameters::leak_power_scale, Dimension::Power}},
      {"dark_bright_fraction",
       {&DefectParameters::dark_bright_fraction, Dimension::Dimensionless}},
      {"mw_exchange_rate", {&DefectParameters::mw_exchange_rate, Dimension::Rate}},
  };
  return fields;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config error: invalid JSON: ") + e.what());
  }
}

}  // namespace

DefectParameters parse_defect_parameters(const std::string& json_text) {
  json root = parse_json(json_text);
  if (!root.is_object()) throw ConfigError("config error: parameter file must be an object");
  DefectParameters p;
  for (const auto& [key, node] : root.items()) {
    if (key == "comment" || key == "name") continue;
    auto it = param_fields().find(key);
    if (it == param_fields().end()) fail(key, "unknown parameter");
    p.*(it->second.member) = annotated_quantity(node, it->second.dim, key);
  }
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  return p;
}

DefectParameters load_defect_parameters(const std::string& path) {
  return parse_defect_parameters(read_text_file(path));
}

std::string serialize_defect_parameters(const DefectParameters& p) {
  json root;
  for (const auto& [key, field] : param_fields()) root[key] = p.*(field.member);
  return root.dump(2) + "\n";
}

namespace {

Pulse parse_pulse(const json& node, const std::string& path) {
  if (!node.is_object()) fail(path, "pulse must be an object");
  Pulse pulse;
  for (const auto& [key, sub] : node.items()) {
    if (key == "kind") {
      try {
        pulse.kind = pulse_kind_from_name(sub.get<std::string>());
      } catch (const std::exception& e) {
        fail(path + ".kind", e.what());
      }
    } else if (key == "power") {
      pulse.power = quantity(sub, Dimension::Power, path + ".power");
    } else if (key == "phase") {
      pulse.phase = quantity(sub, Dimension::Dimensionless, path + ".phase");
    } else {
      fail(path + "." + key, "unknown key");
    }
  }
  if (!node.contains("kind")) fail(path, "missing 'kind'");
  return pulse;
}

PulseGroup parse_group(const json& node, const std::string& path) {
  if (!node.is_object()) fail(path, "group must be an object");
  PulseGroup g;
  for (const auto& [key, sub] : node.items()) {
    if (key == "duration") {
      g.duration = quantity(sub, Dimension::Duration, path + ".duration");
    } else if (key == "readout") {
      if (!sub.is_boolean()) fail(path + ".readout", "expected a boolean");
      g.readout = sub.get<bool>();
    } else if (key == "spin_toggle") {
      if (!sub.is_boolean()) fail(path + ".spin_toggle", "expected a boolean");
      g.spin_toggle = sub.get<bool>();
    } else if (key == "pulses") {
      if (!sub.is_array()) fail(path + ".pulses", "expected an array");
      for (std::size_t i = 0; i < sub.size(); ++i)
        g.pulses.push_back(parse_pulse(sub[i], path + ".pulses[" + std::to_string(i) + "]"));
    } else {
      fail(path + "." + key, "unknown key");
    }
  }
  return g;
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
  json root = parse_json(json_text);
  if (!root.is_object()) throw ConfigError("config error: experiment spec must be an object");
  ExperimentSpec spec;
  bool have_sweep = false;
  for (const auto& [key, node] : root.items()) {
    if (key == "name") {
      spec.name = node.get<std::string>();
    } else if (key == "sequence") {
      if (!node.is_array()) fail("sequence", "expected an array of pulse groups");
      for (std::size_t i = 0; i < node.size(); ++i)
        spec.sequence.groups.push_back(
            parse_group(node[i], "sequence[" + std::to_string(i) + "]"));
    } else if (key == "sweep") {
      have_sweep = true;
      if (!node.is_object()) fail("sweep", "expected an object");
      Dimension dim = Dimension::Duration;
      for (const auto& [skey, sub] : node.items()) {
        if (skey == "group") {
          spec.sweep.group = sub.get<std::size_t>();
        } else if (skey == "pulse") {
          spec.sweep.pulse = sub.get<std::size_t>();
        } else if (skey == "field") {
          std::string f = sub.get<std::string>();
          if (f == "duration") {
            spec.sweep.field = SweepField::GroupDuration;
          } else if (f == "power") {
            spec.sweep.field = SweepField::PulsePower;
            dim = Dimension::Power;
          } else {
            fail("sweep.field", "must be 'duration' or 'power'");
          }
        } else if (skey != "values") {
          fail("sweep." + skey, "unknown key");
        }
      }
      if (spec.sweep.field == SweepField::PulsePower) dim = Dimension::Power;
      if (!node.contains("values") || !node.at("values").is_array())
        fail("sweep.values", "expected an array");
      const json& vals = node.at("values");
      for (std::size_t i = 0; i < vals.size(); ++i)
        spec.sweep_values.push_back(
            quantity(vals[i], dim, "sweep.values[" + std::to_string(i) + "]"));
    } else if (key == "shots") {
      if (!node.is_number_integer() || node.get<long>() < 1)
        fail("shots", "must be a positive integer");
      spec.shots = node.get<long>();
    } else if (key == "seed") {
      spec.seed = node.get<std::uint64_t>();
    } else if (key == "start_state") {
      std::string s = node.get<std::string>();
      try {
        spec.start_state = LevelSystem::standard().index_of(s);
      } catch (const std::exception& e) {
        fail("start_state", e.what());
      }
    } else if (key == "spin_init_fidelity") {
      spec.settings.spin_init_fidelity =
          quantity(node, Dimension::Dimensionless, "spin_init_fidelity");
    } else {
      fail(key, "unknown key");
    }
  }
  if (spec.sequence.groups.empty()) fail("sequence", "must not be empty");
  if (!have_sweep) fail("sweep", "missing");
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  return parse_experiment_spec(read_text_file(path));
}

std::string serialize_experiment_spec(const ExperimentSpec& spec) {
  json root;
  root["name"] = spec.name;
  json groups = json::array();
  for (const auto& g : spec.sequence.groups) {
    json node;
    node["duration"] = g.duration;
    if (g.readout) node["readout"] = true;
    if (g.spin_toggle) node["spin_toggle"] = true;
    json pulses = json::array();
    for (const auto& p : g.pulses) {
      json pn;
      pn["kind"] = pulse_kind_name(p.kind);
      if (p.is_laser()) pn["power"] = p.power;
      if (p.is_microwave()) pn["phase"] = p.phase;
      pulses.push_back(pn);
    }
    node["pulses"] = pulses;
    groups.push_back(node);
  }
  root["sequence"] = groups;
  root["sweep"] = {{"group", spec.sweep.group},
                   {"pulse", spec.sweep.pulse},
                   {"field", spec.sweep.field == SweepField::GroupDuration ? "duration" : "power"},
                   {"values", spec.sweep_values}};
  root["shots"] = spec.shots;
  root["seed"] = spec.seed;
  root["start_state"] = LevelSystem::standard().labels()[spec.start_state];
  root["spin_init_fidelity"] = spec.settings.spin_init_fidelity;
  return root.dump(2) + "\n";
}

RunConfig parse_run_config(const std::string& json_text) {
  json root = parse_json(json_text);
  if (!root.is_object()) throw ConfigError("config error: run config must be an object");
  RunConfig cfg;
  for (const auto& [key, node] : root.items()) {
    if (key == "params") {
      cfg.params_path = node.get<std::string>();
    } else if (key == "preset") {
      cfg.preset = node.get<std::string>();
    } else if (key == "experiment") {
      cfg.experiment = parse_experiment_spec(node.dump());
    } else if (key == "seed") {
      cfg.seed = node.get<std::uint64_t>();
      cfg.seed_given = true;
    } else if (key == "shots") {
      if (!node.is_number_integer() || node.get<long>() < 1)
        fail("shots", "must be a positive integer");
      cfg.shots = node.get<long>();
    } else if (key == "out_dir") {
      cfg.out_dir = node.get<std::string>();
    } else if (key == "formats") {
      cfg.formats.clear();
      for (const auto& f : node) {
        std::string name = f.get<std::string>();
        if (name != "csv" && name != "svg") fail("formats", "unknown format '" + name + "'");
        cfg.formats.push_back(name);
      }
    } else if (key == "threads") {
      cfg.threads = node.get<int>();
      if (cfg.threads < 1) fail("threads", "must be >= 1");
    } else {
      fail(key, "unknown key");
    }
  }
  if (cfg.preset && cfg.experiment)
    throw ConfigError("config error: 'preset' and 'experiment' are mutually exclusive");
  return cfg;
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << content;
}

}  // namespace scc
