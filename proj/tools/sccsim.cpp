// Command-line front end: figure presets, experiment simulation, data
// analysis, and curve fitting for spin-to-charge-conversion readout.
//
// Exit codes: 0 success, 2 configuration error, 3 simulation error,
// 4 check/comparison failure (with --check).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "scc/coherence.hpp"
#include "scc/config.hpp"
#include "scc/csv.hpp"
#include "scc/physics.hpp"
#include "scc/presets.hpp"
#include "scc/protocol.hpp"
#include "scc/readout.hpp"
#include "scc/timetags.hpp"
#include "scc/units.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSimulation = 3;
constexpr int kExitCheck = 4;

scc::DefectParameters load_params(const std::string& path) {
  if (!path.empty()) return scc::load_defect_parameters(path);
  for (const char* candidate : {"data/divacancy_defaults.json",
                                SCCSIM_DATA_DIR "/divacancy_defaults.json"}) {
    if (std::filesystem::exists(candidate)) return scc::load_defect_parameters(candidate);
  }
  throw scc::ConfigError("no parameter file found; pass --params");
}

void print_headlines(const scc::FigureResult& res) {
  std::printf("%s\n", res.preset.c_str());
  for (const auto& h : res.headlines) {
    std::printf("  %-28s %14.6g %-8s (reference %.6g %s)\n", h.name.c_str(), h.value,
                h.unit.c_str(), h.reference, h.unit.c_str());
  }
  for (const auto& f : res.files) std::printf("  wrote %s\n", f.c_str());
  for (const auto& note : res.check_notes) std::printf("  %s\n", note.c_str());
}

int cmd_figure(const std::string& preset, const std::string& params_path,
               std::optional<std::uint64_t> seed, std::optional<long> shots,
               const std::string& out_dir, bool check, bool no_svg, int threads) {
  if (!scc::is_preset(preset)) {
    std::fprintf(stderr, "unknown preset '%s'; valid presets:\n", preset.c_str());
    for (const auto& id : scc::preset_ids()) std::fprintf(stderr, "  %s\n", id.c_str());
    return kExitConfig;
  }
  if (scc::preset_is_stochastic(preset) && !seed) {
    std::fprintf(stderr, "preset %s is stochastic; --seed is required\n", preset.c_str());
    return kExitConfig;
  }

  scc::FigureOptions opt;
  opt.params = load_params(params_path);
  opt.seed = seed.value_or(1);
  opt.shots = shots;
  opt.out_dir = out_dir;
  opt.write_svg = !no_svg;
  opt.threads = threads;
  opt.check = check;

  scc::FigureResult res = scc::run_figure(preset, opt);
  print_headlines(res);
  if (check && !res.check_passed) return kExitCheck;
  return kExitOk;
}

int cmd_simulate(const std::string& spec_path, const std::string& params_path,
                 std::optional<std::uint64_t> seed, std::optional<long> shots,
                 const std::string& out_dir, const std::string& timetag_path, int threads) {
  scc::DefectParameters params = load_params(params_path);
  scc::ExperimentSpec spec = scc::load_experiment_spec(spec_path);
  if (seed) spec.seed = *seed;
  if (shots) spec.shots = *shots;

  auto points = scc::run(spec, params, threads);
  auto curve = scc::contrast_curve(points);
  auto fids = scc::scc_fidelity_curve(points);

  std::filesystem::create_directories(out_dir);
  scc::CsvTable table(
      {"sweep_value", "mean0", "mean1", "contrast", "fidelity", "ci_low", "ci_high"});
  for (std::size_t i = 0; i < points.size(); ++i)
    table.add_row({curve.sweep_values[i], curve.signal_ms0[i], curve.signal_ms1[i],
                   curve.contrast[i], fids[i].fidelity, fids[i].ci_low, fids[i].ci_high});
  std::string out = (std::filesystem::path(out_dir) /
                     (spec.name.empty() ? "sweep.csv" : spec.name + ".csv"))
                        .string();
  table.write_file(out);
  std::printf("wrote %s (%zu sweep points, %ld shots each)\n", out.c_str(), points.size(),
              spec.shots);

  if (!timetag_path.empty()) {
    // Per-shot export of the last sweep point's m_s=-1 branch.
    scc::PulseSequence seq = spec.sequence_at(spec.sweep_values.back());
    auto shots_list =
        scc::simulate_shots(scc::compile(seq, params, spec.settings), spec.start_state,
                            spec.shots, params, spec.seed, threads);
    std::ofstream os(timetag_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + timetag_path);
    scc::export_timetags(os, shots_list, 20000000);
    std::printf("wrote %s\n", timetag_path.c_str());
  }
  return kExitOk;
}

int cmd_analyze(const std::string& bright_path, const std::string& dark_path,
                const std::string& timetags_path, const std::string& window,
                bool strict, std::optional<long> cutoff) {
  if (!timetags_path.empty()) {
    std::ifstream is(timetags_path, std::ios::binary);
    if (!is) throw scc::ConfigError("cannot open " + timetags_path);
    scc::IngestOptions opt;
    opt.strict = strict;
    if (!window.empty())
      opt.window_ns = static_cast<std::int64_t>(
          scc::parse_quantity(window, scc::Dimension::Duration) * 1e9);
    scc::IngestResult res = scc::ingest_timetags(is, opt);
    std::printf("shots: %ld\n", res.shots);
    std::printf("malformed lines: %ld\n", res.malformed_lines);
    std::printf("out-of-window records: %ld\n", res.discarded_out_of_window);
    scc::write_histogram_csv(std::cout, res.histogram);
    return kExitOk;
  }

  if (bright_path.empty() || dark_path.empty())
    throw scc::ConfigError("analyze needs --bright and --dark histograms (or --timetags)");
  std::ifstream bs(bright_path), ds(dark_path);
  if (!bs) throw scc::ConfigError("cannot open " + bright_path);
  if (!ds) throw scc::ConfigError("cannot open " + dark_path);
  scc::Histogram bright = scc::read_histogram_csv(bs);
  scc::Histogram dark = scc::read_histogram_csv(ds);
  scc::FidelityReport rep = cutoff ? scc::fidelity(bright, dark, *cutoff)
                                   : scc::optimal_cutoff(bright, dark);
  std::printf("cutoff: %ld\n", rep.cutoff);
  std::printf("fidelity: %.6f  (68%% CI %.6f .. %.6f)\n", rep.fidelity, rep.ci_low,
              rep.ci_high);
  std::printf("p01 (dark read bright): %.6f\n", rep.p01);
  std::printf("p10 (bright read dark): %.6f\n", rep.p10);
  return kExitOk;
}

int cmd_fit(const std::string& kind, const std::string& in_path, double confidence,
            bool fit_offset) {
  std::ifstream is(in_path, std::ios::binary);
  if (!is) throw scc::ConfigError("cannot open " + in_path);

  if (kind == "stretched") {
    auto cols = scc::read_numeric_csv(is, 2);  // t_seconds,coherence[,sigma]
    scc::StretchedFit fit =
        scc::fit_stretched(cols[0], cols[1], cols.size() > 2 ? cols[2] : std::vector<double>{});
    if (fit.degenerate) {
      std::printf("degenerate input: no resolvable decay\n");
      return kExitSimulation;
    }
    std::printf("A = %.6g +- %.2g\n", fit.amplitude, fit.amplitude_err);
    std::printf("T2 = %.6g +- %.2g s\n", fit.t2, fit.t2_err);
    std::printf("n = %.6g +- %.2g\n", fit.stretch, fit.stretch_err);
    return kExitOk;
  }
  if (kind == "scaling") {
    auto cols = scc::read_numeric_csv(is, 2);  // N,T2_seconds[,sigma]
    scc::ScalingFit fit =
        scc::fit_scaling(cols[0], cols[1], cols.size() > 2 ? cols[2] : std::vector<double>{});
    std::printf("psi_low  = %.6g +- %.2g\n", fit.psi_low, fit.psi_low_err);
    std::printf("psi_high = %.6g +- %.2g\n", fit.psi_high, fit.psi_high_err);
    std::printf("breakpoint N* = %.6g\n", fit.breakpoint);
    if (fit.single_regime) std::printf("note: data is consistent with a single regime\n");
    return kExitOk;
  }
  if (kind == "t1bound") {
    auto cols = scc::read_numeric_csv(is, 3);  // delay,signal,sigma
    scc::T1BoundOptions opt;
    opt.fit_offset = fit_offset;
    scc::T1Bound bound = scc::t1_lower_bound(cols[0], cols[1], cols[2], confidence, opt);
    if (bound.all_rejected) {
      std::printf("model rejected at every candidate T1\n");
      return kExitSimulation;
    }
    std::printf("T1 >= %.6g s at %.0f%% confidence (chi2 crit %.4g, dof %d)\n", bound.bound,
                100.0 * confidence, bound.critical_value, bound.dof);
    return kExitOk;
  }
  throw scc::ConfigError("unknown fit kind '" + kind + "' (stretched|scaling|t1bound)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spin-to-charge-conversion readout simulator and analysis toolkit"};
  app.require_subcommand(1);

  // figure
  auto* fig = app.add_subcommand("figure", "run a named figure preset");
  std::string preset, params_path, out_dir = "out";
  bool check = false, no_svg = false;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<long> shots;
  std::uint64_t seed_raw = 0;
  long shots_raw = 0;
  fig->add_option("preset", preset, "preset id (fig2a .. fig5c)")->required();
  fig->add_option("--params", params_path, "defect parameter JSON file");
  auto* seed_opt = fig->add_option("--seed", seed_raw, "master RNG seed");
  auto* shots_opt = fig->add_option("--shots", shots_raw, "shots per histogram/sweep point");
  fig->add_option("--out", out_dir, "output directory");
  fig->add_flag("--check", check, "compare against reference values; exit 4 on failure");
  fig->add_flag("--no-svg", no_svg, "skip SVG output");
  fig->add_option("--threads", threads, "worker threads");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run an experiment spec JSON");
  std::string spec_path, timetag_path;
  sim->add_option("--spec", spec_path, "experiment spec JSON")->required();
  sim->add_option("--params", params_path, "defect parameter JSON file");
  auto* sim_seed = sim->add_option("--seed", seed_raw, "master RNG seed (overrides spec)");
  auto* sim_shots = sim->add_option("--shots", shots_raw, "shots per point (overrides spec)");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--timetags", timetag_path, "also export per-shot time tags to this file");
  sim->add_option("--threads", threads, "worker threads");

  // analyze
  auto* ana = app.add_subcommand("analyze", "histogram / time-tag analysis");
  std::string bright_path, dark_path, timetags_in, window;
  bool strict = false;
  long cutoff_raw = 0;
  ana->add_option("--bright", bright_path, "bright-prep histogram CSV");
  ana->add_option("--dark", dark_path, "dark-prep histogram CSV");
  auto* cut_opt = ana->add_option("--cutoff", cutoff_raw, "fixed cutoff (default: optimize)");
  ana->add_option("--timetags", timetags_in, "ingest a time-tag CSV instead");
  ana->add_option("--window", window, "counting window for --timetags (e.g. '20 ms')");
  ana->add_flag("--strict", strict, "abort on malformed or unsorted time tags");

  // fit
  auto* fit = app.add_subcommand("fit", "fit stretched/scaling/t1bound data");
  std::string fit_kind, fit_in;
  double confidence = 0.95;
  bool fit_offset = false;
  fit->add_option("--kind", fit_kind, "stretched | scaling | t1bound")->required();
  fit->add_option("--in", fit_in, "input CSV")->required();
  fit->add_option("--confidence", confidence, "confidence level for t1bound");
  fit->add_flag("--fit-offset", fit_offset, "also fit the baseline offset in t1bound");

  CLI11_PARSE(app, argc, argv);

  try {
    if (seed_opt->count() || sim_seed->count()) seed = seed_raw;
    if (shots_opt->count() || sim_shots->count()) shots = shots_raw;
    if (fig->parsed())
      return cmd_figure(preset, params_path, seed, shots, out_dir, check, no_svg, threads);
    if (sim->parsed())
      return cmd_simulate(spec_path, params_path, seed, shots, out_dir, timetag_path, threads);
    if (ana->parsed()) {
      std::optional<long> cutoff;
      if (cut_opt->count()) cutoff = cutoff_raw;
      return cmd_analyze(bright_path, dark_path, timetags_in, window, strict, cutoff);
    }
    if (fit->parsed()) return cmd_fit(fit_kind, fit_in, confidence, fit_offset);
  } catch (const scc::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "simulation error: %s\n", e.what());
    return kExitSimulation;
  }
  return kExitOk;
}
