#include "scc/presets.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "scc/coherence.hpp"
#include "scc/csv.hpp"
#include "scc/dynamics.hpp"
#include "scc/fit.hpp"
#include "scc/montecarlo.hpp"
#include "scc/protocol.hpp"
#include "scc/readout.hpp"
#include "scc/rng.hpp"
#include "scc/svg.hpp"
#include "scc/units.hpp"

namespace scc {

namespace {

namespace fs = std::filesystem;
using namespace units;

// Shared preset operating point: resonant SCC drive beyond saturation,
// ionization beam at its maximum power, charge readout on both resonant
// lines. Mirrors the reference experiment's settings.
constexpr double kSccResonantPower = 14.95 * uW;
constexpr double kSccIonizationPower = 71.0 * mW;
constexpr double kReadoutPowerPerLine = 2.025 * uW;  // 4.05 uW combined
constexpr double kReadoutWindow = 20.0 * ms;
constexpr double kRepumpPower = 20.0 * uW;
constexpr double kRepumpDuration = 5.0 * ms;
constexpr double kSpinInitDuration = 200.0 * us;
constexpr double kSpinInitPower = 7.5 * uW;
constexpr double kPiLength = 1.5 * us;
constexpr double kFig4bIonDuration = 1.39 * us;
constexpr double kFig4dIonDuration = 1.39 * us;

// Dephasing model behind fig5b/fig5c: a steep-rolloff component that
// dominates at low pulse number plus an omega^-3 tail that takes over at
// high pulse number. Amplitudes are tuned so the Hahn echo sits at a few
// milliseconds and T2 at N=16384 reaches 5.3 s; the resulting two-regime
// scaling exponents land at about 0.92 and 0.75.
NoiseSpectrum preset_noise_spectrum() {
  NoiseSpectrum sp = NoiseSpectrum::power_law(0.722307, 11.5, 700.0, 1500.0);
  sp.add(NoiseSpectrum::power_law(1.69766, 3.0, 1.0, 5000.0));
  return sp;
}

struct Ctx {
  const FigureOptions& opt;
  FigureResult result;

  long shots(long fallback) const { return opt.shots.value_or(fallback); }

  std::string path_for(const std::string& name) const {
    fs::create_directories(opt.out_dir);
    return (fs::path(opt.out_dir) / name).string();
  }

  void save_csv(const CsvTable& table, const std::string& name) {
    if (!opt.write_csv) return;
    std::string p = path_for(name);
    table.write_file(p);
    result.files.push_back(p);
  }

  void save_svg(const SvgPlot& plot, const std::string& name) {
    if (!opt.write_svg) return;
    std::string p = path_for(name);
    plot.write_file(p);
    result.files.push_back(p);
  }

  void headline(const std::string& name, double value, double reference,
                const std::string& unit) {
    result.headlines.push_back({name, value, reference, unit});
  }

  void check(bool ok, const std::string& what) {
    if (!opt.check) return;
    if (!ok) result.check_passed = false;
    result.check_notes.push_back(std::string(ok ? "pass: " : "FAIL: ") + what);
  }
};

PulseSequence scc_sequence(double t_ion, bool include_toggle = true) {
  PulseSequence seq;
  seq.groups.push_back({{{PulseKind::Repump705, kRepumpPower, 0.0}}, kRepumpDuration});
  seq.groups.push_back({{{PulseKind::ResonantE12, kSpinInitPower, 0.0}}, kSpinInitDuration});
  if (include_toggle) {
    PulseGroup toggle{{{PulseKind::MwPi, 0.0, 0.0}}, kPiLength};
    toggle.spin_toggle = true;
    seq.groups.push_back(toggle);
  }
  seq.groups.push_back({{{PulseKind::ResonantEx, kSccResonantPower, 0.0},
                         {PulseKind::Ionize1151, kSccIonizationPower, 0.0}},
                        t_ion});
  PulseGroup readout{{{PulseKind::ResonantEx, kReadoutPowerPerLine, 0.0},
                      {PulseKind::ResonantE12, kReadoutPowerPerLine, 0.0}},
                     kReadoutWindow};
  readout.readout = true;
  seq.groups.push_back(readout);
  return seq;
}

ExperimentSpec scc_duration_spec(const std::vector<double>& t_ion_values, long shots,
                                 std::uint64_t seed) {
  ExperimentSpec spec;
  spec.name = "scc_duration_sweep";
  spec.sequence = scc_sequence(t_ion_values.front());
  spec.sweep.group = 3;  // the SCC group
  spec.sweep.field = SweepField::GroupDuration;
  spec.sweep_values = t_ion_values;
  spec.shots = shots;
  spec.seed = seed;
  spec.start_state = kIon;  // full cycle including charge reset
  return spec;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out.push_back(lo + (hi - lo) * (n == 1 ? 0.0 : static_cast<double>(i) / (n - 1)));
  return out;
}

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out.push_back(lo * std::pow(hi / lo, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1)));
  return out;
}

// Deterministic contrast proxy: neutral-sector population difference at
// the end of the SCC step, both preparations, from the chained ODE.
std::vector<double> ode_contrast(const DefectParameters& params,
                                 const std::vector<double>& t_ion_values, double p1151) {
  // Drop the readout group (only the SCC outcome matters here); the SCC
  // group is then the last one regardless of the toggle's presence.
  auto make = [&](double t_ion, bool toggle) {
    PulseSequence s = scc_sequence(t_ion, toggle);
    s.groups.pop_back();
    s.groups.back().pulses[1].power = p1151;
    return s;
  };
  std::vector<double> out;
  for (double t_ion : t_ion_values) {
    PopulationVector start = PopulationVector::basis(4, kIon);
    PopulationVector end1 = propagate_schedule(compile(make(t_ion, true), params), start);
    PopulationVector end0 = propagate_schedule(compile(make(t_ion, false), params), start);
    double neutral1 = end1.p[kG0] + end1.p[kE0] + end1.p[kG1];
    double neutral0 = end0.p[kG0] + end0.p[kE0] + end0.p[kG1];
    out.push_back(neutral1 - neutral0);
  }
  return out;
}

// ---------------------------------------------------------------- fig2a

void fig2a(Ctx& ctx) {
  const auto& p = ctx.opt.params;
  std::vector<double> delays = {0.05, 1.5, 3.0, 5.0, 7.0, 9.5, 12.5, 16.0};
  long shots = ctx.shots(4000);

  LevelSystem system = LevelSystem::standard();
  LaserConfig dark;
  RateMatrix dark_matrix = build_rate_matrix(system, p, dark);
  LaserConfig ro;
  ro.p_resonant_ex = kReadoutPowerPerLine;
  ro.p_resonant_e12 = kReadoutPowerPerLine;
  RateMatrix ro_matrix = build_rate_matrix(system, p, ro);

  std::vector<double> bright_fraction, mean_counts;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    Schedule schedule{EvolveStep{dark_matrix, dark, delays[i], false},
                      EvolveStep{ro_matrix, ro, kReadoutWindow, true}};
    auto results = simulate_shots(schedule, kG0, shots, p, derive_seed(ctx.opt.seed, i),
                                  ctx.opt.threads);
    Histogram h = Histogram::from_shots(results);
    bright_fraction.push_back(h.fraction_at_least(4));
    mean_counts.push_back(h.mean());
  }

  // Dark-state false positives put a small constant floor under the
  // exponential; fit it out.
  FitResult fit = fit_exponential_decay_offset(delays, bright_fraction);
  double tau = 1.0 / fit.params[1];
  double tau_err = fit.errors[1] / (fit.params[1] * fit.params[1]);

  CsvTable table({"delay_s", "bright_fraction", "mean_counts", "model_survival"});
  for (std::size_t i = 0; i < delays.size(); ++i)
    table.add_row({delays[i], bright_fraction[i], mean_counts[i],
                   charge_survival(p, delays[i])});
  ctx.save_csv(table, "fig2a_charge_decay.csv");

  SvgPlot plot;
  plot.title = "fig2a: charge-state survival vs dark delay";
  plot.x_label = "delay (s)";
  plot.y_label = "bright fraction";
  plot.series.push_back({"simulated", delays, bright_fraction, "#1f77b4", true});
  std::vector<double> fit_x = linspace(0.0, delays.back(), 80), fit_y;
  for (double t : fit_x)
    fit_y.push_back(fit.params[0] * std::exp(-fit.params[1] * t) + fit.params[2]);
  plot.series.push_back({"fit", fit_x, fit_y, "#d62728", false});
  ctx.save_svg(plot, "fig2a_charge_decay.svg");

  ctx.headline("fitted tau_charge", tau, 6.9, "s");
  ctx.headline("fit 1-sigma", tau_err, 0.9, "s");
  ctx.check(std::abs(tau - 6.9) / 6.9 <= 0.05, "tau_charge recovered within 5%");
}

// ---------------------------------------------------------------- fig2b

void fig2b(Ctx& ctx) {
  const auto& p = ctx.opt.params;
  long shots = ctx.shots(10000);

  LevelSystem system = LevelSystem::standard();
  LaserConfig ro;
  ro.p_resonant_ex = kReadoutPowerPerLine;
  ro.p_resonant_e12 = kReadoutPowerPerLine;
  RateMatrix ro_matrix = build_rate_matrix(system, p, ro);
  Schedule schedule{EvolveStep{ro_matrix, ro, kReadoutWindow, true}};

  Histogram bright = Histogram::from_shots(
      simulate_shots(schedule, kG0, shots, p, derive_seed(ctx.opt.seed, 0), ctx.opt.threads));
  Histogram dark = Histogram::from_shots(
      simulate_shots(schedule, kIon, shots, p, derive_seed(ctx.opt.seed, 1), ctx.opt.threads));

  FidelityReport rep = optimal_cutoff(bright, dark, 1000, derive_seed(ctx.opt.seed, 2));

  CsvTable tb({"photon_count", "shots"});
  for (const auto& [count, n] : bright.bin_counts)
    tb.add_row({static_cast<double>(count), static_cast<double>(n)});
  ctx.save_csv(tb, "fig2b_bright_hist.csv");
  CsvTable td({"photon_count", "shots"});
  for (const auto& [count, n] : dark.bin_counts)
    td.add_row({static_cast<double>(count), static_cast<double>(n)});
  ctx.save_csv(td, "fig2b_dark_hist.csv");

  SvgPlot plot;
  plot.title = "fig2b: charge readout photon histograms";
  plot.x_label = "photon count";
  plot.y_label = "shots";
  plot.log_y = true;
  auto to_xy = [](const Histogram& h) {
    std::pair<std::vector<double>, std::vector<double>> xy;
    for (const auto& [count, n] : h.bin_counts) {
      xy.first.push_back(static_cast<double>(count));
      xy.second.push_back(static_cast<double>(n));
    }
    return xy;
  };
  auto [bx, by] = to_xy(bright);
  auto [dx, dy] = to_xy(dark);
  plot.series.push_back({"bright prep", bx, by, "#d62728", true});
  plot.series.push_back({"dark prep", dx, dy, "#1f77b4", true});
  ctx.save_svg(plot, "fig2b_histograms.svg");

  ctx.headline("charge readout fidelity", rep.fidelity, 0.987, "");
  ctx.headline("optimal cutoff", static_cast<double>(rep.cutoff), 4.0, "photons");
  ctx.headline("false positive p01", rep.p01, 0.0117, "");
  ctx.headline("false negative p10", rep.p10, 0.0126, "");
  ctx.headline("bright mean", bright.mean(), 100.0, "photons");
  ctx.headline("dark mean", dark.mean(), 1.3, "photons");
  ctx.check(rep.fidelity > 0.9, "charge readout fidelity above 90%");
  ctx.check(rep.cutoff >= 2 && rep.cutoff <= 8, "optimal cutoff in a sane range");
}

// ---------------------------------------------------------------- fig2c

void fig2c(Ctx& ctx) {
  const auto& p = ctx.opt.params;
  std::vector<double> powers = logspace(0.02 * uW, 50.0 * uW, 160);
  std::vector<double> yield;
  for (double pw : powers) yield.push_back(photons_per_shot(p, pw));

  PhotonYieldPeak peak = photons_per_shot_peak(p);

  CsvTable table({"resonant_power_W", "photons_per_shot"});
  for (std::size_t i = 0; i < powers.size(); ++i) table.add_row({powers[i], yield[i]});
  ctx.save_csv(table, "fig2c_photons_per_shot.csv");

  SvgPlot plot;
  plot.title = "fig2c: photons per shot vs resonant power";
  plot.x_label = "resonant power (W)";
  plot.y_label = "photons per shot";
  plot.log_x = true;
  plot.series.push_back({"model", powers, yield, "#1f77b4", false});
  ctx.save_svg(plot, "fig2c_photons_per_shot.svg");

  int sign_changes = 0;
  for (std::size_t i = 2; i < yield.size(); ++i) {
    double d1 = yield[i - 1] - yield[i - 2];
    double d2 = yield[i] - yield[i - 1];
    if (d1 > 0 && d2 < 0) ++sign_changes;
  }

  ctx.headline("peak photons per shot", peak.photons, 1529.0, "photons");
  ctx.headline("peak power", peak.power, 1.0 * uW, "W");
  ctx.check(std::abs(peak.photons - 1529.0) <= 117.0, "peak yield within the reference error bar");
  ctx.check(sign_changes == 1, "yield curve is unimodal");
}

// ---------------------------------------------------------------- fig3a

void fig3a(Ctx& ctx) {
  const auto& p = ctx.opt.params;
  LevelSystem system = LevelSystem::standard();
  std::vector<double> powers = {2.0 * uW, 5.0 * uW, 10.0 * uW, 20.0 * uW, 30.0 * uW};
  std::vector<double> fitted;

  for (double pw : powers) {
    LaserConfig repump;
    repump.p_repump_705 = pw;
    RateMatrix m = build_rate_matrix(system, p, repump);
    double expected = repump_rate(p, pw);
    std::vector<double> ts, dark_frac;
    for (int i = 1; i <= 24; ++i) {
      double t = i * 0.2 / expected;
      PopulationVector pop = propagate(m, PopulationVector::basis(4, kIon), t);
      ts.push_back(t);
      dark_frac.push_back(pop.p[kIon]);
    }
    FitResult fit = fit_exponential_decay(ts, dark_frac);
    fitted.push_back(fit.params[1]);
  }

  FitResult line = fit_line(powers, fitted);
  CsvTable table({"power_W", "fitted_rate_Hz", "model_rate_Hz"});
  for (std::size_t i = 0; i < powers.size(); ++i)
    table.add_row({powers[i], fitted[i], repump_rate(p, powers[i])});
  ctx.save_csv(table, "fig3a_repump_rate.csv");

  SvgPlot plot;
  plot.title = "fig3a: charge reset rate vs 705 nm power";
  plot.x_label = "power (W)";
  plot.y_label = "reset rate (Hz)";
  plot.series.push_back({"fitted", powers, fitted, "#1f77b4", true});
  ctx.save_svg(plot, "fig3a_repump_rate.svg");

  double slope_uW = line.params[1] * 1e-6;  // Hz per uW
  ctx.headline("repump slope", slope_uW, 993.0, "Hz/uW");
  ctx.check(std::abs(line.params[1] - p.repump_slope) / p.repump_slope < 0.01,
            "recovery-rate slope matches the configured reset slope");
}

// ---------------------------------------------------------------- fig3b

void fig3b(Ctx& ctx) {
  const auto& p = ctx.opt.params;
  double psat = p.resonant_sat_power;
  std::vector<double> powers = logspace(1e-3 * psat, 1e3 * psat, 200);
  std::vector<double> rates;
  for (double pw : powers) rates.push_back(resonant_ionization_rate(p, pw));

  auto loglog_slope = [&](std::size_t i) {
    return (std::log(rates[i + 1]) - std::log(rates[i])) /
           (std::log(powers[i + 1]) - std::log(powers[i]));
  };
  double slope_low = loglog_slope(0);
  double slope_high = loglog_slope(powers.size() - 2);

  CsvTable table({"power_W", "rate_Hz"});
  for (std::size_t i = 0; i < powers.size(); ++i) table.add_row({powers[i], rates[i]});
  ctx.save_csv(table, "fig3b_resonant_ionization.csv");

  SvgPlot plot;
  plot.title = "fig3b: resonant two-photon ionization rate";
  plot.x_label = "resonant power (W)";
  plot.y_label = "ionization rate (Hz)";
  plot.log_x = true;
  plot.log_y = true;
  plot.series.push_back({"model", powers, rates, "#1f77b4", false});
  ctx.save_svg(plot, "fig3b_resonant_ionization.svg");

  ctx.headline("asymptotic slope", p.resonant_ion_slope / 1e6, 10.6, "MHz/W");
  ctx.headline("log-log slope, low power", slope_low, 2.0, "");
  ctx.headline("log-log slope, high power", slope_high, 1.0, "");
  ctx.check(std::abs(slope_low - 2.0) <= 0.1, "quadratic low-power regime");
  ctx.check(std::abs(slope_high - 1.0) <= 0.1, "linear high-power regime");
}

// ---------------------------------------------------------------- fig3c

void fig3c(Ctx& ctx) {
  const auto& p = ctx.opt.params;
  std::vector<double> powers = linspace(0.0, 80.0 * mW, 33);
  CsvTable table({"power_W", "rate_Hz"});
  std::vector<double> rates;
  for (double pw : powers) {
    rates.push_back(nir_ionization_rate(p, pw));
    table.add_row({pw, rates.back()});
  }
  ctx.save_csv(table, "fig3c_nir_ionization.csv");

  SvgPlot plot;
  plot.title = "fig3c: 1151 nm-only ionization rate";
  plot.x_label = "power (W)";
  plot.y_label = "rate (Hz)";
  plot.series.push_back({"model", powers, rates, "#1f77b4", false});
  ctx.save_svg(plot, "fig3c_nir_ionization.svg");

  ctx.headline("slope", p.nir_ion_slope / 1e3, 95.7, "kHz/W");
  ctx.headline("rate at 71 mW", nir_ionization_rate(p, 71.0 * mW) / 1e3, 6.79, "kHz");
  ctx.check(std::abs(nir_ionization_rate(p, 71.0 * mW) - 6.79e3) / 6.79e3 < 0.01,
            "71 mW leak rate matches the linear model");
}

// ---------------------------------------------------------------- fig3d

void fig3d(Ctx& ctx) {
  const auto& p = ctx.opt.params;
  std::vector<double> powers = linspace(0.0, 71.0 * mW, 15);
  auto curve = spin_agnostic_ionization_rate_curve(p, kSccResonantPower / 2.0,
                                                   kSccResonantPower / 2.0, powers);

  CsvTable table({"power_W", "rate_Hz", "fit_ok"});
  std::vector<double> px, py;
  for (const auto& pt : curve) {
    table.add_row({pt.power, pt.rate, pt.fit_ok ? 1.0 : 0.0});
    if (pt.fit_ok) {
      px.push_back(pt.power);
      py.push_back(pt.rate);
    }
  }
  ctx.save_csv(table, "fig3d_spin_agnostic_rate.csv");

  SvgPlot plot;
  plot.title = "fig3d: spin-agnostic ionization rate vs 1151 nm power";
  plot.x_label = "power (W)";
  plot.y_label = "rate (Hz)";
  plot.series.push_back({"fitted", px, py, "#1f77b4", true});
  ctx.save_svg(plot, "fig3d_spin_agnostic_rate.svg");

  double rate_top = curve.back().rate;
  double rate_zero = curve.front().rate;
  double res_only = resonant_ionization_rate(p, kSccResonantPower);
  // Saturation: the top-end rate must fall well short of the linear
  // extrapolation from the low-power part of the curve.
  double linear_ref = 0.0;
  for (const auto& pt : curve)
    if (pt.fit_ok && pt.power > 0.0 && pt.power <= 0.25 * powers.back()) {
      linear_ref = pt.rate / pt.power * powers.back();
    }

  ctx.headline("rate at 71 mW", rate_top / 1e6, 1.5, "MHz");
  ctx.headline("rate at zero 1151 power", rate_zero, res_only, "Hz");
  ctx.headline("nir-only leak at 71 mW", nir_ionization_rate(p, 71.0 * mW), 6.79e3, "Hz");
  ctx.check(std::abs(rate_zero - res_only) / res_only < 0.05,
            "zero-power point matches the resonant-only rate");
  ctx.check(rate_top > 5e5 && rate_top < 5e6, "spin-agnostic rate reaches the MHz scale");
  ctx.check(linear_ref > 0.0 && rate_top < 0.8 * linear_ref,
            "rate saturates below the linear extrapolation");
  ctx.check(rate_top > 100.0 * nir_ionization_rate(p, 71.0 * mW),
            "two-photon channel dominates the 1151-only leak by >= 2 orders");
}

// ------------------------------------------------------- fig4a and fig4c

void fig4_duration_sweep(Ctx& ctx, bool fidelity_focus) {
  const auto& p = ctx.opt.params;
  long shots = ctx.shots(1000);
  std::vector<double> t_ion = linspace(0.0, 8.0 * us, 25);
  t_ion[0] = 1e-9;  // strictly increasing grid starting at "zero"
  ExperimentSpec spec = scc_duration_spec(t_ion, shots, ctx.opt.seed);
  auto points = run(spec, p, ctx.opt.threads);
  ContrastCurve curve = contrast_curve(points);
  auto fids = scc_fidelity_curve(points, 400, derive_seed(ctx.opt.seed, 999));

  CsvTable table(
      {"sweep_value", "mean0", "mean1", "contrast", "fidelity", "ci_low", "ci_high"});
  for (std::size_t i = 0; i < points.size(); ++i)
    table.add_row({curve.sweep_values[i], curve.signal_ms0[i], curve.signal_ms1[i],
                   curve.contrast[i], fids[i].fidelity, fids[i].ci_low, fids[i].ci_high});
  ctx.save_csv(table, fidelity_focus ? "fig4c_fidelity_sweep.csv" : "fig4a_contrast_sweep.csv");

  SvgPlot plot;
  plot.x_label = "SCC pulse duration (s)";
  if (fidelity_focus) {
    plot.title = "fig4c: SCC fidelity vs pulse duration";
    plot.y_label = "fidelity";
    std::vector<double> f;
    for (const auto& r : fids) f.push_back(r.fidelity);
    plot.series.push_back({"fidelity", curve.sweep_values, f, "#1f77b4", true});
  } else {
    plot.title = "fig4a: charge readout signal after SCC";
    plot.y_label = "normalized signal / contrast";
    plot.series.push_back({"m_s=0", curve.sweep_values, curve.signal_ms0, "#1f77b4", true});
    plot.series.push_back({"m_s=-1", curve.sweep_values, curve.signal_ms1, "#d62728", true});
    plot.series.push_back({"contrast", curve.sweep_values, curve.contrast, "#2ca02c", false});
  }
  ctx.save_svg(plot, fidelity_focus ? "fig4c_fidelity_sweep.svg" : "fig4a_contrast_sweep.svg");

  // Deterministic peak location from the ODE companion curve.
  std::vector<double> ode = ode_contrast(p, t_ion, kSccIonizationPower);
  std::size_t ode_peak = static_cast<std::size_t>(
      std::max_element(ode.begin(), ode.end()) - ode.begin());
  double ode_peak_t = t_ion[ode_peak];

  if (fidelity_focus) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < fids.size(); ++i)
      if (fids[i].fidelity > fids[best].fidelity) best = i;
    ctx.headline("peak SCC fidelity", fids[best].fidelity, 0.808, "");
    ctx.headline("best duration", curve.sweep_values[best], 2.0 * us, "s");
    ctx.check(curve.sweep_values[best] >= 1.0 * us && curve.sweep_values[best] <= 3.0 * us,
              "fidelity peaks at a duration in [1, 3] us");
  } else {
    double best_c = *std::max_element(curve.contrast.begin(), curve.contrast.end());
    std::size_t best = static_cast<std::size_t>(
        std::max_element(curve.contrast.begin(), curve.contrast.end()) -
        curve.contrast.begin());
    ctx.headline("max contrast", best_c, 0.682, "");
    ctx.headline("best duration", curve.sweep_values[best], 1.39 * us, "s");
    ctx.headline("ODE peak duration", ode_peak_t, 1.39 * us, "s");
    ctx.check(ode_peak_t >= 1.0 * us && ode_peak_t <= 3.0 * us,
              "contrast peaks at t_ion in [1, 3] us (ODE)");
    ctx.check(curve.sweep_values[best] >= 0.7 * us && curve.sweep_values[best] <= 3.5 * us,
              "sampled contrast peak near the ODE prediction");
    ctx.check(ode.back() < 0.8 * ode[ode_peak], "contrast falls after the peak");
  }
}

// ---------------------------------------------------------------- fig4b

void fig4b(Ctx& ctx) {
  const auto& p = ctx.opt.params;
  long shots = ctx.shots(10000);
  ExperimentSpec spec = scc_duration_spec({kFig4bIonDuration}, shots, ctx.opt.seed);
  auto points = run(spec, p, ctx.opt.threads);
  FidelityReport rep =
      optimal_cutoff(points[0].prep_ms1, points[0].prep_ms0, 1000, derive_seed(ctx.opt.seed, 7));

  CsvTable tb({"photon_count", "shots"});
  for (const auto& [count, n] : points[0].prep_ms1.bin_counts)
    tb.add_row({static_cast<double>(count), static_cast<double>(n)});
  ctx.save_csv(tb, "fig4b_ms1_hist.csv");
  CsvTable td({"photon_count", "shots"});
  for (const auto& [count, n] : points[0].prep_ms0.bin_counts)
    td.add_row({static_cast<double>(count), static_cast<double>(n)});
  ctx.save_csv(td, "fig4b_ms0_hist.csv");

  ctx.headline("end-to-end SCC fidelity", rep.fidelity, 0.808, "");
  ctx.headline("optimal cutoff", static_cast<double>(rep.cutoff), 2.0, "photons");
  ctx.headline("false positive p01", rep.p01, 0.27, "");
  ctx.headline("false negative p10", rep.p10, 0.11, "");
  ctx.check(rep.fidelity > 0.6 && rep.fidelity < 0.95, "end-to-end fidelity in a sane band");
}

// ---------------------------------------------------------------- fig4d

void fig4d(Ctx& ctx) {
  const auto& p = ctx.opt.params;
  long shots = ctx.shots(1000);
  std::vector<double> powers = linspace(0.0, 71.0 * mW, 15);
  powers[0] = 1e-6 * mW;

  ExperimentSpec spec = scc_duration_spec({kFig4dIonDuration}, shots, ctx.opt.seed);
  spec.sweep.group = 3;
  spec.sweep.pulse = 1;  // the 1151 nm pulse in the SCC group
  spec.sweep.field = SweepField::PulsePower;
  spec.sweep_values = powers;
  spec.sequence.groups[3].duration = kFig4dIonDuration;

  auto points = run(spec, p, ctx.opt.threads);
  ContrastCurve curve = contrast_curve(points);

  CsvTable table({"sweep_value", "mean0", "mean1", "contrast"});
  for (std::size_t i = 0; i < points.size(); ++i)
    table.add_row({curve.sweep_values[i], curve.signal_ms0[i], curve.signal_ms1[i],
                   curve.contrast[i]});
  ctx.save_csv(table, "fig4d_contrast_vs_power.csv");

  SvgPlot plot;
  plot.title = "fig4d: SCC contrast vs ionization power";
  plot.x_label = "1151 nm power (W)";
  plot.y_label = "contrast";
  plot.series.push_back({"contrast", curve.sweep_values, curve.contrast, "#1f77b4", true});
  ctx.save_svg(plot, "fig4d_contrast_vs_power.svg");

  // Deterministic shape checks on the ODE proxy.
  auto ode_at = [&](const DefectParameters& params, double q) {
    return ode_contrast(params, {kFig4dIonDuration}, q)[0];
  };
  bool monotone = true;
  double prev = -1.0;
  std::vector<double> ode_curve;
  for (double q : powers) {
    double c = ode_at(p, q);
    ode_curve.push_back(c);
    if (c < prev - 1e-9) monotone = false;
    prev = c;
  }
  double gain_first = ode_curve[ode_curve.size() / 2] - ode_curve.front();
  double gain_second = ode_curve.back() - ode_curve[ode_curve.size() / 2];
  // Asymptote: ionization and stimulated emission driven to infinity at
  // a fixed cross-section ratio, all other channels at the operating
  // point. Realized by scaling both slopes together.
  DefectParameters limit = p;
  limit.excited_ion_slope *= 1e4;
  limit.stim_emission_slope *= 1e4;
  double asymptote = ode_at(limit, 71.0 * mW);
  // Closed-form companion: only the G1 leak survives the limit, and the
  // conversion rate pins to W * r / (1 + r).
  double w_pump = p.spontaneous_rate * saturation_factor(p, kSccResonantPower);
  double leak = nir_ionization_rate(p, 71.0 * mW) +
                p.leak_beta * resonant_ionization_rate(p, kSccResonantPower);
  double r = p.cross_section_ratio();
  double closed_form = std::exp(-leak * kFig4dIonDuration) -
                       std::exp(-w_pump * r / (1.0 + r) * kFig4dIonDuration);

  ctx.headline("contrast at 71 mW (ODE)", ode_at(p, 71.0 * mW), 0.682, "");
  ctx.headline("asymptotic contrast (ODE)", asymptote, closed_form, "");
  ctx.check(monotone, "contrast is monotone in ionization power");
  ctx.check(gain_second < 0.5 * gain_first, "contrast saturates within the swept range");
  ctx.check(asymptote < 1.0, "asymptotic contrast stays below unity");
  ctx.check(curve.contrast.back() > 0.2, "sampled contrast reaches a sizable value");
}

// ---------------------------------------------------------------- fig4e

void fig4e(Ctx& ctx) {
  const auto& p = ctx.opt.params;
  std::vector<double> powers = linspace(0.0, 100.0 * mW, 21);
  CsvTable table({"power_W", "stimulated_rate_Hz"});
  std::vector<double> rates;
  for (double pw : powers) {
    rates.push_back(stimulated_emission_rate(p, pw));
    table.add_row({pw, rates.back()});
  }
  ctx.save_csv(table, "fig4e_stimulated_emission.csv");

  SvgPlot plot;
  plot.title = "fig4e: stimulated emission rate vs 1151 nm power";
  plot.x_label = "power (W)";
  plot.y_label = "rate (Hz)";
  plot.series.push_back({"model", powers, rates, "#e8a000", false});
  ctx.save_svg(plot, "fig4e_stimulated_emission.svg");

  ctx.headline("slope", p.stim_emission_slope / 1e6, 13.3, "MHz/W");
  ctx.check(std::abs(p.stim_emission_slope - 13.3e6) / 13.3e6 < 1e-9,
            "stimulated-emission slope is the configured constant");
}

// ---------------------------------------------------------------- fig5a

void fig5a(Ctx& ctx) {
  std::vector<double> delays = {0.5, 1.0, 2.0, 4.0, 8.0, 15.0, 30.0};
  double sigma = 0.1;
  Rng rng(derive_seed(ctx.opt.seed, 0));
  std::vector<double> signal, errors;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    signal.push_back(1.0 + sigma * rng.gaussian());  // no visible decay
    errors.push_back(sigma);
  }

  T1Bound bound = t1_lower_bound(delays, signal, errors, 0.95);

  CsvTable table({"delay_s", "signal", "sigma"});
  for (std::size_t i = 0; i < delays.size(); ++i)
    table.add_row({delays[i], signal[i], errors[i]});
  ctx.save_csv(table, "fig5a_t1_data.csv");

  CsvTable trace({"t1_s", "chi_square"});
  for (std::size_t i = 0; i < bound.t1_grid.size(); ++i)
    trace.add_row({bound.t1_grid[i], bound.chi_square[i]});
  ctx.save_csv(trace, "fig5a_chi2_trace.csv");

  SvgPlot plot;
  plot.title = "fig5a: chi-square trace over candidate T1";
  plot.x_label = "T1 (s)";
  plot.y_label = "chi-square";
  plot.log_x = true;
  plot.series.push_back({"chi2", bound.t1_grid, bound.chi_square, "#1f77b4", false});
  std::vector<double> crit(bound.t1_grid.size(), bound.critical_value);
  plot.series.push_back({"95% critical", bound.t1_grid, crit, "#d62728", false});
  ctx.save_svg(plot, "fig5a_chi2_trace.svg");

  ctx.headline("T1 lower bound (95%)", bound.bound, 103.0, "s");
  ctx.check(!bound.all_rejected, "relaxation model is consistent with the data");
  ctx.check(bound.bound >= 50.0, "bound is of order 100 s");
}

// ------------------------------------------------------- fig5b and fig5c

void fig5bc(Ctx& ctx, bool scaling_focus) {
  NoiseSpectrum spectrum = preset_noise_spectrum();
  std::vector<int> pulse_counts = {1, 4, 16, 64, 256, 1024, 4096, 16384};

  std::vector<double> t2s, ns, stretches;
  CsvTable curves({"n_pulses", "t_seconds", "coherence"});
  CsvTable fits({"N", "T2_seconds", "sigma", "stretch", "stretch_sigma"});
  SvgPlot decay_plot;
  decay_plot.title = "fig5b: coherence envelopes under CPMG decoupling";
  decay_plot.x_label = "total evolution time (s)";
  decay_plot.y_label = "coherence";
  decay_plot.log_x = true;
  const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  for (std::size_t k = 0; k < pulse_counts.size(); ++k) {
    int n = pulse_counts[k];
    double t2 = coherence_time(SequenceStyle::XY8, n, spectrum);
    std::vector<double> times = logspace(0.15 * t2, 2.8 * t2, 24);
    CoherenceCurve curve = coherence_envelope(SequenceStyle::XY8, n, times, spectrum);
    StretchedFit fit = fit_stretched(curve.times, curve.coherence);
    for (std::size_t i = 0; i < times.size(); ++i)
      curves.add_row({static_cast<double>(n), curve.times[i], curve.coherence[i]});
    fits.add_row({static_cast<double>(n), fit.t2, fit.t2_err, fit.stretch, fit.stretch_err});
    ns.push_back(n);
    t2s.push_back(fit.t2);
    stretches.push_back(fit.stretch);
    decay_plot.series.push_back({"N=" + std::to_string(n), curve.times, curve.coherence,
                                 colors[k % 8], false});
  }

  if (!scaling_focus) {
    ctx.save_csv(curves, "fig5b_envelopes.csv");
    ctx.save_csv(fits, "fig5b_stretched_fits.csv");
    ctx.save_svg(decay_plot, "fig5b_envelopes.svg");
    double t2_max = *std::max_element(t2s.begin(), t2s.end());
    ctx.headline("max T2", t2_max, 5.3, "s");
    ctx.headline("stretch at max N", stretches.back(), 1.5, "");
    bool increasing = std::is_sorted(t2s.begin(), t2s.end());
    ctx.check(increasing, "T2 grows monotonically with pulse number");
    ctx.check(t2_max > 3.0 && t2_max < 9.0, "max T2 lands on the few-second scale");
    return;
  }

  ScalingFit scaling = fit_scaling(ns, t2s);
  CsvTable table({"N", "T2_seconds", "sigma"});
  for (std::size_t i = 0; i < ns.size(); ++i) table.add_row({ns[i], t2s[i], 0.0});
  ctx.save_csv(table, "fig5c_t2_scaling.csv");

  SvgPlot plot;
  plot.title = "fig5c: T2 scaling with pulse number";
  plot.x_label = "pulse number N";
  plot.y_label = "T2 (s)";
  plot.log_x = true;
  plot.log_y = true;
  plot.series.push_back({"T2(N)", ns, t2s, "#1f77b4", true});
  ctx.save_svg(plot, "fig5c_t2_scaling.svg");

  ctx.headline("psi (low N)", scaling.psi_low, 0.92, "");
  ctx.headline("psi (high N)", scaling.psi_high, 0.75, "");
  ctx.headline("regime breakpoint", scaling.breakpoint, 128.0, "pulses");
  ctx.check(scaling.psi_low > scaling.psi_high, "scaling softens at high pulse number");
  ctx.check(scaling.psi_high > 0.5 && scaling.psi_low < 1.1, "exponents in the physical band");
}

}  // namespace

const std::vector<std::string>& preset_ids() {
  static const std::vector<std::string> ids = {
      "fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c", "fig3d",
      "fig4a", "fig4b", "fig4c", "fig4d", "fig4e", "fig5a", "fig5b", "fig5c"};
  return ids;
}

bool is_preset(const std::string& id) {
  const auto& ids = preset_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

bool preset_is_stochastic(const std::string& id) {
  static const std::vector<std::string> stochastic = {"fig2a", "fig2b", "fig4a",
                                                      "fig4b", "fig4c", "fig4d", "fig5a"};
  return std::find(stochastic.begin(), stochastic.end(), id) != stochastic.end();
}

FigureResult run_figure(const std::string& preset_id, const FigureOptions& options) {
  if (!is_preset(preset_id))
    throw std::invalid_argument("unknown preset: " + preset_id);
  options.params.validate();

  Ctx ctx{options, {}};
  ctx.result.preset = preset_id;

  if (preset_id == "fig2a") fig2a(ctx);
  else if (preset_id == "fig2b") fig2b(ctx);
  else if (preset_id == "fig2c") fig2c(ctx);
  else if (preset_id == "fig3a") fig3a(ctx);
  else if (preset_id == "fig3b") fig3b(ctx);
  else if (preset_id == "fig3c") fig3c(ctx);
  else if (preset_id == "fig3d") fig3d(ctx);
  else if (preset_id == "fig4a") fig4_duration_sweep(ctx, false);
  else if (preset_id == "fig4b") fig4b(ctx);
  else if (preset_id == "fig4c") fig4_duration_sweep(ctx, true);
  else if (preset_id == "fig4d") fig4d(ctx);
  else if (preset_id == "fig4e") fig4e(ctx);
  else if (preset_id == "fig5a") fig5a(ctx);
  else if (preset_id == "fig5b") fig5bc(ctx, false);
  else if (preset_id == "fig5c") fig5bc(ctx, true);

  return ctx.result;
}

}  // namespace scc
