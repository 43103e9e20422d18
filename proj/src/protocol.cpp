#include "scc/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scc/fit.hpp"

namespace scc {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

const char* pulse_kind_name(PulseKind kind) {
  switch (kind) {
    case PulseKind::Repump705: return "repump705";
    case PulseKind::ResonantEx: return "resonant_ex";
    case PulseKind::ResonantE12: return "resonant_e12";
    case PulseKind::Ionize1151: return "ionize1151";
    case PulseKind::MwPi: return "mw_pi";
    case PulseKind::MwPiHalf: return "mw_pi_half";
    case PulseKind::Wait: return "wait";
  }
  return "unknown";
}

PulseKind pulse_kind_from_name(const std::string& name) {
  for (PulseKind k : {PulseKind::Repump705, PulseKind::ResonantEx, PulseKind::ResonantE12,
                      PulseKind::Ionize1151, PulseKind::MwPi, PulseKind::MwPiHalf,
                      PulseKind::Wait})
    if (name == pulse_kind_name(k)) return k;
  throw std::invalid_argument("unknown pulse kind: " + name);
}

bool Pulse::is_laser() const {
  return kind == PulseKind::Repump705 || kind == PulseKind::ResonantEx ||
         kind == PulseKind::ResonantE12 || kind == PulseKind::Ionize1151;
}

bool Pulse::is_microwave() const {
  return kind == PulseKind::MwPi || kind == PulseKind::MwPiHalf;
}

void Pulse::validate() const {
  require(power >= 0.0, "pulse power must be >= 0");
  if (is_microwave()) require(power == 0.0, "microwave pulses carry no power");
  if (is_laser()) require(phase == 0.0, "laser pulses carry no phase");
  if (kind == PulseKind::Wait)
    require(power == 0.0 && phase == 0.0, "wait carries neither power nor phase");
}

void PulseGroup::validate() const {
  require(duration >= 0.0, "group duration must be >= 0");
  for (const auto& p : pulses) p.validate();
  bool has_mw = false, has_laser = false;
  for (const auto& p : pulses) {
    has_mw |= p.is_microwave();
    has_laser |= p.is_laser();
  }
  require(!(has_mw && has_laser), "microwave pulses cannot overlap laser pulses");
  for (std::size_t i = 0; i < pulses.size(); ++i)
    for (std::size_t j = i + 1; j < pulses.size(); ++j)
      require(pulses[i].kind != pulses[j].kind,
              std::string("conflicting duplicate definition of ") +
                  pulse_kind_name(pulses[i].kind));
  if (spin_toggle) {
    require(pulses.size() == 1 && pulses[0].kind == PulseKind::MwPi,
            "the spin toggle group must contain exactly one mw_pi pulse");
  }
}

void PulseSequence::validate() const {
  int readouts = 0, toggles = 0;
  for (const auto& g : groups) {
    g.validate();
    readouts += g.readout ? 1 : 0;
    toggles += g.spin_toggle ? 1 : 0;
  }
  require(readouts <= 1, "at most one readout group per sequence");
  require(toggles <= 1, "at most one spin toggle group per sequence");
}

std::optional<std::size_t> PulseSequence::readout_group() const {
  for (std::size_t i = 0; i < groups.size(); ++i)
    if (groups[i].readout) return i;
  return std::nullopt;
}

std::optional<std::size_t> PulseSequence::toggle_group() const {
  for (std::size_t i = 0; i < groups.size(); ++i)
    if (groups[i].spin_toggle) return i;
  return std::nullopt;
}

Schedule compile(const PulseSequence& seq, const DefectParameters& params,
                 const ProtocolSettings& settings) {
  seq.validate();
  require(settings.spin_init_fidelity >= 0.0 && settings.spin_init_fidelity <= 1.0,
          "spin_init_fidelity must be in [0, 1]");
  LevelSystem system = LevelSystem::standard();
  LaserConfig dark;
  RateMatrix dark_matrix = build_rate_matrix(system, params, dark);

  Schedule schedule;
  for (const auto& g : seq.groups) {
    bool has_mw_pi = false, has_mw_half = false;
    LaserConfig lasers;
    for (const auto& p : g.pulses) {
      switch (p.kind) {
        case PulseKind::Repump705: lasers.p_repump_705 = p.power; break;
        case PulseKind::ResonantEx: lasers.p_resonant_ex = p.power; break;
        case PulseKind::ResonantE12: lasers.p_resonant_e12 = p.power; break;
        case PulseKind::Ionize1151: lasers.p_ionization_1151 = p.power; break;
        case PulseKind::MwPi: has_mw_pi = true; break;
        case PulseKind::MwPiHalf: has_mw_half = true; break;
        case PulseKind::Wait: break;
      }
    }

    bool e12_only = lasers.p_resonant_e12 > 0.0 && lasers.p_resonant_ex == 0.0 &&
                    lasers.p_ionization_1151 == 0.0 && lasers.p_repump_705 == 0.0;

    if (has_mw_pi || has_mw_half) {
      // Nominal pulse length is dark dead time; the rotation itself is
      // instantaneous and ideal.
      if (g.duration > 0.0)
        schedule.push_back(EvolveStep{dark_matrix, dark, g.duration, false});
      if (has_mw_pi) schedule.push_back(SwapStep{kG0, kG1});
    } else if (e12_only && !g.readout) {
      // Spin initialization: fixed-fidelity preparation instead of
      // microscopic pumping. The laser time still passes in the dark.
      if (g.duration > 0.0)
        schedule.push_back(EvolveStep{dark_matrix, dark, g.duration, false});
      schedule.push_back(ResetStep{kG1, kG0, settings.spin_init_fidelity});
    } else {
      RateMatrix m = lasers.all_lasers_off() ? dark_matrix
                                             : build_rate_matrix(system, params, lasers);
      schedule.push_back(EvolveStep{std::move(m), lasers, g.duration, g.readout});
    }
  }
  return schedule;
}

PopulationVector propagate_schedule(const Schedule& schedule, const PopulationVector& p0) {
  PopulationVector p = p0;
  for (const auto& step : schedule) {
    if (std::holds_alternative<EvolveStep>(step)) {
      const auto& ev = std::get<EvolveStep>(step);
      if (ev.duration > 0.0) p = propagate(ev.matrix, p, ev.duration);
    } else if (std::holds_alternative<SwapStep>(step)) {
      const auto& sw = std::get<SwapStep>(step);
      std::swap(p.p[sw.a], p.p[sw.b]);
    } else {
      const auto& rs = std::get<ResetStep>(step);
      p.p[rs.to] += rs.fidelity * p.p[rs.from];
      p.p[rs.from] *= 1.0 - rs.fidelity;
    }
  }
  return p;
}

std::vector<PopulationVector> propagate_schedule_trace(const Schedule& schedule,
                                                       const PopulationVector& p0) {
  std::vector<PopulationVector> trace;
  PopulationVector p = p0;
  for (const auto& step : schedule) {
    Schedule single{step};
    p = propagate_schedule(single, p);
    trace.push_back(p);
  }
  return trace;
}

void ExperimentSpec::validate() const {
  sequence.validate();
  require(!sweep_values.empty(), "sweep grid must not be empty");
  for (std::size_t i = 1; i < sweep_values.size(); ++i)
    require(sweep_values[i] > sweep_values[i - 1], "sweep grid must be strictly increasing");
  require(shots >= 1, "shots must be >= 1");
  require(sweep.group < sequence.groups.size(), "sweep group out of range");
  if (sweep.field == SweepField::PulsePower)
    require(sweep.pulse < sequence.groups[sweep.group].pulses.size(),
            "sweep pulse out of range");
}

PulseSequence ExperimentSpec::sequence_at(double sweep_value) const {
  PulseSequence out = sequence;
  if (sweep.field == SweepField::GroupDuration) {
    require(sweep_value >= 0.0, "swept duration must be >= 0");
    out.groups[sweep.group].duration = sweep_value;
  } else {
    require(sweep_value >= 0.0, "swept power must be >= 0");
    out.groups[sweep.group].pulses[sweep.pulse].power = sweep_value;
  }
  return out;
}

namespace {

PulseSequence without_toggle(const PulseSequence& seq) {
  PulseSequence out = seq;
  if (auto idx = seq.toggle_group()) {
    PulseGroup& g = out.groups[*idx];
    g.pulses.clear();
    g.pulses.push_back(Pulse{PulseKind::Wait, 0.0, 0.0});
    g.spin_toggle = false;
  }
  return out;
}

}  // namespace

std::vector<SweepPoint> run(const ExperimentSpec& spec, const DefectParameters& params,
                            int threads) {
  spec.validate();
  std::vector<SweepPoint> points;
  points.reserve(spec.sweep_values.size());
  for (std::size_t i = 0; i < spec.sweep_values.size(); ++i) {
    double value = spec.sweep_values[i];
    PulseSequence with_pi = spec.sequence_at(value);
    PulseSequence no_pi = without_toggle(with_pi);

    SweepPoint pt;
    pt.sweep_value = value;
    // Distinct deterministic sub-streams per point and preparation.
    std::uint64_t seed0 = derive_seed(spec.seed, 2 * i);
    std::uint64_t seed1 = derive_seed(spec.seed, 2 * i + 1);
    pt.prep_ms0 = Histogram::from_shots(simulate_shots(
        compile(no_pi, params, spec.settings), spec.start_state, spec.shots, params, seed0,
        threads));
    pt.prep_ms1 = Histogram::from_shots(simulate_shots(
        compile(with_pi, params, spec.settings), spec.start_state, spec.shots, params,
        seed1, threads));
    points.push_back(std::move(pt));
  }
  return points;
}

ContrastCurve contrast_curve(const std::vector<SweepPoint>& points,
                             ContrastConvention convention, long cutoff) {
  require(!points.empty(), "no sweep points");
  ContrastCurve curve;
  curve.convention = convention;
  double norm = 1.0;
  if (convention == ContrastConvention::NormalizedMeans) {
    norm = points.front().prep_ms1.mean();
    if (norm <= 0.0) norm = 1.0;
  }
  for (const auto& pt : points) {
    double s0, s1;
    if (convention == ContrastConvention::NormalizedMeans) {
      s0 = pt.prep_ms0.mean() / norm;
      s1 = pt.prep_ms1.mean() / norm;
    } else {
      s0 = pt.prep_ms0.fraction_at_least(cutoff);
      s1 = pt.prep_ms1.fraction_at_least(cutoff);
    }
    curve.sweep_values.push_back(pt.sweep_value);
    curve.signal_ms0.push_back(s0);
    curve.signal_ms1.push_back(s1);
    curve.contrast.push_back(std::clamp(s1 - s0, -1.0, 1.0));
  }
  return curve;
}

std::vector<FidelityReport> scc_fidelity_curve(const std::vector<SweepPoint>& points,
                                               int resamples, std::uint64_t seed) {
  std::vector<FidelityReport> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    out.push_back(optimal_cutoff(points[i].prep_ms1, points[i].prep_ms0, resamples,
                                 derive_seed(seed, i)));
  return out;
}

std::vector<IonizationRatePoint> spin_agnostic_ionization_rate_curve(
    const DefectParameters& params, double p_ex, double p_e12,
    const std::vector<double>& powers_1151) {
  LevelSystem system = LevelSystem::standard();
  std::vector<IonizationRatePoint> out;
  out.reserve(powers_1151.size());

  for (double q : powers_1151) {
    IonizationRatePoint pt;
    pt.power = q;
    LaserConfig lasers;
    lasers.p_resonant_ex = p_ex;
    lasers.p_resonant_e12 = p_e12;
    lasers.p_ionization_1151 = q;
    RateMatrix m = build_rate_matrix(system, params, lasers);

    // Spin-agnostic start: unpolarized neutral defect.
    PopulationVector p0;
    p0.p = {0.5, 0.0, 0.5, 0.0};

    auto neutral = [&](double t) {
      PopulationVector p = propagate(m, p0, t);
      return 1.0 - p.p[kIon];
    };

    // Find the 1/e-ish scale, then fit past the pumping transient.
    double t_scale = 0.0;
    double probe = 1e-9;
    for (int i = 0; i < 120; ++i) {
      if (neutral(probe) < 0.6) {
        t_scale = probe;
        break;
      }
      probe *= 2.0;
    }
    if (t_scale == 0.0) {
      out.push_back(pt);  // no measurable decay at this power
      continue;
    }
    double burn = 5.0 / (params.spontaneous_rate + 1.0);
    std::vector<double> ts, ys;
    for (int i = 0; i < 40; ++i) {
      double t = burn + (0.25 + 2.75 * i / 39.0) * t_scale;
      double s = neutral(t);
      if (s < 1e-6) break;
      ts.push_back(t);
      ys.push_back(s);
    }
    if (ts.size() < 5) {
      out.push_back(pt);
      continue;
    }
    FitResult fit = fit_exponential_decay(ts, ys);
    pt.fit_ok = fit.converged && fit.params[1] > 0.0;
    pt.rate = fit.params[1];
    out.push_back(pt);
  }
  return out;
}

}  // namespace scc
