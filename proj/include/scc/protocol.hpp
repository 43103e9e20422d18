#ifndef SCC_PROTOCOL_HPP
#define SCC_PROTOCOL_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scc/dynamics.hpp"
#include "scc/montecarlo.hpp"
#include "scc/physics.hpp"
#include "scc/readout.hpp"

namespace scc {

enum class PulseKind {
  Repump705,
  ResonantEx,
  ResonantE12,
  Ionize1151,
  MwPi,
  MwPiHalf,
  Wait,
};

const char* pulse_kind_name(PulseKind kind);
PulseKind pulse_kind_from_name(const std::string& name);

// One control tone. Laser kinds carry power, microwave kinds phase.
struct Pulse {
  PulseKind kind = PulseKind::Wait;
  double power = 0.0;  // W, laser kinds only
  double phase = 0.0;  // rad, microwave kinds only

  void validate() const;
  bool is_laser() const;
  bool is_microwave() const;
};

// Simultaneously-on pulses sharing one duration.
struct PulseGroup {
  std::vector<Pulse> pulses;
  double duration = 0.0;
  bool readout = false;      // photon counting happens here
  bool spin_toggle = false;  // the optional preparation pi pulse lives here

  void validate() const;
};

struct PulseSequence {
  std::vector<PulseGroup> groups;

  void validate() const;  // at most one readout group, one toggle group
  std::optional<std::size_t> readout_group() const;
  std::optional<std::size_t> toggle_group() const;
};

// Protocol-level knobs that are not defect physics.
struct ProtocolSettings {
  double spin_init_fidelity = 1.0;  // E12 pumping compiled as a fixed-fidelity reset
};

// Lowers a pulse sequence onto a piecewise-constant rate-matrix schedule.
// Microwave pi pulses become ideal instantaneous population swaps with
// their nominal length spent as dark dead time; pi/2 pulses are dead time
// only (populations carry no phase). A group whose only content is E12
// light compiles to the fixed-fidelity spin reset. Throws on microwaves
// overlapping lasers or conflicting duplicate laser definitions.
Schedule compile(const PulseSequence& seq, const DefectParameters& params,
                 const ProtocolSettings& settings = {});

// Deterministic companion to simulate_shots: chains matrix exponentials
// and instantaneous operations across the schedule.
PopulationVector propagate_schedule(const Schedule& schedule, const PopulationVector& p0);

// As above, reporting the populations after every step.
std::vector<PopulationVector> propagate_schedule_trace(const Schedule& schedule,
                                                       const PopulationVector& p0);

enum class SweepField { GroupDuration, PulsePower };

struct SweepTarget {
  std::size_t group = 0;
  std::size_t pulse = 0;  // used by PulsePower
  SweepField field = SweepField::GroupDuration;
};

struct ExperimentSpec {
  std::string name;
  PulseSequence sequence;
  SweepTarget sweep;
  std::vector<double> sweep_values;  // strictly increasing
  long shots = 1000;
  std::uint64_t seed = 1;
  std::size_t start_state = kG0;
  ProtocolSettings settings;

  void validate() const;
  PulseSequence sequence_at(double sweep_value) const;
};

// Histograms for both spin preparations at one sweep point. The m_s=0
// branch replaces the toggle pi pulse by an equal-length wait.
struct SweepPoint {
  double sweep_value = 0.0;
  Histogram prep_ms0;
  Histogram prep_ms1;
};

// Runs the sweep for both preparations; shots are seeded per point and
// preparation, so results do not depend on execution order or threading.
std::vector<SweepPoint> run(const ExperimentSpec& spec, const DefectParameters& params,
                            int threads = 1);

enum class ContrastConvention { NormalizedMeans, BrightFraction };

struct ContrastCurve {
  std::vector<double> sweep_values;
  std::vector<double> signal_ms0;  // mean counts (or bright fraction) per point
  std::vector<double> signal_ms1;
  std::vector<double> contrast;   // in [-1, 1]
  ContrastConvention convention = ContrastConvention::NormalizedMeans;
};

// Contrast between the spin preparations. NormalizedMeans divides the
// mean-count difference by the m_s=-1 signal at the first sweep point;
// BrightFraction uses classified fractions at the given cutoff.
ContrastCurve contrast_curve(const std::vector<SweepPoint>& points,
                             ContrastConvention convention = ContrastConvention::NormalizedMeans,
                             long cutoff = 2);

// Per-point classification fidelity between the two preparations
// (m_s=-1 is the bright class), each at its own optimal cutoff.
std::vector<FidelityReport> scc_fidelity_curve(const std::vector<SweepPoint>& points,
                                               int resamples = 400,
                                               std::uint64_t seed = 0x5ccf1de1u);

// Fitted bright-population decay rate under simultaneous spin-agnostic
// drive (Ex + E12 + 1151), per ionization power. Deterministic (matrix
// exponential, not sampling); the fit covers the post-transient window.
struct IonizationRatePoint {
  double power = 0.0;  // W at 1151 nm
  double rate = 0.0;   // fitted exponential decay rate (Hz)
  bool fit_ok = false;
};

std::vector<IonizationRatePoint> spin_agnostic_ionization_rate_curve(
    const DefectParameters& params, double p_ex, double p_e12,
    const std::vector<double>& powers_1151);

}  // namespace scc

#endif
