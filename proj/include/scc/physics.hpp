#ifndef SCC_PHYSICS_HPP
#define SCC_PHYSICS_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace scc {

// Measured and assumed physical inputs for a single optically active
// defect. Rates in Hz, powers in W, durations in s, energies in eV.
// validate() enforces sign/energetics constraints; everything downstream
// assumes a validated set.
struct DefectParameters {
  double tau_charge = 6.9;                  // dark charge lifetime (s)
  double spin_flip_lifetime_sat = 3.3e-6;   // saturated optical spin-flip lifetime (s)
  double repump_slope = 9.93e8;             // 705 nm reset slope (Hz/W)
  double resonant_ion_slope = 1.06e7;       // high-power resonant two-photon slope (Hz/W)
  double resonant_sat_power = 1.6e-6;       // optical saturation power (W)
  double nir_ion_slope = 9.57e4;            // 1151 nm-only ionization slope (Hz/W)
  double excited_ion_slope = 4.0e7;         // excited-state ionization slope (Hz/W)
  double stim_emission_slope = 1.33e7;      // stimulated-emission slope (Hz/W)
  double spontaneous_rate = 1.0e6;          // effective excited-state decay (Hz)
  double detected_rate_sat = 5.0e3;         // detected photon rate at saturation (Hz)
  double background_rate = 65.0;            // detector dark counts (Hz)
  double zpl_energy = 1.096;                // resonant photon energy (eV)
  double ion_photon_energy = 1.077;         // ionization photon energy (eV)
  double charge_transition_energy = 2.09;   // neutral -> negative transition (eV)

  // Model knobs not pinned by measurement; see shipped parameter file.
  double leak_beta = 700.0;         // non-spin-selective leak multiplier
  double leak_power_scale = 0.071;  // ionization power where leak_beta applies (W)
  double dark_bright_fraction = 0.0;  // equilibrium bright fraction of the dark exchange
  double mw_exchange_rate = 2.5e5;    // ground-state exchange rate under CW microwaves (Hz)

  // Throws std::invalid_argument describing the first violated constraint.
  void validate() const;

  // Ratio of excited-state ionization to stimulated emission; the figure
  // of merit that caps conversion fidelity.
  double cross_section_ratio() const { return excited_ion_slope / stim_emission_slope; }

  // Spin-flip branch rate out of the excited state, normalized so the
  // bright-state population decays with the measured saturated lifetime
  // under fully saturated resonant drive (slow eigenvalue of the pumped
  // two-level sector equals 1/spin_flip_lifetime_sat).
  double flip_rate_excited() const;
};

// Core level labels. G0/G1: neutral ground m_s=0 / m_s=-1, E0: neutral
// excited state reached from G0, ION: dark charge state.
enum CoreState : std::size_t { kG0 = 0, kE0 = 1, kG1 = 2, kIon = 3 };

// Ordered, labeled state set. The four core states are required for SCC
// work; extra states may be appended (they get no built-in channels).
class LevelSystem {
 public:
  // Standard four-state system used by every preset.
  static LevelSystem standard();

  // Custom label set; validates uniqueness and core-state presence.
  LevelSystem(std::vector<std::string> labels, std::size_t emitting_index);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t emitting_index() const { return emitting_index_; }
  std::size_t index_of(const std::string& label) const;

 private:
  std::vector<std::string> labels_;
  std::size_t emitting_index_;
};

// Laser/microwave configuration of one pulse-sequence segment.
struct LaserConfig {
  double p_resonant_ex = 0.0;    // W, drives G0 -> E0
  double p_resonant_e12 = 0.0;   // W, drives the m_s=+-1 sector
  double p_ionization_1151 = 0.0;  // W
  double p_repump_705 = 0.0;       // W
  bool mw_on = false;

  void validate() const;
  bool all_lasers_off() const {
    return p_resonant_ex == 0.0 && p_resonant_e12 == 0.0 &&
           p_ionization_1151 == 0.0 && p_repump_705 == 0.0;
  }
  double resonant_total() const { return p_resonant_ex + p_resonant_e12; }
};

// Generator matrix of the continuous-time Markov level dynamics.
// entry(i, j) is the j -> i rate for i != j; diagonal entries are minus
// the column sums, so every column sums to zero.
class RateMatrix {
 public:
  explicit RateMatrix(std::size_t dim);

  std::size_t dim() const { return dim_; }
  double entry(std::size_t i, std::size_t j) const { return m_[i * dim_ + j]; }

  // Adds rate to the from -> to channel and fixes the diagonal.
  void add_rate(std::size_t from, std::size_t to, double rate);

  // Total exit rate out of a state (positive number).
  double exit_rate(std::size_t state) const { return -entry(state, state); }

  // Largest absolute column-sum deviation relative to the largest rate.
  double generator_defect() const;

  // Throws std::invalid_argument if off-diagonals are negative or the
  // columns do not sum to zero within tolerance.
  void validate() const;

  const std::vector<double>& data() const { return m_; }

 private:
  std::size_t dim_;
  std::vector<double> m_;
};

// Power-to-rate laws fitted from the charge-control measurements.
// All four are zero at zero power and monotone nondecreasing.
double repump_rate(const DefectParameters& p, double p705);
double resonant_ionization_rate(const DefectParameters& p, double p_res);
double nir_ionization_rate(const DefectParameters& p, double p1151);
double stimulated_emission_rate(const DefectParameters& p, double p1151);

// Saturation factor P / (P + P_sat) of the resonant optical transition.
double saturation_factor(const DefectParameters& p, double p_res);

// Assembles the generator for a laser configuration.
//
// Channels (four-state core):
//   G0->E0   saturable pumping  W = Gamma_sp * s(P_res)
//   E0->G0   spontaneous + stimulated decay
//   E0->G1   spin flip (flip_rate_excited)
//   E0->ION  excited-state ionization  excited_ion_slope * p1151
//   G0,E0->ION  nir leak + resonant two-photon loss (Ex-driven sector)
//   G1->ION  nir leak + resonant two-photon loss (when E12-driven) +
//            non-spin-selective leak (beta term, scales with the 1151
//            beam) + folded E12-sector two-photon ionization
//   G1->G0   folded E12-sector spin pumping (ISC branch)
//   ION->G0/G1  repump, split evenly (reset does not polarize spin)
//   G0/G1/E0 -> ION  dark charge exchange, only with all lasers off
//   G0<->G1  microwave exchange when mw_on
//
// The E12 sector has no explicit excited state; its two-photon channels
// are folded through the quasi-steady occupancy of the untracked excited
// manifold, which makes the two spin sectors behave symmetrically under
// spin-agnostic drive while keeping the core dimension at four.
RateMatrix build_rate_matrix(const LevelSystem& system, const DefectParameters& p,
                             const LaserConfig& lasers);

// Detected-photon emission rate for a state under a laser configuration
// (background excluded). Nonzero for the neutral readout sector: G0/E0
// whenever the resonant drive is on, G1 only under E12 drive.
double emission_rate(const DefectParameters& p, const LaserConfig& lasers,
                     std::size_t state);

}  // namespace scc

#endif
