#ifndef SCC_COHERENCE_HPP
#define SCC_COHERENCE_HPP

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace scc {

enum class SequenceStyle { CPMG, XY8 };

// Multipulse decoupling sequence: N ideal pi pulses inside [0, t_total].
// CPMG timing throughout (tau/2, tau, ..., tau, tau/2); XY8 only differs
// in the phase pattern, which matters for hardware export, not for the
// ideal-pulse envelopes computed here.
struct DDSequence {
  SequenceStyle style = SequenceStyle::CPMG;
  int n_pulses = 0;
  double t_total = 0.0;
  std::vector<double> pulse_times;
  std::vector<double> phases;        // rad
  bool beyond_soft_limit = false;    // N exceeded the supported pulse budget

  void validate() const;
};

// Pulse count soft limit; sequences beyond it are flagged, not rejected.
inline constexpr int kPulseSoftLimit = 16384;

// CPMG/XY8 sequence with optional spacing quantization: when
// spacing_quantum is given, the inter-pulse spacing is rounded to the
// nearest integer multiple (ESEEM avoidance) and t_total adjusts to
// N * spacing. Throws if t_total is too short to honor the quantum.
DDSequence generate_sequence(SequenceStyle style, int n_pulses, double t_total,
                             std::optional<double> spacing_quantum = std::nullopt);

// Parametric dephasing-noise spectrum: sum of white, Lorentzian, and
// power-law components, all nonnegative.
struct SpectralComponent {
  enum class Kind { White, Lorentzian, PowerLaw };
  Kind kind = Kind::White;
  double amplitude = 0.0;   // S(0) for white/lorentzian; S(omega_ref) for power law
  double corr_time = 0.0;   // Lorentzian correlation time (s)
  double center = 0.0;      // Lorentzian center frequency (rad/s)
  double exponent = 0.0;    // power-law rolloff S ~ omega^-exponent
  double omega_ref = 1.0;   // power-law reference frequency (rad/s)
  double omega_min = 1e-3;  // power law is clamped flat below this (rad/s)
  double omega_cutoff = std::numeric_limits<double>::infinity();  // hard cutoff

  double value(double omega) const;
};

struct NoiseSpectrum {
  std::vector<SpectralComponent> components;

  static NoiseSpectrum white(double s0);
  static NoiseSpectrum lorentzian(double s0, double corr_time, double center = 0.0,
                                  double cutoff = std::numeric_limits<double>::infinity());
  static NoiseSpectrum power_law(double s_ref, double exponent, double omega_min,
                                 double omega_ref = 1.0,
                                 double cutoff = std::numeric_limits<double>::infinity());
  NoiseSpectrum& add(const NoiseSpectrum& other);

  double value(double omega) const;
  // Characteristic frequencies (cutoffs, centers, knees) the quadrature
  // must resolve.
  std::vector<double> scales() const;
  void validate() const;
};

// Coherence decay exponent
//   chi(t) = (2/pi) * Int_0^inf S(w) F(w, t) / w^2 dw
// with F = (w^2/2) |y~(w)|^2 the modulation filter of the sign-toggling
// function. Normalization fixed by the white-noise identity chi = S0 t
// for every pulse pattern. Resonance-aware panel quadrature, relative
// tolerance ~1e-6.
double decoherence_exponent(const DDSequence& seq, const NoiseSpectrum& spectrum);

// Filter function F(w, t) of a sequence, exposed for tests.
double filter_function(const DDSequence& seq, double omega);

struct StretchedFit {
  double amplitude = 0.0, t2 = 0.0, stretch = 0.0;
  double amplitude_err = 0.0, t2_err = 0.0, stretch_err = 0.0;
  bool converged = false;
  bool degenerate = false;  // no resolvable decay in the input
};

struct CoherenceCurve {
  std::vector<double> times;
  std::vector<double> coherence;
  int n_pulses = 0;
  std::optional<StretchedFit> fit;
};

// C(t) = exp(-chi(t)) over a time grid at fixed pulse number; the
// sequence is regenerated (CPMG timing) for every grid point.
CoherenceCurve coherence_envelope(SequenceStyle style, int n_pulses,
                                  const std::vector<double>& times,
                                  const NoiseSpectrum& spectrum);

// Decoupled coherence time: solves chi(t) = 1 by bisection.
double coherence_time(SequenceStyle style, int n_pulses, const NoiseSpectrum& spectrum);

// Stretched-exponential fit A exp(-(t/tau)^n) with 1-sigma errors from
// the fit covariance. Requires >= 4 samples; flags degenerate inputs.
StretchedFit fit_stretched(const std::vector<double>& times,
                           const std::vector<double>& values,
                           const std::vector<double>& sigma = {});

struct ScalingFit {
  double breakpoint = 0.0;  // pulse number separating the regimes
  double psi_low = 0.0, psi_low_err = 0.0;
  double psi_high = 0.0, psi_high_err = 0.0;
  double prefactor_low = 0.0, prefactor_high = 0.0;
  bool single_regime = false;
};

// Two-regime power-law fit T2 ~ N^psi in log-log space; the breakpoint
// minimizes the total squared residual over all interior splits with at
// least three points per side.
ScalingFit fit_scaling(const std::vector<double>& n_pulses, const std::vector<double>& t2,
                       const std::vector<double>& t2_sigma = {});

struct T1Bound {
  double bound = 0.0;       // smallest T1 not rejected (s)
  double confidence = 0.0;  // e.g. 0.95
  std::vector<double> t1_grid;
  std::vector<double> chi_square;  // trace over the grid
  double critical_value = 0.0;
  int dof = 0;
  bool all_rejected = false;
};

struct T1BoundOptions {
  bool fit_offset = false;  // also fit the baseline B (see README caveat)
  double offset = 0.0;      // fixed baseline when fit_offset is false
  std::vector<double> t1_grid;  // optional explicit candidate grid
};

// Chi-square goodness-of-fit scan for the relaxation model
// A exp(-t/T1) + B. For each candidate T1 the linear parameters are
// fitted exactly (weighted); the bound is the smallest T1 whose chi^2
// stays below the critical value at the requested confidence, with
// dof = points - linear parameters.
T1Bound t1_lower_bound(const std::vector<double>& delays, const std::vector<double>& signals,
                       const std::vector<double>& errors, double confidence,
                       const T1BoundOptions& options = {});

// Standard two-branch normalization (final pi/2 phase inverted):
// C = (plus - minus) / (plus + minus), element-wise.
std::vector<double> normalize_two_branch(const std::vector<double>& plus,
                                         const std::vector<double>& minus);

}  // namespace scc

#endif
