#ifndef SCC_READOUT_HPP
#define SCC_READOUT_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "scc/montecarlo.hpp"
#include "scc/physics.hpp"

namespace scc {

enum class ShotClass { Dark, Bright };

// Per-shot photon-number distribution.
struct Histogram {
  std::map<long, std::uint64_t> bin_counts;
  std::uint64_t total_shots = 0;

  void add(long photon_count, std::uint64_t shots = 1);
  static Histogram from_shots(const std::vector<ShotResult>& shots);

  // Fraction of shots with count >= cutoff.
  double fraction_at_least(long cutoff) const;
  long max_count() const;
  double mean() const;
  double variance() const;
  void validate() const;
};

// CSV wire format: header "photon_count,shots", one bin per line.
void write_histogram_csv(std::ostream& os, const Histogram& h);
Histogram read_histogram_csv(std::istream& is);

struct FidelityReport {
  long cutoff = 0;
  double fidelity = 0.0;  // 1 - (p01 + p10)/2
  double p01 = 0.0;       // false positive: dark shot classified bright
  double p10 = 0.0;       // false negative: bright shot classified dark
  double ci_low = 0.0;    // bootstrap 68% interval on the fidelity
  double ci_high = 0.0;
};

// Threshold classification: bright iff count >= cutoff.
ShotClass classify(long photon_count, long cutoff);

// Classification fidelity of a bright/dark histogram pair at a fixed
// cutoff. The confidence interval comes from `resamples` seeded bootstrap
// resamples of both histograms (percentile method); resamples = 0 skips
// the bootstrap and pins the interval to the point estimate.
FidelityReport fidelity(const Histogram& bright, const Histogram& dark, long cutoff,
                        int resamples = 1000, std::uint64_t seed = 0x5ccf1de1u);

// Exhaustive cutoff scan over 0 .. max observed count + 1; ties break
// toward the smaller cutoff.
FidelityReport optimal_cutoff(const Histogram& bright, const Histogram& dark,
                              int resamples = 1000, std::uint64_t seed = 0x5ccf1de1u);

// Expected photons collected from a bright defect before it is lost,
// R(P) / Gamma_tot(P) with R the saturating detected rate and Gamma_tot
// the resonant two-photon ionization rate plus the dark decay 1/tau_ch.
double photons_per_shot(const DefectParameters& p, double p_res);

// Location and value of the photons_per_shot maximum (closed form).
struct PhotonYieldPeak {
  double power = 0.0;
  double photons = 0.0;
};
PhotonYieldPeak photons_per_shot_peak(const DefectParameters& p);

}  // namespace scc

#endif
