#include "scc/readout.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "scc/rng.hpp"

namespace scc {

void Histogram::add(long photon_count, std::uint64_t shots) {
  if (photon_count < 0) throw std::invalid_argument("photon counts must be >= 0");
  bin_counts[photon_count] += shots;
  total_shots += shots;
}

Histogram Histogram::from_shots(const std::vector<ShotResult>& shots) {
  Histogram h;
  for (const auto& s : shots) h.add(s.photon_count);
  return h;
}

double Histogram::fraction_at_least(long cutoff) const {
  if (total_shots == 0) throw std::invalid_argument("histogram is empty");
  std::uint64_t above = 0;
  for (const auto& [count, shots] : bin_counts)
    if (count >= cutoff) above += shots;
  return static_cast<double>(above) / static_cast<double>(total_shots);
}

long Histogram::max_count() const {
  if (bin_counts.empty()) throw std::invalid_argument("histogram is empty");
  return bin_counts.rbegin()->first;
}

double Histogram::mean() const {
  if (total_shots == 0) throw std::invalid_argument("histogram is empty");
  double sum = 0.0;
  for (const auto& [count, shots] : bin_counts)
    sum += static_cast<double>(count) * static_cast<double>(shots);
  return sum / static_cast<double>(total_shots);
}

double Histogram::variance() const {
  double mu = mean();
  double sum = 0.0;
  for (const auto& [count, shots] : bin_counts) {
    double d = static_cast<double>(count) - mu;
    sum += d * d * static_cast<double>(shots);
  }
  return sum / static_cast<double>(total_shots);
}

void Histogram::validate() const {
  std::uint64_t sum = 0;
  for (const auto& [count, shots] : bin_counts) {
    if (count < 0) throw std::invalid_argument("histogram keys must be >= 0");
    sum += shots;
  }
  if (sum != total_shots)
    throw std::invalid_argument("histogram bin counts must sum to total_shots");
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "photon_count,shots\n";
  for (const auto& [count, shots] : h.bin_counts) os << count << "," << shots << "\n";
}

Histogram read_histogram_csv(std::istream& is) {
  Histogram h;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (first && line.rfind("photon_count", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b))
      throw std::runtime_error("malformed histogram line: " + line);
    h.add(std::stol(a), std::stoull(b));
  }
  return h;
}

ShotClass classify(long photon_count, long cutoff) {
  return photon_count >= cutoff ? ShotClass::Bright : ShotClass::Dark;
}

namespace {

double point_fidelity(double p01, double p10) { return 1.0 - 0.5 * (p01 + p10); }

}  // namespace

FidelityReport fidelity(const Histogram& bright, const Histogram& dark, long cutoff,
                        int resamples, std::uint64_t seed) {
  if (bright.total_shots == 0 || dark.total_shots == 0)
    throw std::invalid_argument("histograms must be nonempty");

  FidelityReport r;
  r.cutoff = cutoff;
  r.p01 = dark.fraction_at_least(cutoff);
  r.p10 = 1.0 - bright.fraction_at_least(cutoff);
  r.fidelity = point_fidelity(r.p01, r.p10);
  r.ci_low = r.ci_high = r.fidelity;
  if (resamples <= 0) return r;

  // Resampling shots and recomputing a tail fraction is a binomial draw,
  // so the bootstrap only needs two binomials per resample. The cutoff
  // stays fixed at the reported one.
  Rng rng(seed);
  std::vector<double> f(static_cast<std::size_t>(resamples));
  long nb = static_cast<long>(bright.total_shots);
  long nd = static_cast<long>(dark.total_shots);
  for (int k = 0; k < resamples; ++k) {
    double p01 = static_cast<double>(rng.binomial(nd, r.p01)) / static_cast<double>(nd);
    double p10 = static_cast<double>(rng.binomial(nb, r.p10)) / static_cast<double>(nb);
    f[static_cast<std::size_t>(k)] = point_fidelity(p01, p10);
  }
  std::sort(f.begin(), f.end());
  auto percentile = [&](double q) {
    double pos = q * (static_cast<double>(f.size()) - 1.0);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, f.size() - 1);
    double w = pos - static_cast<double>(lo);
    return (1.0 - w) * f[lo] + w * f[hi];
  };
  r.ci_low = std::min(percentile(0.16), r.fidelity);
  r.ci_high = std::max(percentile(0.84), r.fidelity);
  return r;
}

FidelityReport optimal_cutoff(const Histogram& bright, const Histogram& dark,
                              int resamples, std::uint64_t seed) {
  if (bright.total_shots == 0 || dark.total_shots == 0)
    throw std::invalid_argument("histograms must be nonempty");

  long top = std::max(bright.max_count(), dark.max_count()) + 1;
  long best_cutoff = 0;
  double best_f = -1.0;
  for (long cut = 0; cut <= top; ++cut) {
    double p01 = dark.fraction_at_least(cut);
    double p10 = 1.0 - bright.fraction_at_least(cut);
    double f = point_fidelity(p01, p10);
    if (f > best_f) {  // strict: ties keep the smaller cutoff
      best_f = f;
      best_cutoff = cut;
    }
  }
  return fidelity(bright, dark, best_cutoff, resamples, seed);
}

double photons_per_shot(const DefectParameters& p, double p_res) {
  if (p_res <= 0.0) throw std::invalid_argument("power must be > 0");
  double rate = p.detected_rate_sat * saturation_factor(p, p_res);
  double loss = resonant_ionization_rate(p, p_res) + 1.0 / p.tau_charge;
  return rate / loss;
}

PhotonYieldPeak photons_per_shot_peak(const DefectParameters& p) {
  // d/dP of R/Gamma vanishes at P* = sqrt(P_sat / (k tau_ch)) with k the
  // asymptotic two-photon slope.
  PhotonYieldPeak peak;
  if (p.resonant_ion_slope <= 0.0) {
    peak.power = std::numeric_limits<double>::infinity();
    peak.photons = p.detected_rate_sat * p.tau_charge;
    return peak;
  }
  peak.power = std::sqrt(p.resonant_sat_power / (p.resonant_ion_slope * p.tau_charge));
  peak.photons = photons_per_shot(p, peak.power);
  return peak;
}

}  // namespace scc
