#include "doctest.h"

#include <cmath>
#include <sstream>

#include "scc/config.hpp"
#include "scc/readout.hpp"
#include "scc/rng.hpp"
#include "scc/units.hpp"

using namespace scc;
using namespace scc::units;

namespace {

DefectParameters defaults() {
  return load_defect_parameters(SCCSIM_DATA_DIR "/divacancy_defaults.json");
}

// Histogram with `above` of `total` shots at or above the cutoff value 10.
Histogram split_hist(std::uint64_t total, std::uint64_t above) {
  Histogram h;
  if (total > above) h.add(0, total - above);
  if (above > 0) h.add(10, above);
  return h;
}

Histogram poisson_hist(double mean, long shots, std::uint64_t seed) {
  Histogram h;
  Rng rng(seed);
  for (long k = 0; k < shots; ++k) h.add(rng.poisson(mean));
  return h;
}

}  // namespace

TEST_CASE("classify thresholds at count >= cutoff") {
  CHECK(classify(0, 4) == ShotClass::Dark);
  CHECK(classify(3, 4) == ShotClass::Dark);
  CHECK(classify(4, 4) == ShotClass::Bright);
  CHECK(classify(100, 4) == ShotClass::Bright);
}

TEST_CASE("fidelity algebra reproduces both published operating points") {
  // p01 = 1.17%, p10 = 1.26% -> F = 98.785%
  Histogram dark = split_hist(10000, 117);
  Histogram bright = split_hist(10000, 10000 - 126);
  FidelityReport r = fidelity(bright, dark, 10, 0);
  CHECK(r.p01 == doctest::Approx(0.0117).epsilon(1e-12));
  CHECK(r.p10 == doctest::Approx(0.0126).epsilon(1e-12));
  CHECK(r.fidelity == doctest::Approx(0.98785).epsilon(1e-12));
  CHECK(r.fidelity == 1.0 - 0.5 * (r.p01 + r.p10));

  // p01 = 27%, p10 = 11% -> F = 81.0%
  Histogram dark2 = split_hist(10000, 2700);
  Histogram bright2 = split_hist(10000, 10000 - 1100);
  FidelityReport r2 = fidelity(bright2, dark2, 10, 0);
  CHECK(r2.fidelity == doctest::Approx(0.810).epsilon(1e-12));
}

TEST_CASE("identical histograms give fidelity one half at every cutoff") {
  Histogram h = poisson_hist(5.0, 4000, 9);
  for (long cut : {0L, 2L, 5L, 9L, 30L}) {
    FidelityReport r = fidelity(h, h, cut, 0);
    CHECK(r.fidelity == doctest::Approx(0.5).epsilon(1e-12));
  }
  FidelityReport best = optimal_cutoff(h, h, 0);
  CHECK(best.fidelity == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(best.cutoff == 0);  // ties break toward the smaller cutoff
}

TEST_CASE("disjoint-support histograms: perfect fidelity at the smallest separating cutoff") {
  Histogram dark;
  dark.add(0, 50);
  dark.add(2, 50);
  Histogram bright;
  bright.add(7, 60);
  bright.add(9, 40);
  FidelityReport r = optimal_cutoff(bright, dark, 0);
  CHECK(r.fidelity == doctest::Approx(1.0));
  CHECK(r.cutoff == 3);
}

TEST_CASE("optimal cutoff beats every other cutoff (scan is its own oracle)") {
  Histogram bright = poisson_hist(30.0, 6000, 21);
  Histogram dark = poisson_hist(1.3, 6000, 22);
  FidelityReport best = optimal_cutoff(bright, dark, 0);
  long top = std::max(bright.max_count(), dark.max_count()) + 1;
  for (long cut = 0; cut <= top; ++cut) {
    FidelityReport r = fidelity(bright, dark, cut, 0);
    CHECK(best.fidelity >= r.fidelity - 1e-15);
  }
}

TEST_CASE("reference-shaped SCC histograms prefer a cutoff of 2") {
  // Bright branch: surviving neutral state at a low mean plus a dark
  // failure component; dark branch: sub-photon mean with an incomplete
  // conversion tail. Mixture weights follow the reported error rates.
  Rng rng(31);
  Histogram bright, dark;
  for (long k = 0; k < 50000; ++k) {
    bright.add(rng.bernoulli(0.11) ? rng.poisson(0.3) : rng.poisson(5.5));
    dark.add(rng.bernoulli(0.24) ? rng.poisson(5.5) : rng.poisson(0.3));
  }
  FidelityReport r = optimal_cutoff(bright, dark, 0);
  CHECK(r.cutoff == 2);
  CHECK(r.fidelity == doctest::Approx(0.804).epsilon(0.02));
}

TEST_CASE("fidelity is invariant under uniform rescaling of the histograms") {
  Histogram bright = poisson_hist(25.0, 3000, 51);
  Histogram dark = poisson_hist(1.0, 3000, 52);
  Histogram bright10 = bright, dark10 = dark;
  for (auto& [count, shots] : bright10.bin_counts) shots *= 10;
  bright10.total_shots *= 10;
  for (auto& [count, shots] : dark10.bin_counts) shots *= 10;
  dark10.total_shots *= 10;
  FidelityReport a = fidelity(bright, dark, 4, 0);
  FidelityReport b = fidelity(bright10, dark10, 4, 0);
  CHECK(a.fidelity == doctest::Approx(b.fidelity).epsilon(1e-12));
}

TEST_CASE("bootstrap interval brackets the point estimate and is seeded") {
  Histogram bright = poisson_hist(30.0, 4000, 61);
  Histogram dark = poisson_hist(1.3, 4000, 62);
  FidelityReport a = fidelity(bright, dark, 4, 800, 99);
  FidelityReport b = fidelity(bright, dark, 4, 800, 99);
  CHECK(a.ci_low == b.ci_low);
  CHECK(a.ci_high == b.ci_high);
  CHECK(a.ci_low <= a.fidelity);
  CHECK(a.ci_high >= a.fidelity);
  CHECK(a.ci_high - a.ci_low > 0.0);
  CHECK(a.ci_high - a.ci_low < 0.05);
}

TEST_CASE("empty histograms are rejected") {
  Histogram empty;
  Histogram ok = split_hist(10, 5);
  CHECK_THROWS_AS(fidelity(ok, empty, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(optimal_cutoff(empty, ok, 0), std::invalid_argument);
}

TEST_CASE("photons per shot: published peak, limits, and unimodality") {
  DefectParameters p = defaults();
  PhotonYieldPeak peak = photons_per_shot_peak(p);
  CHECK(std::abs(peak.photons - 1529.0) <= 117.0);

  // Model limits: vanishing yield at both extremes.
  CHECK(photons_per_shot(p, 1e-12) < 1.0);
  CHECK(photons_per_shot(p, 10.0) < 50.0);
  CHECK_THROWS_AS(photons_per_shot(p, 0.0), std::invalid_argument);

  // Unimodal over a wide grid.
  int peaks = 0;
  double prev = photons_per_shot(p, 1e-9);
  bool rising = true;
  for (double pw = 1.2e-9; pw < 1.0; pw *= 1.08) {
    double v = photons_per_shot(p, pw);
    if (rising && v < prev) {
      rising = false;
      ++peaks;
    } else if (!rising) {
      CHECK(v <= prev * (1.0 + 1e-12));
    }
    prev = v;
  }
  CHECK(peaks == 1);
}

TEST_CASE("photons per shot agrees with the survival-integral quadrature oracle") {
  DefectParameters p = defaults();
  for (double pw : {0.05 * uW, 0.148 * uW, 1.0 * uW, 4.05 * uW, 20.0 * uW}) {
    // Independent oracle: integrate R(P) e^{-Gamma_tot t} dt by Simpson.
    double rate = p.detected_rate_sat * pw / (pw + p.resonant_sat_power);
    double loss = resonant_ionization_rate(p, pw) + 1.0 / p.tau_charge;
    double t_max = 40.0 / loss;
    int n = 20000;
    double h = t_max / n;
    double integral = 0.0;
    for (int i = 0; i <= n; ++i) {
      double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      integral += w * rate * std::exp(-loss * i * h);
    }
    integral *= h / 3.0;
    CHECK(photons_per_shot(p, pw) == doctest::Approx(integral).epsilon(0.005));
  }
}

TEST_CASE("histogram CSV round trip") {
  Histogram h = poisson_hist(8.0, 2000, 71);
  std::stringstream ss;
  write_histogram_csv(ss, h);
  Histogram back = read_histogram_csv(ss);
  CHECK(back.total_shots == h.total_shots);
  CHECK(back.bin_counts == h.bin_counts);
}

TEST_CASE("histogram statistics and validation") {
  Histogram h;
  h.add(2, 3);
  h.add(4, 1);
  CHECK(h.total_shots == 4);
  CHECK(h.mean() == doctest::Approx(2.5));
  CHECK(h.fraction_at_least(3) == doctest::Approx(0.25));
  CHECK(h.max_count() == 4);
  CHECK_NOTHROW(h.validate());
  CHECK_THROWS_AS(h.add(-1), std::invalid_argument);
}
