#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "scc/coherence.hpp"
#include "scc/rng.hpp"

using namespace scc;

TEST_CASE("CPMG timing: Hahn echo and quantized spacing") {
  DDSequence hahn = generate_sequence(SequenceStyle::CPMG, 1, 2.0e-3);
  REQUIRE(hahn.pulse_times.size() == 1);
  CHECK(hahn.pulse_times[0] == doctest::Approx(1.0e-3));

  DDSequence cpmg = generate_sequence(SequenceStyle::CPMG, 4, 8.0e-3);
  std::vector<double> expect = {1e-3, 3e-3, 5e-3, 7e-3};
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(cpmg.pulse_times[i] == doctest::Approx(expect[i]));

  // Spacing quantization: all spacings integer multiples of the quantum.
  double q = 13.7e-6;
  DDSequence snapped = generate_sequence(SequenceStyle::CPMG, 16, 1.0e-3, q);
  double tau = snapped.t_total / 16;
  CHECK(std::abs(tau / q - std::round(tau / q)) < 1e-9);
  for (int k = 1; k < 16; ++k) {
    double spacing = snapped.pulse_times[static_cast<std::size_t>(k)] -
                     snapped.pulse_times[static_cast<std::size_t>(k - 1)];
    CHECK(std::abs(spacing / q - std::round(spacing / q)) < 1e-9);
  }
  CHECK_THROWS_AS(generate_sequence(SequenceStyle::CPMG, 16, 1.0e-6, 1.0e-3),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_sequence(SequenceStyle::CPMG, 0, 1.0), std::invalid_argument);
}

TEST_CASE("XY8 phase pattern repeats the standard eight-pulse block") {
  DDSequence seq = generate_sequence(SequenceStyle::XY8, 16, 1.0);
  const double x = 0.0, y = M_PI / 2;
  std::vector<double> block = {x, y, x, y, y, x, y, x};
  for (int k = 0; k < 16; ++k)
    CHECK(seq.phases[static_cast<std::size_t>(k)] ==
          doctest::Approx(block[static_cast<std::size_t>(k % 8)]));
}

TEST_CASE("pulse budget soft limit flags but does not reject") {
  DDSequence big = generate_sequence(SequenceStyle::CPMG, 20000, 1.0);
  CHECK(big.beyond_soft_limit);
  DDSequence ok = generate_sequence(SequenceStyle::CPMG, 16384, 1.0);
  CHECK_FALSE(ok.beyond_soft_limit);
}

TEST_CASE("zero spectrum gives unit coherence") {
  NoiseSpectrum silent = NoiseSpectrum::white(0.0);
  DDSequence seq = generate_sequence(SequenceStyle::CPMG, 8, 0.1);
  CHECK(decoherence_exponent(seq, silent) == 0.0);
  CoherenceCurve curve = coherence_envelope(SequenceStyle::CPMG, 8, {0.01, 0.1, 1.0}, silent);
  for (double c : curve.coherence) CHECK(c == doctest::Approx(1.0));
}

TEST_CASE("white noise: chi = S0 t for every pulse number (psi = 0)") {
  NoiseSpectrum white = NoiseSpectrum::white(25.0);
  for (int n : {0, 1, 3, 16, 128, 2048}) {
    DDSequence seq = n == 0 ? DDSequence{SequenceStyle::CPMG, 0, 0.017, {}, {}, false}
                            : generate_sequence(SequenceStyle::CPMG, n, 0.017);
    CHECK(decoherence_exponent(seq, white) ==
          doctest::Approx(25.0 * 0.017).epsilon(2e-3));
  }
}

TEST_CASE("Ramsey limit reproduces the analytic Lorentzian overlap") {
  // With S = s0 / (1 + (w tc)^2):
  //   chi(t) = s0 [ t - tc (1 - e^{-t/tc}) ]
  // follows from the standard sinc^2 integral; checked against an
  // independent quadrature in spirit by using the closed form here.
  double s0 = 4.0, tc = 0.3;
  NoiseSpectrum lor = NoiseSpectrum::lorentzian(s0, tc);
  for (double t : {0.05, 0.3, 1.1, 4.0}) {
    DDSequence ramsey{SequenceStyle::CPMG, 0, t, {}, {}, false};
    double expected = s0 * (t - tc * (1.0 - std::exp(-t / tc)));
    CHECK(decoherence_exponent(ramsey, lor) == doctest::Approx(expected).epsilon(2e-3));
  }
}

TEST_CASE("narrowband noise: decoupling passband locks onto the line") {
  // Noise concentrated at w0; chi is maximal when pi N / t matches w0.
  // Scan pulse numbers whose fundamental passband crosses the line (the
  // sequence harmonics of much smaller N can also pick it up, so the scan
  // stays local).
  double w0 = 3000.0;
  NoiseSpectrum line = NoiseSpectrum::lorentzian(1.0, 0.8, w0);
  double t = 0.05;  // resonance at N = w0 t / pi ~ 47.7
  double best_chi = -1.0;
  int best_n = 0;
  for (int n : {40, 44, 48, 52, 56}) {
    double chi = decoherence_exponent(generate_sequence(SequenceStyle::CPMG, n, t), line);
    if (chi > best_chi) {
      best_chi = chi;
      best_n = n;
    }
  }
  CHECK(best_n == 48);
}

TEST_CASE("coherence envelope is non-increasing for monotone spectra") {
  NoiseSpectrum lor = NoiseSpectrum::lorentzian(3.0e3, 0.5);
  CoherenceCurve curve = coherence_envelope(
      SequenceStyle::CPMG, 32, {0.01, 0.03, 0.1, 0.3, 1.0, 3.0}, lor);
  for (std::size_t i = 1; i < curve.coherence.size(); ++i)
    CHECK(curve.coherence[i] <= curve.coherence[i - 1] + 1e-12);
  for (double c : curve.coherence) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("slow Lorentzian bath: T2 scaling exponent near 2/3") {
  NoiseSpectrum lor = NoiseSpectrum::lorentzian(2.0e4, 1.0);
  std::vector<double> ns, t2s;
  for (int n : {16, 64, 256, 1024}) {
    ns.push_back(n);
    t2s.push_back(coherence_time(SequenceStyle::CPMG, n, lor));
  }
  double psi = std::log(t2s.back() / t2s.front()) / std::log(ns.back() / ns.front());
  CHECK(psi > 0.60);
  CHECK(psi < 0.72);
}

TEST_CASE("stretched-exponential fit recovers synthetic parameters") {
  Rng rng(404);
  double A = 1.0, t2 = 5.3, stretch = 1.5;
  std::vector<double> ts, ys, sigma;
  for (int i = 0; i < 28; ++i) {
    double t = 0.3 + (2.2 * 5.3 - 0.3) * i / 27.0;
    ts.push_back(t);
    ys.push_back(A * std::exp(-std::pow(t / t2, stretch)) + 0.01 * rng.gaussian());
    sigma.push_back(0.01);
  }
  StretchedFit fit = fit_stretched(ts, ys, sigma);
  CHECK(fit.converged);
  CHECK_FALSE(fit.degenerate);
  CHECK(std::abs(fit.amplitude - A) < 3.0 * fit.amplitude_err);
  CHECK(std::abs(fit.t2 - t2) < 3.0 * fit.t2_err);
  CHECK(std::abs(fit.stretch - stretch) < 3.0 * fit.stretch_err);
}

TEST_CASE("pure exponential input fits with stretch near one") {
  std::vector<double> ts, ys;
  for (int i = 0; i < 24; ++i) {
    double t = 0.1 + i * 0.35;
    ts.push_back(t);
    ys.push_back(std::exp(-t / 2.0));
  }
  StretchedFit fit = fit_stretched(ts, ys);
  CHECK(fit.converged);
  CHECK(fit.stretch == doctest::Approx(1.0).epsilon(0.02));
  CHECK(fit.t2 == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("constant input is flagged degenerate") {
  std::vector<double> ts = {1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> ys = {0.8, 0.8, 0.8, 0.8, 0.8};
  StretchedFit fit = fit_stretched(ts, ys);
  CHECK(fit.degenerate);
  CHECK_THROWS_AS(fit_stretched({1.0, 2.0, 3.0}, {1.0, 0.5, 0.2}), std::invalid_argument);
}

TEST_CASE("fit regeneration reproduces the input within the residual norm") {
  NoiseSpectrum lor = NoiseSpectrum::lorentzian(2.0e4, 1.0);
  double t2 = coherence_time(SequenceStyle::CPMG, 64, lor);
  std::vector<double> ts;
  for (int i = 0; i < 20; ++i) ts.push_back((0.2 + 2.4 * i / 19.0) * t2);
  CoherenceCurve curve = coherence_envelope(SequenceStyle::CPMG, 64, ts, lor);
  StretchedFit fit = fit_stretched(curve.times, curve.coherence);
  REQUIRE(fit.converged);
  double rms = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double model = fit.amplitude * std::exp(-std::pow(ts[i] / fit.t2, fit.stretch));
    rms += (model - curve.coherence[i]) * (model - curve.coherence[i]);
  }
  rms = std::sqrt(rms / ts.size());
  CHECK(rms < 0.02);  // stretched exponential describes the envelope well
}

TEST_CASE("two-regime scaling fit recovers synthetic exponents") {
  Rng rng(606);
  std::vector<double> ns, t2s;
  double nstar = 128.0, c1 = 2.0e-3;
  double c2 = c1 * std::pow(nstar, 0.92 - 0.75);
  for (double n = 1; n <= 16384; n *= 2) {
    double t2 = n < nstar ? c1 * std::pow(n, 0.92) : c2 * std::pow(n, 0.75);
    ns.push_back(n);
    t2s.push_back(t2 * (1.0 + 0.02 * rng.gaussian()));
  }
  ScalingFit fit = fit_scaling(ns, t2s);
  CHECK_FALSE(fit.single_regime);
  CHECK(std::abs(fit.psi_low - 0.92) < 3.0 * fit.psi_low_err);
  CHECK(std::abs(fit.psi_high - 0.75) < 3.0 * fit.psi_high_err);
}

TEST_CASE("exact power law flags a single regime; scaling is scale-invariant") {
  std::vector<double> ns, t2s;
  for (double n = 1; n <= 4096; n *= 4) {
    ns.push_back(n);
    t2s.push_back(0.01 * std::pow(n, 0.75));
  }
  ScalingFit fit = fit_scaling(ns, t2s);
  CHECK(fit.single_regime);
  CHECK(fit.psi_low == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(fit.psi_high == doctest::Approx(0.75).epsilon(1e-9));

  std::vector<double> scaled = t2s;
  for (double& v : scaled) v *= 7.3;
  ScalingFit fit2 = fit_scaling(ns, scaled);
  CHECK(fit2.psi_low == doctest::Approx(fit.psi_low).epsilon(1e-12));
  CHECK(fit2.psi_high == doctest::Approx(fit.psi_high).epsilon(1e-12));

  CHECK_THROWS_AS(fit_scaling({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("T1 bound: flat data with tight errors bounds beyond the delay span") {
  std::vector<double> delays = {0.5, 1.0, 2.0, 4.0, 8.0, 15.0, 30.0};
  std::vector<double> flat(delays.size(), 1.0);

  std::vector<double> loose(delays.size(), 0.1);
  std::vector<double> tight(delays.size(), 0.05);
  T1Bound b_loose = t1_lower_bound(delays, flat, loose, 0.95);
  T1Bound b_tight = t1_lower_bound(delays, flat, tight, 0.95);
  CHECK_FALSE(b_loose.all_rejected);
  CHECK(b_loose.bound > 30.0);               // beyond the largest delay
  CHECK(b_tight.bound > 1.5 * b_loose.bound);  // tighter errors push it up
}

TEST_CASE("T1 bound input validation and chi-square trace") {
  std::vector<double> delays = {1.0, 2.0, 4.0};
  std::vector<double> sig = {1.0, 0.9, 0.8};
  std::vector<double> err = {0.05, 0.05, 0.05};
  T1Bound b = t1_lower_bound(delays, sig, err, 0.9);
  CHECK(b.t1_grid.size() == b.chi_square.size());
  CHECK(b.dof == 2);
  CHECK_THROWS_AS(t1_lower_bound({1.0, 2.0}, {1.0, 1.0}, {0.1, 0.1}, 0.95),
                  std::invalid_argument);
  CHECK_THROWS_AS(t1_lower_bound(delays, sig, {0.05, -0.1, 0.05}, 0.95),
                  std::invalid_argument);
  CHECK_THROWS_AS(t1_lower_bound(delays, sig, err, 1.5), std::invalid_argument);
}

TEST_CASE("two-branch normalization") {
  std::vector<double> plus = {1.0, 0.8, 0.6};
  std::vector<double> minus = {0.0, 0.2, 0.6};
  std::vector<double> c = normalize_two_branch(plus, minus);
  CHECK(c[0] == doctest::Approx(1.0));
  CHECK(c[1] == doctest::Approx(0.6));
  CHECK(c[2] == doctest::Approx(0.0));
  CHECK_THROWS_AS(normalize_two_branch({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("filter function normalization at the Hahn point") {
  // F(w) for a single echo is 8 sin^4(w t / 4).
  DDSequence hahn = generate_sequence(SequenceStyle::CPMG, 1, 1.0);
  for (double u : {0.7, 2.0, 3.9, 11.0}) {
    double expected = 8.0 * std::pow(std::sin(u / 4.0), 4);
    CHECK(filter_function(hahn, u) == doctest::Approx(expected).epsilon(1e-9));
  }
}
