#include "doctest.h"

#include <cmath>

#include "scc/config.hpp"
#include "scc/dynamics.hpp"
#include "scc/montecarlo.hpp"
#include "scc/units.hpp"

using namespace scc;
using namespace scc::units;

namespace {

DefectParameters defaults() {
  return load_defect_parameters(SCCSIM_DATA_DIR "/divacancy_defaults.json");
}

RateMatrix two_state(double rate) {
  RateMatrix m(2);
  m.add_rate(0, 1, rate);
  return m;
}

}  // namespace

TEST_CASE("all rates zero: no events, final state is the start state") {
  RateMatrix m(3);
  Trajectory traj = sample_trajectory(m, 1, 5.0, 42u);
  CHECK(traj.events.empty());
  CHECK(traj.final_state() == 1);
  CHECK(traj.t_end == 5.0);
  CHECK_NOTHROW(traj.validate());
}

TEST_CASE("two-state decay: mean first-jump time is 1/Gamma within 3 SE") {
  double gamma = 2.5e4;
  RateMatrix m = two_state(gamma);
  const long n = 100000;
  double sum = 0.0;
  long jumped = 0;
  for (long k = 0; k < n; ++k) {
    Trajectory traj = sample_trajectory(m, 0, 20.0 / gamma, derive_seed(99, k));
    if (!traj.events.empty()) {
      sum += traj.events.front().time;
      ++jumped;
    }
  }
  double mean = sum / jumped;
  double se = (1.0 / gamma) / std::sqrt(static_cast<double>(jumped));
  CHECK(std::abs(mean - 1.0 / gamma) < 3.0 * se);
}

TEST_CASE("occupancy at probe times matches deterministic propagation within 3 sigma") {
  DefectParameters p = defaults();
  LaserConfig lasers;
  lasers.p_resonant_ex = 14.95 * uW;
  lasers.p_ionization_1151 = 71.0 * mW;
  RateMatrix m = build_rate_matrix(LevelSystem::standard(), p, lasers);

  const long n = 40000;
  const double probe = 1.0 * us;
  PopulationVector expected = propagate(m, PopulationVector::basis(4, kG0), probe);
  std::vector<long> counts(4, 0);
  for (long k = 0; k < n; ++k) {
    Trajectory traj = sample_trajectory(m, kG0, probe, derive_seed(7, k));
    ++counts[traj.final_state()];
  }
  for (std::size_t s = 0; s < 4; ++s) {
    double phat = static_cast<double>(counts[s]) / n;
    double sigma = std::sqrt(std::max(expected.p[s] * (1.0 - expected.p[s]), 1e-12) / n);
    CHECK(std::abs(phat - expected.p[s]) < 3.0 * sigma + 1e-4);
  }
}

TEST_CASE("trajectory state_at and occupancy bookkeeping") {
  Trajectory traj;
  traj.initial_state = 0;
  traj.t_end = 10.0;
  traj.events = {{2.0, 0, 1}, {5.0, 1, 0}};
  CHECK(traj.state_at(1.0) == 0);
  CHECK(traj.state_at(3.0) == 1);
  CHECK(traj.state_at(7.0) == 0);
  CHECK(traj.occupancy_time(0, 0.0, 10.0) == doctest::Approx(7.0));
  CHECK(traj.occupancy_time(1, 0.0, 10.0) == doctest::Approx(3.0));
  CHECK(traj.occupancy_time(1, 0.0, 4.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(traj.occupancy_time(0, -1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(traj.state_at(11.0), std::invalid_argument);
}

TEST_CASE("count_photons: ionized trajectory sees only background") {
  DefectParameters p = defaults();
  LaserConfig ro;
  ro.p_resonant_ex = 2.025 * uW;
  ro.p_resonant_e12 = 2.025 * uW;
  Trajectory traj;
  traj.initial_state = kIon;
  traj.t_end = 20.0 * ms;

  const long n = 20000;
  double sum = 0.0;
  Rng rng(5);
  for (long k = 0; k < n; ++k) sum += count_photons(traj, p, ro, 20.0 * ms, rng);
  double mean = sum / n;
  double expected = p.background_rate * 20.0 * ms;  // 1.3
  CHECK(mean == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("count_photons: saturated bright trajectory gives Poisson mean 100") {
  DefectParameters p = defaults();
  p.background_rate = 0.0;
  LaserConfig ro;
  ro.p_resonant_ex = 1.0;  // deep saturation so the detected rate is 5 kHz
  ro.p_resonant_e12 = 1.0;
  Trajectory traj;
  traj.initial_state = kG0;
  traj.t_end = 20.0 * ms;

  const long n = 100000;
  double sum = 0.0, sumsq = 0.0;
  Rng rng(11);
  for (long k = 0; k < n; ++k) {
    double c = static_cast<double>(count_photons(traj, p, ro, 20.0 * ms, rng));
    sum += c;
    sumsq += c * c;
  }
  double mean = sum / n;
  double var = sumsq / n - mean * mean;
  CHECK(mean == doctest::Approx(100.0).epsilon(0.01));
  // Poisson: index of dispersion within [0.95, 1.05]
  CHECK(var / mean > 0.95);
  CHECK(var / mean < 1.05);
}

TEST_CASE("count_photons: mid-window ionization halves the emission mean") {
  DefectParameters p = defaults();
  p.background_rate = 20.0;
  LaserConfig ro;
  ro.p_resonant_ex = 1.0;
  ro.p_resonant_e12 = 1.0;
  double w = 20.0 * ms;
  Trajectory traj;
  traj.initial_state = kG0;
  traj.t_end = w;
  traj.events = {{0.5 * w, kG0, kIon}};

  // Analytic mean: emission over half the window plus background.
  double expected = p.detected_rate_sat * (1.0 / (1.0 + p.resonant_sat_power / 2.0)) *
                        0.5 * w +
                    p.background_rate * w;
  const long n = 50000;
  double sum = 0.0;
  Rng rng(13);
  for (long k = 0; k < n; ++k) sum += count_photons(traj, p, ro, w, rng);
  CHECK(sum / n == doctest::Approx(expected).epsilon(0.02));

  CHECK_THROWS_AS(count_photons(traj, p, ro, 2.0 * w, rng), std::invalid_argument);
}

TEST_CASE("simulate_shots: zero-rate schedule reports background-only counts") {
  DefectParameters p = defaults();
  RateMatrix none(4);
  LaserConfig dark;
  Schedule schedule{EvolveStep{none, dark, 20.0 * ms, true}};
  auto shots = simulate_shots(schedule, kG0, 5000, p, 31u);
  double sum = 0.0;
  for (const auto& s : shots) sum += static_cast<double>(s.photon_count);
  CHECK(sum / 5000.0 == doctest::Approx(p.background_rate * 0.02).epsilon(0.1));
  CHECK_THROWS_AS(simulate_shots({}, kG0, 10, p, 1u), std::invalid_argument);
  CHECK_THROWS_AS(simulate_shots(schedule, kG0, 0, p, 1u), std::invalid_argument);
}

TEST_CASE("determinism: identical seeds give identical shot lists, any thread count") {
  DefectParameters p = defaults();
  LevelSystem sys = LevelSystem::standard();
  LaserConfig ro;
  ro.p_resonant_ex = 2.025 * uW;
  ro.p_resonant_e12 = 2.025 * uW;
  RateMatrix m = build_rate_matrix(sys, p, ro);
  Schedule schedule{EvolveStep{m, ro, 5.0 * ms, true}};

  auto a = simulate_shots(schedule, kG0, 3000, p, 1234u, 1);
  auto b = simulate_shots(schedule, kG0, 3000, p, 1234u, 1);
  auto c = simulate_shots(schedule, kG0, 3000, p, 1234u, 4);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].photon_count == b[i].photon_count);
    CHECK(a[i].photon_count == c[i].photon_count);
    CHECK(a[i].final_state == c[i].final_state);
    CHECK(a[i].rng_seed == derive_seed(1234u, i));
  }
}

TEST_CASE("instantaneous schedule steps act on the sampled state") {
  DefectParameters p = defaults();
  RateMatrix none(4);
  LaserConfig dark;
  Schedule swap_then_reset{
      SwapStep{kG0, kG1},              // G0 -> G1
      ResetStep{kG1, kG0, 1.0},        // back to G0
      SwapStep{kG0, kG1},              // G1 again
      EvolveStep{none, dark, 1.0 * us, false},
  };
  ShotResult shot = run_single_shot(swap_then_reset, kG0, p, 77u);
  CHECK(shot.final_state == kG1);

  Schedule partial_reset{ResetStep{kG1, kG0, 0.5}};
  long moved = 0;
  const long n = 20000;
  for (long k = 0; k < n; ++k)
    if (run_single_shot(partial_reset, kG1, p, derive_seed(3, k)).final_state == kG0)
      ++moved;
  double frac = static_cast<double>(moved) / n;
  CHECK(std::abs(frac - 0.5) < 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("shot histograms are invariant under shot-index permutation") {
  // Independence proxy: first and second half of the shot list agree
  // within sampling error.
  DefectParameters p = defaults();
  LaserConfig ro;
  ro.p_resonant_ex = 2.025 * uW;
  ro.p_resonant_e12 = 2.025 * uW;
  RateMatrix m = build_rate_matrix(LevelSystem::standard(), p, ro);
  Schedule schedule{EvolveStep{m, ro, 10.0 * ms, true}};
  auto shots = simulate_shots(schedule, kG0, 20000, p, 555u);
  double mean1 = 0.0, mean2 = 0.0;
  for (std::size_t i = 0; i < shots.size(); ++i)
    (i < shots.size() / 2 ? mean1 : mean2) += static_cast<double>(shots[i].photon_count);
  mean1 /= shots.size() / 2.0;
  mean2 /= shots.size() / 2.0;
  double se = std::sqrt(2.0 * mean1 / (shots.size() / 2.0));  // Poisson-scale error
  CHECK(std::abs(mean1 - mean2) < 4.0 * se);
}
