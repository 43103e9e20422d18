#ifndef SCC_MONTECARLO_HPP
#define SCC_MONTECARLO_HPP

#include <cstdint>
#include <variant>
#include <vector>

#include "scc/physics.hpp"
#include "scc/rng.hpp"

namespace scc {

// One continuous-time Markov realization. Events are state changes;
// between events the state is constant.
struct JumpEvent {
  double time;
  std::size_t from_state;
  std::size_t to_state;
};

struct Trajectory {
  std::size_t initial_state = 0;
  double t_end = 0.0;
  std::vector<JumpEvent> events;

  std::size_t final_state() const {
    return events.empty() ? initial_state : events.back().to_state;
  }
  std::size_t state_at(double t) const;
  // Time spent in `state` over [t0, t1].
  double occupancy_time(std::size_t state, double t0, double t1) const;
  void validate() const;
};

struct ShotResult {
  long photon_count = 0;
  std::size_t final_state = 0;
  std::uint64_t rng_seed = 0;
};

// Exact Gillespie sampling: exponential waiting time from the total exit
// rate, categorical jump proportional to the channel rates. Deterministic
// given the seed.
Trajectory sample_trajectory(const RateMatrix& m, std::size_t start, double t_max,
                             std::uint64_t seed);
Trajectory sample_trajectory(const RateMatrix& m, std::size_t start, double t_max, Rng& rng);

// Detected photons in [0, window] of a fixed-laser trajectory: one
// Poisson draw with mean = sum over states of emission_rate * occupancy
// time, plus background_rate * window. Photons accrue from readout-sector
// occupancy rather than individual decay events, so the count model does
// not depend on the unmeasured spontaneous rate.
long count_photons(const Trajectory& traj, const DefectParameters& p,
                   const LaserConfig& lasers, double window, Rng& rng);
long count_photons(const Trajectory& traj, const DefectParameters& p,
                   const LaserConfig& lasers, double window, std::uint64_t seed);

// Piecewise-constant experiment schedule. Instantaneous spin operations
// are interleaved with evolution segments (ideal microwave pulses and
// fixed-fidelity optical spin initialization).
struct EvolveStep {
  RateMatrix matrix;
  LaserConfig lasers;
  double duration = 0.0;
  bool readout = false;  // photons are counted over this segment
};

struct SwapStep {  // ideal pi pulse: exchange two ground-state populations
  std::size_t a = kG0;
  std::size_t b = kG1;
};

struct ResetStep {  // spin initialization: from -> to with given fidelity
  std::size_t from = kG1;
  std::size_t to = kG0;
  double fidelity = 1.0;
};

using ScheduleStep = std::variant<EvolveStep, SwapStep, ResetStep>;
using Schedule = std::vector<ScheduleStep>;

// Independent shots through the schedule. Shot k uses the sub-stream
// derive_seed(master_seed, k); results are ordered by shot index no
// matter how many worker threads execute them.
std::vector<ShotResult> simulate_shots(const Schedule& schedule, std::size_t start,
                                       long shots, const DefectParameters& p,
                                       std::uint64_t master_seed, int threads = 1);

// Single shot, exposed for tests and custom drivers.
ShotResult run_single_shot(const Schedule& schedule, std::size_t start,
                           const DefectParameters& p, std::uint64_t seed);

}  // namespace scc

#endif
