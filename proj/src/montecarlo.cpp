#include "scc/montecarlo.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace scc {

std::size_t Trajectory::state_at(double t) const {
  if (t < 0.0 || t > t_end) throw std::invalid_argument("time outside trajectory span");
  std::size_t state = initial_state;
  for (const auto& e : events) {
    if (e.time > t) break;
    state = e.to_state;
  }
  return state;
}

double Trajectory::occupancy_time(std::size_t state, double t0, double t1) const {
  if (t0 < 0.0 || t1 > t_end || t0 > t1)
    throw std::invalid_argument("window outside trajectory span");
  double total = 0.0;
  double seg_start = 0.0;
  std::size_t current = initial_state;
  auto accumulate = [&](double seg_end) {
    if (current == state) {
      double lo = std::max(seg_start, t0);
      double hi = std::min(seg_end, t1);
      if (hi > lo) total += hi - lo;
    }
  };
  for (const auto& e : events) {
    accumulate(e.time);
    seg_start = e.time;
    current = e.to_state;
  }
  accumulate(t_end);
  return total;
}

void Trajectory::validate() const {
  double prev = 0.0;
  std::size_t state = initial_state;
  for (const auto& e : events) {
    if (e.time <= prev && !(prev == 0.0 && e.time == 0.0))
      throw std::invalid_argument("event times must be strictly increasing");
    if (e.time > t_end) throw std::invalid_argument("event beyond t_end");
    if (e.from_state != state) throw std::invalid_argument("events must chain");
    prev = e.time;
    state = e.to_state;
  }
}

Trajectory sample_trajectory(const RateMatrix& m, std::size_t start, double t_max, Rng& rng) {
  if (start >= m.dim()) throw std::invalid_argument("start state out of range");
  if (t_max < 0.0) throw std::invalid_argument("t_max must be >= 0");

  Trajectory traj;
  traj.initial_state = start;
  traj.t_end = t_max;

  double t = 0.0;
  std::size_t state = start;
  while (true) {
    double exit = m.exit_rate(state);
    if (exit <= 0.0) break;  // absorbing
    t += rng.exponential(exit);
    if (t >= t_max) break;
    // Categorical jump proportional to the outgoing rates.
    double u = rng.uniform() * exit;
    double acc = 0.0;
    std::size_t next = state;
    for (std::size_t j = 0; j < m.dim(); ++j) {
      if (j == state) continue;
      acc += m.entry(j, state);
      if (u < acc) {
        next = j;
        break;
      }
    }
    if (next == state) {
      // Roundoff pushed u past the last channel; take the largest one.
      double best = -1.0;
      for (std::size_t j = 0; j < m.dim(); ++j)
        if (j != state && m.entry(j, state) > best) {
          best = m.entry(j, state);
          next = j;
        }
    }
    traj.events.push_back({t, state, next});
    state = next;
  }
  return traj;
}

Trajectory sample_trajectory(const RateMatrix& m, std::size_t start, double t_max,
                             std::uint64_t seed) {
  Rng rng(seed);
  return sample_trajectory(m, start, t_max, rng);
}

long count_photons(const Trajectory& traj, const DefectParameters& p,
                   const LaserConfig& lasers, double window, Rng& rng) {
  if (window < 0.0 || window > traj.t_end)
    throw std::invalid_argument("count window exceeds trajectory span");
  double mean = p.background_rate * window;
  double seg_start = 0.0;
  std::size_t state = traj.initial_state;
  auto add = [&](double seg_end) {
    double hi = std::min(seg_end, window);
    if (hi > seg_start) mean += emission_rate(p, lasers, state) * (hi - seg_start);
  };
  for (const auto& e : traj.events) {
    add(e.time);
    if (e.time >= window) {
      seg_start = window;
      break;
    }
    seg_start = e.time;
    state = e.to_state;
  }
  add(traj.t_end);
  return rng.poisson(mean);
}

long count_photons(const Trajectory& traj, const DefectParameters& p,
                   const LaserConfig& lasers, double window, std::uint64_t seed) {
  Rng rng(seed);
  return count_photons(traj, p, lasers, window, rng);
}

namespace {

// Event-free SSA walk. Spends the identical random-number sequence as
// sample_trajectory but skips event storage; optionally accumulates the
// time spent in each state (what photon counting needs).
std::size_t advance_state(const RateMatrix& m, std::size_t state, double t_max, Rng& rng,
                          std::vector<double>* occupancy) {
  double t = 0.0;
  while (true) {
    double exit = m.exit_rate(state);
    if (exit <= 0.0) {
      if (occupancy) (*occupancy)[state] += t_max - t;
      return state;
    }
    double dwell = rng.exponential(exit);
    if (t + dwell >= t_max) {
      if (occupancy) (*occupancy)[state] += t_max - t;
      return state;
    }
    if (occupancy) (*occupancy)[state] += dwell;
    t += dwell;
    double u = rng.uniform() * exit;
    double acc = 0.0;
    std::size_t next = state;
    for (std::size_t j = 0; j < m.dim(); ++j) {
      if (j == state) continue;
      acc += m.entry(j, state);
      if (u < acc) {
        next = j;
        break;
      }
    }
    if (next == state) {
      double best = -1.0;
      for (std::size_t j = 0; j < m.dim(); ++j)
        if (j != state && m.entry(j, state) > best) {
          best = m.entry(j, state);
          next = j;
        }
    }
    state = next;
  }
}

}  // namespace

ShotResult run_single_shot(const Schedule& schedule, std::size_t start,
                           const DefectParameters& p, std::uint64_t seed) {
  if (schedule.empty()) throw std::invalid_argument("schedule must not be empty");
  Rng rng(seed);
  ShotResult shot;
  shot.rng_seed = seed;
  std::size_t state = start;
  std::vector<double> occupancy;
  for (const auto& step : schedule) {
    if (std::holds_alternative<EvolveStep>(step)) {
      const auto& ev = std::get<EvolveStep>(step);
      if (ev.readout) {
        occupancy.assign(ev.matrix.dim(), 0.0);
        state = advance_state(ev.matrix, state, ev.duration, rng, &occupancy);
        double mean = p.background_rate * ev.duration;
        for (std::size_t s = 0; s < occupancy.size(); ++s)
          mean += emission_rate(p, ev.lasers, s) * occupancy[s];
        shot.photon_count += rng.poisson(mean);
      } else {
        state = advance_state(ev.matrix, state, ev.duration, rng, nullptr);
      }
    } else if (std::holds_alternative<SwapStep>(step)) {
      const auto& sw = std::get<SwapStep>(step);
      if (state == sw.a)
        state = sw.b;
      else if (state == sw.b)
        state = sw.a;
    } else {
      const auto& rs = std::get<ResetStep>(step);
      if (state == rs.from && rng.bernoulli(rs.fidelity)) state = rs.to;
    }
  }
  shot.final_state = state;
  return shot;
}

std::vector<ShotResult> simulate_shots(const Schedule& schedule, std::size_t start,
                                       long shots, const DefectParameters& p,
                                       std::uint64_t master_seed, int threads) {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  if (schedule.empty()) throw std::invalid_argument("schedule must not be empty");

  std::vector<ShotResult> results(static_cast<std::size_t>(shots));
  auto work = [&](long begin, long end) {
    for (long k = begin; k < end; ++k)
      results[static_cast<std::size_t>(k)] =
          run_single_shot(schedule, start, p, derive_seed(master_seed, static_cast<std::uint64_t>(k)));
  };

  int workers = std::max(1, threads);
  if (workers == 1 || shots < 2 * workers) {
    work(0, shots);
  } else {
    std::vector<std::thread> pool;
    long chunk = (shots + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      long begin = w * chunk;
      long end = std::min(shots, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return results;
}

}  // namespace scc
