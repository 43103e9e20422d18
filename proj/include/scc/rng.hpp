#ifndef SCC_RNG_HPP
#define SCC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace scc {

// splitmix64 finalizer; used both as a bit mixer and to expand master
// seeds into per-shot streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Stable sub-stream derivation: seed_k = splitmix64(master + k * golden).
// Documented so results can be reproduced outside this code base.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + index * 0x9e3779b97f4a7c15ull);
}

// Thin wrapper around std::mt19937_64 with hand-rolled variate
// transforms. std:: distributions are implementation-defined, so all
// draws here go through explicit inverse-CDF / rejection code to keep
// outputs bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double uniform_pos() { return 1.0 - uniform(); }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

  // Exact Poisson sampling. Knuth's product method below a mean of 48;
  // larger means split recursively (Poisson additivity), so the result
  // stays exact without a normal approximation.
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    long total = 0;
    while (mean > 48.0) {
      double half = mean * 0.5;
      total += poisson_knuth(half);
      mean -= half;
    }
    return total + poisson_knuth(mean);
  }

  long binomial(long n, double p) {
    if (p <= 0.0 || n <= 0) return 0;
    if (p >= 1.0) return n;
    long k = 0;
    for (long i = 0; i < n; ++i)
      if (uniform() < p) ++k;
    return k;
  }

  double gaussian() {
    // Box-Muller; cache the second variate.
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = uniform_pos();
    double v = uniform();
    double r = std::sqrt(-2.0 * std::log(u));
    have_spare_ = true;
    spare_ = r * std::sin(2.0 * M_PI * v);
    return r * std::cos(2.0 * M_PI * v);
  }

 private:
  long poisson_knuth(double mean) {
    double limit = std::exp(-mean);
    long k = 0;
    double prod = uniform_pos();
    while (prod > limit) {
      ++k;
      prod *= uniform_pos();
    }
    return k;
  }

  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace scc

#endif
