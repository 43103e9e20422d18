#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "scc/fit.hpp"
#include "scc/rng.hpp"
#include "scc/stats.hpp"

using namespace scc;

TEST_CASE("linear fit recovers slope and intercept") {
  std::vector<double> x, y;
  for (int i = 0; i < 12; ++i) {
    x.push_back(i);
    y.push_back(3.5 - 0.7 * i);
  }
  FitResult fit = fit_line(x, y);
  CHECK(fit.params[0] == doctest::Approx(3.5).epsilon(1e-9));
  CHECK(fit.params[1] == doctest::Approx(-0.7).epsilon(1e-9));
}

TEST_CASE("exponential decay fit with noise recovers the rate") {
  Rng rng(17);
  std::vector<double> x, y, s;
  double rate = 4.2e5;
  for (int i = 0; i < 30; ++i) {
    double t = i * 1.0e-7;
    x.push_back(t);
    y.push_back(std::exp(-rate * t) + 0.005 * rng.gaussian());
    s.push_back(0.005);
  }
  FitResult fit = fit_exponential_decay(x, y, s);
  CHECK(fit.converged);
  CHECK(std::abs(fit.params[1] - rate) < 3.0 * fit.errors[1]);
  CHECK(fit.chi2 / fit.dof < 2.5);
}

TEST_CASE("least squares covariance calibrates against known-noise data") {
  // Repeated fits: the pull distribution of the slope should have unit
  // scale if the reported errors are honest.
  int hits = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    Rng rng(derive_seed(1001, static_cast<std::uint64_t>(r)));
    std::vector<double> x, y, s;
    for (int i = 0; i < 20; ++i) {
      x.push_back(i * 0.1);
      y.push_back(2.0 * std::exp(-1.3 * x.back()) + 0.02 * rng.gaussian());
      s.push_back(0.02);
    }
    auto model = [](double xi, const std::vector<double>& p) {
      return p[0] * std::exp(-p[1] * xi);
    };
    FitResult fit = fit_least_squares(model, x, y, s, {1.5, 1.0});
    if (std::abs(fit.params[1] - 1.3) < 2.0 * fit.errors[1]) ++hits;
  }
  // ~95% coverage at 2 SE; allow generous slack for 200 draws.
  CHECK(hits >= 180);
}

TEST_CASE("fit rejects inconsistent inputs") {
  auto model = [](double xi, const std::vector<double>& p) { return p[0] * xi; };
  CHECK_THROWS_AS(fit_least_squares(model, {1.0, 2.0}, {1.0}, {}, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_least_squares(model, {1.0}, {1.0}, {}, {1.0, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_least_squares(model, {1.0, 2.0}, {1.0, 2.0}, {0.1, -0.1}, {1.0}),
                  std::invalid_argument);
}

TEST_CASE("chi-square CDF matches reference values") {
  // Reference: P(chi2 <= k) at the mean equals ~0.5-ish; exact anchors
  // from the regularized gamma function.
  CHECK(chi_square_cdf(0.0, 3) == 0.0);
  // chi2(1): P(X <= 3.841) = 0.95
  CHECK(chi_square_cdf(3.841458821, 1) == doctest::Approx(0.95).epsilon(1e-6));
  // chi2(5): P(X <= 11.0705) = 0.95
  CHECK(chi_square_cdf(11.0704977, 5) == doctest::Approx(0.95).epsilon(1e-6));
  // chi2(10): P(X <= 18.3070) = 0.95
  CHECK(chi_square_cdf(18.3070381, 10) == doctest::Approx(0.95).epsilon(1e-6));
}

TEST_CASE("chi-square quantile inverts the CDF") {
  for (int dof : {1, 2, 6, 17}) {
    for (double p : {0.05, 0.5, 0.95, 0.99}) {
      double q = chi_square_quantile(p, dof);
      CHECK(chi_square_cdf(q, dof) == doctest::Approx(p).epsilon(1e-9));
    }
  }
  CHECK(chi_square_quantile(0.95, 6) == doctest::Approx(12.5915872).epsilon(1e-6));
  CHECK_THROWS_AS(chi_square_quantile(0.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(chi_square_cdf(1.0, 0), std::invalid_argument);
}

TEST_CASE("gaussian sampler has the right first two moments") {
  Rng rng(2718);
  const long n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < n; ++i) {
    double g = rng.gaussian();
    sum += g;
    sumsq += g * g;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.02));
}
