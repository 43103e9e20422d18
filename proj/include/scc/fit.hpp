#ifndef SCC_FIT_HPP
#define SCC_FIT_HPP

#include <functional>
#include <vector>

namespace scc {

// Weighted nonlinear least squares (Levenberg-Marquardt with a numeric
// forward-difference Jacobian). Small and self-contained; the models here
// have at most a handful of parameters.
struct FitResult {
  bool converged = false;
  std::vector<double> params;
  std::vector<double> errors;  // 1 SE from the scaled covariance
  double chi2 = 0.0;
  int dof = 0;
  int iterations = 0;
};

// model(x, params) -> predicted y. sigma may be empty (unit weights); the
// covariance is then scaled by chi2/dof so errors stay meaningful.
FitResult fit_least_squares(const std::function<double(double, const std::vector<double>&)>& model,
                            const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<double>& sigma,
                            std::vector<double> initial_params, int max_iterations = 200);

// Ordinary linear regression y = a + b x; returns {a, b} with errors.
FitResult fit_line(const std::vector<double>& x, const std::vector<double>& y);

// y ~ A exp(-rate * x); initial guesses derived from the data.
FitResult fit_exponential_decay(const std::vector<double>& x, const std::vector<double>& y,
                                const std::vector<double>& sigma = {});

// y ~ A exp(-rate * x) + B, for decays sitting on a constant floor
// (classification false positives, detector background).
FitResult fit_exponential_decay_offset(const std::vector<double>& x,
                                       const std::vector<double>& y,
                                       const std::vector<double>& sigma = {});

}  // namespace scc

#endif
