#ifndef SCC_STATS_HPP
#define SCC_STATS_HPP

namespace scc {

// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

// CDF and quantile of the chi-square distribution with k degrees of
// freedom. The quantile is solved by bisection on the CDF.
double chi_square_cdf(double x, int dof);
double chi_square_quantile(double prob, int dof);

}  // namespace scc

#endif
