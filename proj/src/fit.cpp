#include "scc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scc {

namespace {

// Solves the symmetric system (A + lambda diag(A)) x = b by Gaussian
// elimination; returns false if singular.
bool solve_damped(std::vector<double> a, std::vector<double> b, double lambda,
                  std::size_t n, std::vector<double>& out) {
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] *= 1.0 + lambda;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[piv * n + j]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
      b[r] -= f * b[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t col = n; col-- > 0;) {
    double acc = b[col];
    for (std::size_t j = col + 1; j < n; ++j) acc -= a[col * n + j] * out[j];
    out[col] = acc / a[col * n + col];
  }
  return true;
}

bool invert(std::vector<double> a, std::size_t n, std::vector<double>& inv) {
  inv.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col)
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a[col * n + j], a[piv * n + j]);
        std::swap(inv[col * n + j], inv[piv * n + j]);
      }
    double d = a[col * n + col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col * n + j] /= d;
      inv[col * n + j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a[r * n + col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r * n + j] -= f * a[col * n + j];
        inv[r * n + j] -= f * inv[col * n + j];
      }
    }
  }
  return true;
}

}  // namespace

FitResult fit_least_squares(const std::function<double(double, const std::vector<double>&)>& model,
                            const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<double>& sigma,
                            std::vector<double> initial_params, int max_iterations) {
  std::size_t n = x.size();
  std::size_t np = initial_params.size();
  if (n != y.size()) throw std::invalid_argument("x and y sizes differ");
  if (!sigma.empty() && sigma.size() != n)
    throw std::invalid_argument("sigma size must match data");
  if (n < np) throw std::invalid_argument("fewer points than parameters");

  auto weight = [&](std::size_t i) {
    if (sigma.empty()) return 1.0;
    if (sigma[i] <= 0.0) throw std::invalid_argument("sigma entries must be > 0");
    return 1.0 / (sigma[i] * sigma[i]);
  };

  auto chi2_of = [&](const std::vector<double>& params) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = y[i] - model(x[i], params);
      acc += weight(i) * r * r;
    }
    return acc;
  };

  FitResult res;
  res.params = std::move(initial_params);
  res.dof = static_cast<int>(n - np);
  double chi2 = chi2_of(res.params);
  double lambda = 1e-3;

  std::vector<double> jac(n * np), resid(n);
  for (int iter = 0; iter < max_iterations; ++iter) {
    res.iterations = iter + 1;
    for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - model(x[i], res.params);
    for (std::size_t k = 0; k < np; ++k) {
      double h = std::max(std::abs(res.params[k]), 1e-8) * 1e-6;
      std::vector<double> bumped = res.params;
      bumped[k] += h;
      for (std::size_t i = 0; i < n; ++i)
        jac[i * np + k] = (model(x[i], bumped) - (y[i] - resid[i])) / h;
    }

    std::vector<double> jtj(np * np, 0.0), jtr(np, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double w = weight(i);
      for (std::size_t k = 0; k < np; ++k) {
        jtr[k] += w * jac[i * np + k] * resid[i];
        for (std::size_t l = k; l < np; ++l)
          jtj[k * np + l] += w * jac[i * np + k] * jac[i * np + l];
      }
    }
    for (std::size_t k = 0; k < np; ++k)
      for (std::size_t l = 0; l < k; ++l) jtj[k * np + l] = jtj[l * np + k];

    bool stepped = false;
    for (int tries = 0; tries < 12; ++tries) {
      std::vector<double> delta;
      if (solve_damped(jtj, jtr, lambda, np, delta)) {
        std::vector<double> trial = res.params;
        for (std::size_t k = 0; k < np; ++k) trial[k] += delta[k];
        double trial_chi2 = chi2_of(trial);
        if (std::isfinite(trial_chi2) && trial_chi2 <= chi2) {
          double improvement = chi2 - trial_chi2;
          res.params = std::move(trial);
          chi2 = trial_chi2;
          lambda = std::max(lambda * 0.3, 1e-12);
          stepped = true;
          if (improvement < 1e-10 * (chi2 + 1e-30)) {
            res.converged = true;
          }
          break;
        }
      }
      lambda *= 10.0;
    }
    if (res.converged || !stepped) {
      res.converged = res.converged || stepped || iter > 0;
      break;
    }
  }

  res.chi2 = chi2;

  // Covariance ~ (J^T W J)^-1, scaled by chi2/dof for unit weights.
  std::vector<double> jtj(np * np, 0.0);
  for (std::size_t k = 0; k < np; ++k) {
    double h = std::max(std::abs(res.params[k]), 1e-8) * 1e-6;
    std::vector<double> bumped = res.params;
    bumped[k] += h;
    for (std::size_t i = 0; i < n; ++i)
      jac[i * np + k] = (model(x[i], bumped) - model(x[i], res.params)) / h;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double w = weight(i);
    for (std::size_t k = 0; k < np; ++k)
      for (std::size_t l = 0; l < np; ++l)
        jtj[k * np + l] += w * jac[i * np + k] * jac[i * np + l];
  }
  std::vector<double> cov;
  res.errors.assign(np, 0.0);
  if (invert(jtj, np, cov)) {
    double scale = (sigma.empty() && res.dof > 0) ? chi2 / res.dof : 1.0;
    for (std::size_t k = 0; k < np; ++k)
      res.errors[k] = std::sqrt(std::max(0.0, cov[k * np + k] * scale));
  }
  return res;
}

FitResult fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  auto model = [](double xi, const std::vector<double>& p) { return p[0] + p[1] * xi; };
  std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = static_cast<double>(n) * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) throw std::invalid_argument("degenerate abscissa");
  double b = (static_cast<double>(n) * sxy - sx * sy) / denom;
  double a = (sy - b * sx) / static_cast<double>(n);
  return fit_least_squares(model, x, y, {}, {a, b}, 2);
}

FitResult fit_exponential_decay(const std::vector<double>& x, const std::vector<double>& y,
                                const std::vector<double>& sigma) {
  if (x.size() < 3) throw std::invalid_argument("need at least three points");
  double a0 = *std::max_element(y.begin(), y.end());
  if (a0 <= 0.0) a0 = 1.0;
  // Crude rate guess from the first/last positive samples.
  double rate0 = 1.0;
  for (std::size_t i = x.size(); i-- > 0;) {
    if (y[i] > 0.0 && y[i] < a0 && x[i] > x.front()) {
      rate0 = std::log(a0 / y[i]) / (x[i] - x.front());
      break;
    }
  }
  if (!(rate0 > 0.0) || !std::isfinite(rate0)) rate0 = 1.0 / (x.back() - x.front());
  auto model = [](double xi, const std::vector<double>& p) {
    return p[0] * std::exp(-p[1] * xi);
  };
  return fit_least_squares(model, x, y, sigma, {a0, rate0});
}

FitResult fit_exponential_decay_offset(const std::vector<double>& x,
                                       const std::vector<double>& y,
                                       const std::vector<double>& sigma) {
  if (x.size() < 4) throw std::invalid_argument("need at least four points");
  double top = *std::max_element(y.begin(), y.end());
  double floor = *std::min_element(y.begin(), y.end());
  double a0 = std::max(top - floor, 1e-6);
  double rate0 = 1.0 / (x.back() - x.front());
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] - floor < a0 / M_E && x[i] > x.front()) {
      rate0 = 1.0 / (x[i] - x.front());
      break;
    }
  auto model = [](double xi, const std::vector<double>& p) {
    return p[0] * std::exp(-p[1] * xi) + p[2];
  };
  return fit_least_squares(model, x, y, sigma, {a0, rate0, floor});
}

}  // namespace scc
