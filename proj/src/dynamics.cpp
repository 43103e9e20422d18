#include "scc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scc {

namespace {

// Row-major dense helpers for the small (dim <= 16) matrices used here.
using Mat = std::vector<double>;

Mat identity(std::size_t n) {
  Mat out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i * n + i] = 1.0;
  return out;
}

Mat multiply(const Mat& a, const Mat& b, std::size_t n) {
  Mat out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      double aik = a[i * n + k];
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aik * b[k * n + j];
    }
  return out;
}

void axpy(Mat& y, double alpha, const Mat& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

double norm_inf(const Mat& a, std::size_t n) {
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(a[i * n + j]);
    best = std::max(best, row);
  }
  return best;
}

// Solves A X = B in place (X overwrites B), partial pivoting.
void solve_inplace(Mat a, Mat& b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (a[piv * n + col] == 0.0) throw std::runtime_error("singular matrix in expm solve");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[piv * n + j]);
      for (std::size_t j = 0; j < n; ++j) std::swap(b[col * n + j], b[piv * n + j]);
    }
    double d = a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r * n + col] / d;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
      for (std::size_t j = 0; j < n; ++j) b[r * n + j] -= f * b[col * n + j];
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    double d = a[col * n + col];
    for (std::size_t j = 0; j < n; ++j) b[col * n + j] /= d;
    for (std::size_t r = 0; r < col; ++r) {
      double f = a[r * n + col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) b[r * n + j] -= f * b[col * n + j];
    }
  }
}

// Pade(13) scaling-and-squaring, Higham's coefficients.
Mat expm(Mat a, std::size_t n) {
  static const double c[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  double norm = norm_inf(a, n);
  int squarings = 0;
  const double theta13 = 5.371920351148152;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    double scale = std::ldexp(1.0, -squarings);
    for (double& v : a) v *= scale;
  }

  Mat a2 = multiply(a, a, n);
  Mat a4 = multiply(a2, a2, n);
  Mat a6 = multiply(a2, a4, n);
  Mat id = identity(n);

  Mat u_inner(n * n, 0.0);
  axpy(u_inner, c[13], a6);
  axpy(u_inner, c[11], a4);
  axpy(u_inner, c[9], a2);
  Mat u = multiply(a6, u_inner, n);
  axpy(u, c[7], a6);
  axpy(u, c[5], a4);
  axpy(u, c[3], a2);
  axpy(u, c[1], id);
  u = multiply(a, u, n);

  Mat v_inner(n * n, 0.0);
  axpy(v_inner, c[12], a6);
  axpy(v_inner, c[10], a4);
  axpy(v_inner, c[8], a2);
  Mat v = multiply(a6, v_inner, n);
  axpy(v, c[6], a6);
  axpy(v, c[4], a4);
  axpy(v, c[2], a2);
  axpy(v, c[0], id);

  // (V - U) X = (V + U)
  Mat numer(n * n), denom(n * n);
  for (std::size_t i = 0; i < n * n; ++i) {
    numer[i] = v[i] + u[i];
    denom[i] = v[i] - u[i];
  }
  solve_inplace(std::move(denom), numer, n);

  for (int k = 0; k < squarings; ++k) numer = multiply(numer, numer, n);
  return numer;
}

Mat generator_rows(const RateMatrix& m, double t) {
  std::size_t n = m.dim();
  Mat a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = m.entry(i, j) * t;
  return a;
}

}  // namespace

void PopulationVector::validate(double tol) const {
  double sum = 0.0;
  for (double v : p) {
    if (v < -tol || v > 1.0 + tol)
      throw std::invalid_argument("population entries must lie in [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol)
    throw std::invalid_argument("population entries must sum to 1");
}

PopulationVector PopulationVector::basis(std::size_t dim, std::size_t state) {
  if (state >= dim) throw std::invalid_argument("basis state out of range");
  PopulationVector out;
  out.p.assign(dim, 0.0);
  out.p[state] = 1.0;
  return out;
}

std::vector<double> matrix_exponential(const RateMatrix& m, double t) {
  if (t < 0.0) throw std::invalid_argument("time must be >= 0");
  return expm(generator_rows(m, t), m.dim());
}

PopulationVector propagate(const RateMatrix& m, const PopulationVector& p0, double t) {
  if (t < 0.0) throw std::invalid_argument("time must be >= 0");
  if (p0.dim() != m.dim()) throw std::invalid_argument("dimension mismatch");
  if (t == 0.0) return p0;

  Mat e = matrix_exponential(m, t);
  std::size_t n = m.dim();
  PopulationVector out;
  out.p.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.p[i] += e[i * n + j] * p0.p[j];

  // exp of a generator is stochastic; clip the roundoff dust.
  double sum = 0.0;
  for (double& v : out.p) {
    if (v < 0.0 && v > -1e-12) v = 0.0;
    sum += v;
  }
  if (sum > 0.0)
    for (double& v : out.p) v /= sum;
  return out;
}

namespace {

// Null-space basis of the generator via Gauss-Jordan on M (rows).
std::vector<std::vector<double>> null_space(const RateMatrix& m) {
  std::size_t n = m.dim();
  Mat a = generator_rows(m, 1.0);
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  double eps = std::max(scale, 1.0) * 1e-12;

  std::vector<std::size_t> pivot_col;
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < n; ++col) {
    std::size_t piv = row;
    for (std::size_t r = row + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) <= eps) continue;
    for (std::size_t j = 0; j < n; ++j) std::swap(a[row * n + j], a[piv * n + j]);
    double d = a[row * n + col];
    for (std::size_t j = 0; j < n; ++j) a[row * n + j] /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == row) continue;
      double f = a[r * n + col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) a[r * n + j] -= f * a[row * n + j];
    }
    pivot_col.push_back(col);
    ++row;
  }

  std::vector<bool> is_pivot(n, false);
  for (std::size_t c : pivot_col) is_pivot[c] = true;
  std::vector<std::vector<double>> basis;
  for (std::size_t free_col = 0; free_col < n; ++free_col) {
    if (is_pivot[free_col]) continue;
    std::vector<double> v(n, 0.0);
    v[free_col] = 1.0;
    for (std::size_t r = 0; r < pivot_col.size(); ++r)
      v[pivot_col[r]] = -a[r * n + free_col];
    basis.push_back(std::move(v));
  }
  return basis;
}

double slowest_timescale(const RateMatrix& m) {
  double smallest = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) {
      if (i == j) continue;
      double r = m.entry(i, j);
      if (r > 0.0 && (smallest == 0.0 || r < smallest)) smallest = r;
    }
  return smallest > 0.0 ? 1.0 / smallest : 1.0;
}

}  // namespace

SteadyStateResult steady_state(const RateMatrix& m) {
  auto basis = null_space(m);
  if (basis.empty()) throw std::invalid_argument("input is not a generator (no null vector)");
  if (basis.size() > 1)
    throw std::invalid_argument(
        "steady state is degenerate (disconnected sectors); provide an initial condition");

  SteadyStateResult out;
  out.degenerate = false;
  double sum = 0.0;
  for (double v : basis[0]) sum += v;
  if (std::abs(sum) < 1e-300)
    throw std::invalid_argument("null vector is not normalizable");
  out.populations.p.resize(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) {
    double v = basis[0][i] / sum;
    out.populations.p[i] = v < 0.0 && v > -1e-12 ? 0.0 : v;
  }
  return out;
}

SteadyStateResult steady_state(const RateMatrix& m, const PopulationVector& p0) {
  auto basis = null_space(m);
  if (basis.empty()) throw std::invalid_argument("input is not a generator (no null vector)");
  if (basis.size() == 1) return steady_state(m);

  SteadyStateResult out;
  out.degenerate = true;
  out.populations = propagate(m, p0, 1e3 * slowest_timescale(m));
  return out;
}

double branching_limit(double gamma_i, double gamma_flip) {
  if (gamma_i < 0.0 || gamma_flip < 0.0)
    throw std::invalid_argument("rates must be >= 0");
  if (gamma_i == 0.0 && gamma_flip == 0.0)
    throw std::invalid_argument("branching limit undefined when both rates are zero");
  return gamma_i / (gamma_i + gamma_flip);
}

double charge_survival(const DefectParameters& p, double t) {
  if (t < 0.0) throw std::invalid_argument("time must be >= 0");
  return std::exp(-t / p.tau_charge);
}

}  // namespace scc
