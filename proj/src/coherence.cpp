#include "scc/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "scc/fit.hpp"
#include "scc/stats.hpp"

namespace scc {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void DDSequence::validate() const {
  require(t_total > 0.0, "t_total must be > 0");
  require(n_pulses >= 0, "pulse count must be >= 0");
  require(pulse_times.size() == static_cast<std::size_t>(n_pulses),
          "pulse_times size must equal n_pulses");
  double prev = 0.0;
  for (double tk : pulse_times) {
    require(tk > prev && tk < t_total, "pulse times must be strictly increasing in (0, t)");
    prev = tk;
  }
}

DDSequence generate_sequence(SequenceStyle style, int n_pulses, double t_total,
                             std::optional<double> spacing_quantum) {
  require(n_pulses >= 1, "n_pulses must be >= 1");
  require(t_total > 0.0, "t_total must be > 0");

  double tau = t_total / n_pulses;
  if (spacing_quantum) {
    double q = *spacing_quantum;
    require(q > 0.0, "spacing quantum must be > 0");
    double rounded = std::round(tau / q) * q;
    if (rounded <= 0.0)
      throw std::invalid_argument("t_total too short to honor the spacing quantum at this N");
    tau = rounded;
    t_total = tau * n_pulses;
  }

  DDSequence seq;
  seq.style = style;
  seq.n_pulses = n_pulses;
  seq.t_total = t_total;
  seq.beyond_soft_limit = n_pulses > kPulseSoftLimit;
  seq.pulse_times.reserve(static_cast<std::size_t>(n_pulses));
  for (int k = 1; k <= n_pulses; ++k)
    seq.pulse_times.push_back((k - 0.5) * tau);

  // XY8 phase pattern (X Y X Y Y X Y X), repeated; CPMG keeps a common
  // phase. Ideal pulses make this bookkeeping for sequence export only.
  static const double xy8[8] = {0.0, kPi / 2, 0.0, kPi / 2, kPi / 2, 0.0, kPi / 2, 0.0};
  seq.phases.reserve(static_cast<std::size_t>(n_pulses));
  for (int k = 0; k < n_pulses; ++k)
    seq.phases.push_back(style == SequenceStyle::XY8 ? xy8[k % 8] : kPi / 2);
  return seq;
}

double SpectralComponent::value(double omega) const {
  if (omega > omega_cutoff) return 0.0;
  switch (kind) {
    case Kind::White:
      return amplitude;
    case Kind::Lorentzian: {
      double d = (omega - center) * corr_time;
      return amplitude / (1.0 + d * d);
    }
    case Kind::PowerLaw: {
      double w = std::max(omega, omega_min);
      return amplitude * std::pow(omega_ref / w, exponent);
    }
  }
  return 0.0;
}

NoiseSpectrum NoiseSpectrum::white(double s0) {
  NoiseSpectrum sp;
  SpectralComponent c;
  c.kind = SpectralComponent::Kind::White;
  c.amplitude = s0;
  sp.components.push_back(c);
  sp.validate();
  return sp;
}

NoiseSpectrum NoiseSpectrum::lorentzian(double s0, double corr_time, double center,
                                        double cutoff) {
  NoiseSpectrum sp;
  SpectralComponent c;
  c.kind = SpectralComponent::Kind::Lorentzian;
  c.amplitude = s0;
  c.corr_time = corr_time;
  c.center = center;
  c.omega_cutoff = cutoff;
  sp.components.push_back(c);
  sp.validate();
  return sp;
}

NoiseSpectrum NoiseSpectrum::power_law(double s_ref, double exponent, double omega_min,
                                       double omega_ref, double cutoff) {
  NoiseSpectrum sp;
  SpectralComponent c;
  c.kind = SpectralComponent::Kind::PowerLaw;
  c.amplitude = s_ref;
  c.exponent = exponent;
  c.omega_min = omega_min;
  c.omega_ref = omega_ref;
  c.omega_cutoff = cutoff;
  sp.components.push_back(c);
  sp.validate();
  return sp;
}

NoiseSpectrum& NoiseSpectrum::add(const NoiseSpectrum& other) {
  components.insert(components.end(), other.components.begin(), other.components.end());
  return *this;
}

double NoiseSpectrum::value(double omega) const {
  double s = 0.0;
  for (const auto& c : components) s += c.value(omega);
  return s;
}

std::vector<double> NoiseSpectrum::scales() const {
  std::vector<double> out;
  for (const auto& c : components) {
    if (c.kind == SpectralComponent::Kind::Lorentzian && c.corr_time > 0.0) {
      out.push_back(1.0 / c.corr_time);
      if (c.center > 0.0) {
        out.push_back(c.center);
        out.push_back(c.center + 5.0 / c.corr_time);
      }
    }
    if (c.kind == SpectralComponent::Kind::PowerLaw) {
      out.push_back(c.omega_min);
      if (c.omega_ref > 0.0) out.push_back(c.omega_ref);
    }
    if (std::isfinite(c.omega_cutoff)) out.push_back(c.omega_cutoff);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void NoiseSpectrum::validate() const {
  for (const auto& c : components) {
    require(c.amplitude >= 0.0, "spectral amplitudes must be >= 0");
    if (c.kind == SpectralComponent::Kind::Lorentzian)
      require(c.corr_time > 0.0, "Lorentzian correlation time must be > 0");
    if (c.kind == SpectralComponent::Kind::PowerLaw) {
      require(c.omega_min > 0.0, "power-law omega_min must be > 0");
      require(c.omega_ref > 0.0, "power-law omega_ref must be > 0");
      require(c.exponent >= 0.0, "power-law exponent must be >= 0");
    }
    require(c.center >= 0.0, "component center must be >= 0");
  }
}

namespace {

// Frequency response of the sign-toggling modulation function:
// |G(w)|^2 with G = -1 + 2 sum_k (-1)^{k+1} e^{i w t_k} + (-1)^N e^{i w t}
// and F = |G|^2 / 2. For uniform CPMG timing the sum telescopes into the
// exact factorization
//   |G|^2 = 4 ((1 - sec(u/2))^2) sin^2(N (u + pi) / 2),   u = w tau,
// which separates the slow passband envelope from the fast sin^2
// oscillation (period 2 pi / t) and is what makes accurate quadrature at
// large N affordable.
struct FilterShape {
  double t = 0.0;
  int n = 0;
  const std::vector<double>* times = nullptr;
  bool uniform = false;
  double tau = 0.0;

  explicit FilterShape(const DDSequence& seq)
      : t(seq.t_total), n(seq.n_pulses), times(&seq.pulse_times) {
    if (n == 0) {
      uniform = true;
      tau = t;
      return;
    }
    tau = t / n;
    uniform = true;
    for (int k = 1; k <= n; ++k)
      if (std::abs((*times)[static_cast<std::size_t>(k - 1)] - (k - 0.5) * tau) >
          1e-9 * t) {
        uniform = false;
        break;
      }
  }

  // Envelope factor ((1 - sec(u/2))^2; the sin^2 average of |G|^2 is
  // twice this. Diverges at the odd-pi passband poles.
  double envelope(double omega) const {
    double c = std::cos(0.5 * omega * tau);
    if (c == 0.0) return std::numeric_limits<double>::infinity();
    double r = (1.0 - c) / c;
    return r * r;
  }

  double modulus_sq(double omega) const {
    if (uniform && n >= 1) {
      double u = omega * tau;
      double c = std::cos(0.5 * u);
      if (std::abs(c) > 1e-6) {
        double phase = std::fmod(0.5 * n * std::fmod(u + kPi, 4.0 * kPi), 2.0 * kPi);
        double sn = std::sin(phase);
        double r = (1.0 - c) / c;
        return 4.0 * r * r * sn * sn;
      }
      // Near a pole (odd multiple of pi) both sec^2 and sin^2 are set by
      // the offset delta; their ratio stays finite:
      //   |G|^2 = 4 (1-c)^2 sin^2(N delta / 2) / sin^2(delta / 2).
      double m = std::round(u / kPi);
      double delta = u - m * kPi;
      double sh = std::sin(0.5 * delta);
      double sn = std::sin(0.5 * n * delta);
      double amp = (1.0 - c) * (1.0 - c);
      if (std::abs(sh) < 1e-150) return 4.0 * amp * n * n;
      double ratio = sn / sh;
      return 4.0 * amp * ratio * ratio;
    }
    if (n == 0) {
      double s = std::sin(0.5 * omega * t);
      return 4.0 * s * s;
    }
    // Generic timing: direct alternating sum.
    std::complex<double> end_term = std::polar(1.0, omega * t);
    if (n % 2 != 0) end_term = -end_term;
    std::complex<double> alt_sum(0.0, 0.0);
    double sign = 1.0;
    for (int k = 0; k < n; ++k) {
      alt_sum += sign * std::polar(1.0, omega * (*times)[static_cast<std::size_t>(k)]);
      sign = -sign;
    }
    std::complex<double> g = -1.0 + 2.0 * alt_sum + end_term;
    return std::norm(g);
  }
};

struct QuadratureBudget {
  long evals = 0;
  long limit = 20000000;
  void spend(long n) {
    evals += n;
    if (evals > limit)
      throw std::runtime_error(
          "decoherence integral did not converge within the evaluation budget");
  }
};

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth, QuadratureBudget& budget) {
  budget.spend(2);
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget);
}

// Adaptive Simpson with an absolute tolerance anchored to a coarse
// composite estimate of the panel itself, so empty and tiny panels
// terminate quickly while structured ones refine.
double integrate_panel(const std::function<double(double)>& f, double a, double b,
                       double scale_hint, QuadratureBudget& budget) {
  if (b <= a) return 0.0;
  const int n_coarse = 16;
  double h = (b - a) / n_coarse;
  double coarse = 0.0;
  budget.spend(n_coarse + 1);
  std::vector<double> fv(n_coarse + 1);
  for (int i = 0; i <= n_coarse; ++i) {
    fv[static_cast<std::size_t>(i)] = f(a + i * h);
    coarse += fv[static_cast<std::size_t>(i)] *
              (i == 0 || i == n_coarse ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  coarse *= h / 3.0;
  double tol = 1e-8 * std::max({std::abs(coarse), scale_hint, 1e-290});

  double total = 0.0;
  for (int i = 0; i < n_coarse; i += 2) {
    double x0 = a + i * h, x2 = a + (i + 2) * h;
    double piece = (x2 - x0) / 6.0 *
                   (fv[static_cast<std::size_t>(i)] + 4.0 * fv[static_cast<std::size_t>(i + 1)] +
                    fv[static_cast<std::size_t>(i + 2)]);
    total += adaptive_simpson_rec(f, x0, x2, fv[static_cast<std::size_t>(i)],
                                  fv[static_cast<std::size_t>(i + 1)],
                                  fv[static_cast<std::size_t>(i + 2)], piece, tol / n_coarse,
                                  22, budget);
  }
  return total;
}

// Integrates f over [a, b] split at the supplied interior breakpoints.
double integrate_with_breaks(const std::function<double(double)>& f, double a, double b,
                             const std::vector<double>& breaks, double scale_hint,
                             QuadratureBudget& budget) {
  std::vector<double> edges{a};
  for (double s : breaks)
    if (s > a * (1.0 + 1e-12) && s < b * (1.0 - 1e-12)) edges.push_back(s);
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    total += integrate_panel(f, edges[i], edges[i + 1], scale_hint, budget);
  return total;
}

}  // namespace

double filter_function(const DDSequence& seq, double omega) {
  seq.validate();
  FilterShape shape(seq);
  return 0.5 * shape.modulus_sq(omega);
}

double decoherence_exponent(const DDSequence& seq, const NoiseSpectrum& spectrum) {
  seq.validate();
  spectrum.validate();
  if (seq.t_total <= 0.0) return 0.0;
  bool silent = true;
  for (const auto& c : spectrum.components)
    if (c.amplitude > 0.0) silent = false;
  if (silent) return 0.0;

  FilterShape shape(seq);
  auto exact_g = [&](double omega) {
    if (omega <= 0.0) omega = 1e-12 / seq.t_total;
    double s = spectrum.value(omega);
    if (s <= 0.0) return 0.0;
    return s * 0.5 * shape.modulus_sq(omega) / (omega * omega);
  };
  // sin^2-averaged integrand; valid away from the passband poles where
  // the envelope varies slowly on the 2 pi / t oscillation scale.
  auto slow_g = [&](double omega) {
    if (omega <= 0.0) omega = 1e-12 / seq.t_total;
    double s = spectrum.value(omega);
    if (s <= 0.0) return 0.0;
    return s * shape.envelope(omega) / (omega * omega);
  };

  // Cells of width pi/tau centered on the filter harmonics; odd cells
  // carry the passband peaks. Spectrum scale points split the panels so
  // knees, centers, and hard cutoffs are resolved.
  double omega_cell = kPi / shape.tau;
  double lobe = 2.0 * kPi / seq.t_total;  // fast oscillation period
  bool analytic = shape.uniform && shape.n >= 1;
  std::vector<double> scale_breaks;
  for (double s : spectrum.scales()) {
    scale_breaks.push_back(s);
    scale_breaks.push_back(0.1 * s);
    scale_breaks.push_back(10.0 * s);
  }
  double max_scale = 0.0;
  for (double s : spectrum.scales()) max_scale = std::max(max_scale, s);
  long m_required = static_cast<long>(std::ceil(max_scale / omega_cell)) + 4;

  const long m_settle = 96;   // minimum harmonics before tail extrapolation
  const long m_cap = 400000;  // hard stop
  const int k_lobes = 8;      // exact-integration lobes on each side of a peak
  QuadratureBudget budget;
  std::vector<double> cell_mass;
  double total = 0.0;
  double scale_ref = 0.0;  // largest cell mass seen; anchors the tolerances
  long m = 0;
  for (; m <= m_cap; ++m) {
    double a = m == 0 ? 0.0 : (m - 0.5) * omega_cell;
    double b = (m + 0.5) * omega_cell;
    double hint = 1e-4 * scale_ref;
    double mass = 0.0;
    if (!analytic) {
      // Ramsey or custom pulse timing: direct integration, split at the
      // harmonic so the Simpson midpoints land on the peak.
      if (m == 0) {
        mass = integrate_with_breaks(exact_g, a, b, scale_breaks, hint, budget);
      } else {
        double center = m * omega_cell;
        mass = integrate_with_breaks(exact_g, a, center, scale_breaks, hint, budget) +
               integrate_with_breaks(exact_g, center, b, scale_breaks, hint, budget);
      }
    } else if (shape.n <= 64) {
      // Few enough sin^2 lobes per cell to integrate them all exactly.
      double center = m * omega_cell;
      long j_lo = static_cast<long>(std::floor((a - center) / lobe));
      long j_hi = static_cast<long>(std::ceil((b - center) / lobe));
      for (long j = j_lo; j < j_hi; ++j) {
        double lo = std::max(a, center + j * lobe);
        double hi = std::min(b, center + (j + 1) * lobe);
        if (hi > lo) mass += integrate_panel(exact_g, lo, hi, hint, budget);
      }
    } else if (m % 2 == 1) {
      // Peak cell: exact lobes around the pole, averaged envelope outside.
      double center = m * omega_cell;
      double inner_lo = std::max(a, center - k_lobes * lobe);
      double inner_hi = std::min(b, center + k_lobes * lobe);
      for (long j = -k_lobes; j < k_lobes; ++j) {
        double lo = std::max(inner_lo, center + j * lobe);
        double hi = std::min(inner_hi, center + (j + 1) * lobe);
        if (hi > lo) mass += integrate_panel(exact_g, lo, hi, hint, budget);
      }
      mass += integrate_with_breaks(slow_g, a, inner_lo, scale_breaks, hint, budget);
      mass += integrate_with_breaks(slow_g, inner_hi, b, scale_breaks, hint, budget);
    } else {
      // Off-peak cell: the averaged envelope is exact to O((t/N tau)^2).
      mass = integrate_with_breaks(slow_g, a, b, scale_breaks, hint, budget);
    }
    cell_mass.push_back(mass);
    total += mass;
    scale_ref = std::max(scale_ref, std::abs(mass));
    if (m >= m_required && m >= m_settle) {
      double recent = 0.0;
      for (std::size_t k = cell_mass.size() - 4; k < cell_mass.size(); ++k)
        recent += cell_mass[k];
      if (recent <= 1e-7 * std::abs(total) || recent == 0.0) break;
      // Contributions now follow S(w)/w^2 times a fixed per-cell filter
      // mass (|G|^2 repeats every four cells for CPMG timing); complete
      // the sum with that model instead of walking every harmonic.
      if (m >= 4 * m_settle || m >= m_required * 8) {
        // Reference block: the last four measured cells, indexed m-3..m.
        double ref_mass[4], ref_density[4];
        bool usable = true;
        for (long r = 0; r < 4; ++r) {
          long idx = m - 3 + r;
          double w = idx * omega_cell;
          ref_mass[r] = cell_mass[cell_mass.size() - 4 + static_cast<std::size_t>(r)];
          ref_density[r] = spectrum.value(w) / (w * w);
          if (ref_density[r] <= 0.0) usable = false;
        }
        if (usable) {
          double tail = 0.0;
          for (long mm = m + 1; mm <= 100000000; ++mm) {
            long r = (mm - (m - 3)) % 4;
            double w = mm * omega_cell;
            double density = spectrum.value(w) / (w * w);
            if (density <= 0.0) break;
            double inc = ref_mass[r] * density / ref_density[r];
            tail += inc;
            if (inc < 1e-12 * (std::abs(total) + tail)) break;
          }
          total += tail;
        }
        break;
      }
    }
  }

  return (2.0 / kPi) * total;
}

CoherenceCurve coherence_envelope(SequenceStyle style, int n_pulses,
                                  const std::vector<double>& times,
                                  const NoiseSpectrum& spectrum) {
  require(!times.empty(), "time grid must not be empty");
  CoherenceCurve curve;
  curve.n_pulses = n_pulses;
  curve.times = times;
  curve.coherence.reserve(times.size());
  for (double t : times) {
    require(t > 0.0, "times must be > 0");
    DDSequence seq = generate_sequence(style, n_pulses, t);
    curve.coherence.push_back(std::exp(-decoherence_exponent(seq, spectrum)));
  }
  return curve;
}

double coherence_time(SequenceStyle style, int n_pulses, const NoiseSpectrum& spectrum) {
  auto chi_at = [&](double t) {
    return decoherence_exponent(generate_sequence(style, n_pulses, t), spectrum);
  };
  double lo = 0.0, hi = 1e-6;
  for (int i = 0; i < 200 && chi_at(hi) < 1.0; ++i) {
    lo = hi;
    hi *= 4.0;
  }
  if (chi_at(hi) < 1.0)
    throw std::runtime_error("coherence time not bracketed; spectrum too weak");
  for (int i = 0; i < 100; ++i) {
    double mid = 0.5 * (lo + hi);
    if (chi_at(mid) < 1.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-9 * hi) break;
  }
  return 0.5 * (lo + hi);
}

StretchedFit fit_stretched(const std::vector<double>& times,
                           const std::vector<double>& values,
                           const std::vector<double>& sigma) {
  require(times.size() == values.size(), "times and values sizes differ");
  require(times.size() >= 4, "need at least four samples");

  StretchedFit out;
  double vmax = *std::max_element(values.begin(), values.end());
  double vmin = *std::min_element(values.begin(), values.end());
  double noise_floor = 0.0;
  if (!sigma.empty()) {
    std::vector<double> s = sigma;
    std::sort(s.begin(), s.end());
    noise_floor = s[s.size() / 2];
  }
  if (vmax - vmin <= std::max(0.02 * std::abs(vmax), 3.0 * noise_floor)) {
    out.degenerate = true;  // no resolvable decay
    out.amplitude = vmax;
    return out;
  }

  // Internal parameters (A, ln tau, ln n) keep tau and n positive.
  double a0 = vmax;
  double tau0 = times.back();
  for (std::size_t i = 0; i < times.size(); ++i)
    if (values[i] < a0 / M_E) {
      tau0 = times[i];
      break;
    }
  auto model = [](double t, const std::vector<double>& p) {
    double tau = std::exp(p[1]);
    double n = std::exp(p[2]);
    return t <= 0.0 ? p[0] : p[0] * std::exp(-std::pow(t / tau, n));
  };
  FitResult fit = fit_least_squares(model, times, values, sigma,
                                    {a0, std::log(tau0), std::log(1.0)});
  out.converged = fit.converged;
  out.amplitude = fit.params[0];
  out.t2 = std::exp(fit.params[1]);
  out.stretch = std::exp(fit.params[2]);
  out.amplitude_err = fit.errors[0];
  out.t2_err = out.t2 * fit.errors[1];       // delta method
  out.stretch_err = out.stretch * fit.errors[2];
  return out;
}

namespace {

struct LineFit {
  double intercept = 0.0, slope = 0.0;
  double intercept_err = 0.0, slope_err = 0.0;
  double ssr = 0.0;
};

LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& w) {
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
    swxx += w[i] * x[i] * x[i];
    swxy += w[i] * x[i] * y[i];
  }
  double denom = sw * swxx - swx * swx;
  LineFit f;
  f.slope = (sw * swxy - swx * swy) / denom;
  f.intercept = (swy - f.slope * swx) / sw;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    f.ssr += w[i] * r * r;
  }
  // Unit-weight fits scale the covariance by the residual variance.
  double scale = 1.0;
  bool unit = true;
  for (double wi : w)
    if (wi != 1.0) unit = false;
  if (unit && x.size() > 2) scale = f.ssr / (static_cast<double>(x.size()) - 2.0);
  f.slope_err = std::sqrt(std::max(0.0, scale * sw / denom));
  f.intercept_err = std::sqrt(std::max(0.0, scale * swxx / denom));
  return f;
}

}  // namespace

ScalingFit fit_scaling(const std::vector<double>& n_pulses, const std::vector<double>& t2,
                       const std::vector<double>& t2_sigma) {
  std::size_t n = n_pulses.size();
  require(t2.size() == n, "N and T2 sizes differ");
  require(n >= 6, "need at least three points per regime");
  std::vector<double> lx(n), ly(n), w(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    require(n_pulses[i] > 0.0 && t2[i] > 0.0, "N and T2 must be positive");
    lx[i] = std::log(n_pulses[i]);
    ly[i] = std::log(t2[i]);
    if (!t2_sigma.empty()) {
      double sl = t2_sigma[i] / t2[i];  // error propagated into log space
      require(sl > 0.0, "sigma entries must be > 0");
      w[i] = 1.0 / (sl * sl);
    }
  }

  auto slice = [](const std::vector<double>& v, std::size_t a, std::size_t b) {
    return std::vector<double>(v.begin() + static_cast<long>(a),
                               v.begin() + static_cast<long>(b));
  };

  ScalingFit best;
  double best_ssr = std::numeric_limits<double>::infinity();
  for (std::size_t k = 3; k + 3 <= n; ++k) {  // k points in the low regime
    LineFit lo = weighted_line(slice(lx, 0, k), slice(ly, 0, k), slice(w, 0, k));
    LineFit hi = weighted_line(slice(lx, k, n), slice(ly, k, n), slice(w, k, n));
    double ssr = lo.ssr + hi.ssr;
    if (ssr < best_ssr) {
      best_ssr = ssr;
      best.breakpoint = std::sqrt(n_pulses[k - 1] * n_pulses[k]);
      best.psi_low = lo.slope;
      best.psi_low_err = lo.slope_err;
      best.psi_high = hi.slope;
      best.psi_high_err = hi.slope_err;
      best.prefactor_low = std::exp(lo.intercept);
      best.prefactor_high = std::exp(hi.intercept);
    }
  }

  LineFit single = weighted_line(lx, ly, w);
  if (single.ssr <= 1.05 * best_ssr + 1e-20 ||
      std::abs(best.psi_low - best.psi_high) < 1e-9)
    best.single_regime = true;
  return best;
}

T1Bound t1_lower_bound(const std::vector<double>& delays, const std::vector<double>& signals,
                       const std::vector<double>& errors, double confidence,
                       const T1BoundOptions& options) {
  std::size_t n = delays.size();
  require(signals.size() == n && errors.size() == n, "input sizes differ");
  require(n >= 3, "need at least three points");
  require(confidence > 0.0 && confidence < 1.0, "confidence must be in (0, 1)");
  for (double e : errors) require(e > 0.0, "errors must be > 0");

  T1Bound out;
  out.confidence = confidence;
  int n_linear = options.fit_offset ? 2 : 1;
  out.dof = static_cast<int>(n) - n_linear;
  require(out.dof >= 1, "not enough points for the degrees of freedom");
  out.critical_value = chi_square_quantile(confidence, out.dof);

  if (!options.t1_grid.empty()) {
    out.t1_grid = options.t1_grid;
  } else {
    double tmax = *std::max_element(delays.begin(), delays.end());
    double lo = tmax / 300.0, hi = tmax * 1e4;
    for (int i = 0; i < 240; ++i)
      out.t1_grid.push_back(lo * std::pow(hi / lo, i / 239.0));
  }

  auto chi2_at = [&](double t1) {
    // Model A e^{-t/T1} (+ B): linear in the fitted parameters, solved
    // exactly by weighted normal equations.
    double s_ee = 0, s_ey = 0, s_e1 = 0, s_11 = 0, s_1y = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double w = 1.0 / (errors[i] * errors[i]);
      double e = std::exp(-delays[i] / t1);
      double yi = signals[i] - (options.fit_offset ? 0.0 : options.offset);
      s_ee += w * e * e;
      s_ey += w * e * yi;
      s_e1 += w * e;
      s_11 += w;
      s_1y += w * yi;
    }
    double a, b = options.fit_offset ? 0.0 : options.offset;
    if (options.fit_offset) {
      double det = s_ee * s_11 - s_e1 * s_e1;
      if (std::abs(det) < 1e-300) return std::numeric_limits<double>::infinity();
      a = (s_ey * s_11 - s_e1 * s_1y) / det;
      b = (s_ee * s_1y - s_e1 * s_ey) / det;
    } else {
      if (s_ee <= 0.0) return std::numeric_limits<double>::infinity();
      a = s_ey / s_ee;
    }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double fit = a * std::exp(-delays[i] / t1) + (options.fit_offset ? b : options.offset);
      double r = (signals[i] - fit) / errors[i];
      chi2 += r * r;
    }
    return chi2;
  };

  out.chi_square.reserve(out.t1_grid.size());
  out.bound = std::numeric_limits<double>::quiet_NaN();
  bool found = false;
  for (double t1 : out.t1_grid) {
    double c = chi2_at(t1);
    out.chi_square.push_back(c);
    if (!found && c <= out.critical_value) {
      out.bound = t1;
      found = true;
    }
  }
  out.all_rejected = !found;
  return out;
}

std::vector<double> normalize_two_branch(const std::vector<double>& plus,
                                         const std::vector<double>& minus) {
  require(plus.size() == minus.size(), "branch sizes differ");
  std::vector<double> out(plus.size());
  for (std::size_t i = 0; i < plus.size(); ++i) {
    double denom = plus[i] + minus[i];
    out[i] = denom == 0.0 ? 0.0 : (plus[i] - minus[i]) / denom;
  }
  return out;
}

}  // namespace scc
