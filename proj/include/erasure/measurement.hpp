#pragma once

// Noisy position sensor M = X + η, η ~ N(0, σ_n²), and the information the
// reading carries about a particle distributed as the two-well mixture
// f_X = p·N(-L, σ_T²) + (1-p)·N(L, σ_T²).

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "erasure/common.hpp"

namespace erasure {

struct SensorModel {
  double sigma_n = 300.0;  // nm

  void validate() const {
    detail::require(std::isfinite(sigma_n) && sigma_n >= 0.0, "sensor.sigma_n_nm must be >= 0");
  }
};

struct MixtureModel {
  double p = 0.5;         // probability of the left well
  double L = 550.0;       // nm
  double sigma_T = 43.0;  // nm

  void validate() const {
    detail::require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "mixture.p_left must lie in [0, 1]");
    detail::require(std::isfinite(L) && L >= 0.0, "mixture.L_nm must be >= 0");
    detail::require(std::isfinite(sigma_T) && sigma_T > 0.0, "mixture.sigma_T_nm must be > 0");
  }
};

enum class Action { act, no_action };

inline double sample_measurement(double x, const SensorModel& sensor, double noise) {
  detail::require_finite(x, "position");
  return x + sensor.sigma_n * noise;
}

/// Tilt only on a strictly positive reading; m = 0 means no action.
inline Action decide_action(double m) {
  detail::require_finite(m, "measurement");
  return m > 0.0 ? Action::act : Action::no_action;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace detail {

inline double log_normal_pdf(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

inline double log_add_exp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

// ln f_M(m) for the measured-position mixture with per-component spread s.
inline double log_mixture_pdf(double m, const MixtureModel& mix, double s) {
  const double left = mix.p > 0.0 ? std::log(mix.p) + log_normal_pdf(m, -mix.L, s) : -INFINITY;
  const double right = mix.p < 1.0 ? std::log1p(-mix.p) + log_normal_pdf(m, mix.L, s) : -INFINITY;
  return log_add_exp(left, right);
}

inline double gaussian_entropy(double sigma) {
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * sigma * sigma);
}

}  // namespace detail

/// Differential entropy h(M) in nats by adaptive Gauss–Kronrod quadrature on
/// ±(L + 10σ); `error` receives the quadrature's error estimate.
inline double measured_entropy(const MixtureModel& mix, const SensorModel& sensor, double* error = nullptr) {
  const double s = std::hypot(mix.sigma_T, sensor.sigma_n);
  const double half_width = mix.L + 10.0 * s;
  auto integrand = [&](double m) {
    const double lf = detail::log_mixture_pdf(m, mix, s);
    return lf == -INFINITY ? 0.0 : -std::exp(lf) * lf;
  };
  double err = 0.0;
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 31>;
  // Panels split at the component centres.
  const double cuts[] = {-half_width, -mix.L, 0.0, mix.L, half_width};
  double h = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    double e = 0.0;
    h += Quadrature::integrate(integrand, cuts[i], cuts[i + 1], 20, 1e-12, &e);
    err += e;
  }
  if (error) *error = err;
  return h;
}

/// I(X;M) = h(M) - h(η) in nats. Requires σ_n > 0; the information diverges
/// for a noiseless sensor on a continuous position.
inline double mi_quadrature(const MixtureModel& mix, const SensorModel& sensor) {
  mix.validate();
  sensor.validate();
  detail::require(sensor.sigma_n > 0.0, "mutual information diverges for sigma_n = 0");
  double err = 0.0;
  const double h_m = measured_entropy(mix, sensor, &err);
  if (err > 1e-4) throw std::runtime_error("mutual information quadrature did not reach 1e-4 nats");
  return h_m - detail::gaussian_entropy(sensor.sigma_n);
}

struct MonteCarloEstimate {
  double value = 0.0;  // nats
  double se = 0.0;
  std::size_t n = 0;
};

struct PositionReading {
  double x;  // nm
  double m;  // nm
};

/// Plug-in estimate (1/N) Σ [ln f_η(m - x) - ln f_M(m)] with analytic
/// densities. SE uses the population variance, σ/√N.
inline MonteCarloEstimate mi_monte_carlo(std::span<const PositionReading> samples, const MixtureModel& mix,
                                         const SensorModel& sensor) {
  mix.validate();
  sensor.validate();
  detail::require(sensor.sigma_n > 0.0, "mutual information diverges for sigma_n = 0");
  detail::require(samples.size() >= 1000, "mi_monte_carlo needs at least 1000 samples");
  const double s = std::hypot(mix.sigma_T, sensor.sigma_n);
  // Two-pass mean/variance over the per-sample log ratios.
  std::vector<double> terms;
  terms.reserve(samples.size());
  for (const auto& r : samples) {
    terms.push_back(detail::log_normal_pdf(r.m - r.x, 0.0, sensor.sigma_n) -
                    detail::log_mixture_pdf(r.m, mix, s));
  }
  const double n = static_cast<double>(terms.size());
  long double sum = 0.0L;
  for (double t : terms) sum += t;
  const double mean = static_cast<double>(sum / terms.size());
  long double ss = 0.0L;
  for (double t : terms) ss += (t - mean) * (t - mean);
  return {mean, std::sqrt(static_cast<double>(ss / terms.size()) / n), terms.size()};
}

struct ErasureProbability {
  double value = 0.0;
  bool out_of_range = false;  // value fell outside [0, 1]; reported unclamped
};

/// Feedback success probability p_ol - 0.5·Φ(-L/√(σ_T² + σ_n²)): the open-loop
/// rate minus right-well particles misread as already reset.
inline ErasureProbability erasure_prob_analytic(double p_ol, const MixtureModel& mix, const SensorModel& sensor) {
  detail::require(std::isfinite(p_ol) && p_ol >= 0.0 && p_ol <= 1.0, "p_ol must lie in [0, 1]");
  mix.validate();
  sensor.validate();
  const double spread = std::hypot(mix.sigma_T, sensor.sigma_n);
  const double p = p_ol - 0.5 * normal_cdf(-mix.L / spread);
  return {p, p < 0.0 || p > 1.0};
}

}  // namespace erasure
