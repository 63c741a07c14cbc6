#pragma once

// Ensemble statistics over erasure runs and the quasistatic extrapolation of
// mean feedback work, ⟨W⟩(d) = A + B·g(d), g(d) = exp(-0.99/(d-0.5))/√(d-0.5).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "erasure/common.hpp"
#include "erasure/run.hpp"

namespace erasure {

struct EnsembleStats {
  ProtocolKind kind = ProtocolKind::feedback;
  double d = 0.0;
  std::optional<double> sigma_n;  // nm
  std::size_t n_runs = 0;
  double mean_W = 0.0;     // k_BT
  double se_W = 0.0;       // k_BT
  double p_hat = 0.0;
  double se_p = 0.0;
  double zero_mass = 0.0;  // fraction of runs with exactly zero work
};

inline EnsembleStats aggregate(std::span<const ErasureRun> runs) {
  detail::require(runs.size() >= 2, "aggregate needs at least 2 runs");
  EnsembleStats s;
  s.kind = runs.front().kind;
  s.d = runs.front().d;
  s.sigma_n = runs.front().sigma_n;
  s.n_runs = runs.size();
  double m2 = 0.0;
  std::size_t successes = 0;
  std::size_t zeros = 0;
  std::size_t n = 0;
  for (const auto& r : runs) {
    detail::require(r.kind == s.kind && r.d == s.d && r.sigma_n == s.sigma_n,
                    "aggregate requires runs sharing protocol, d and sigma_n");
    ++n;
    const double delta = r.W_total - s.mean_W;
    s.mean_W += delta / static_cast<double>(n);
    m2 += delta * (r.W_total - s.mean_W);
    if (r.success) ++successes;
    if (r.W_total == 0.0) ++zeros;
  }
  const double nn = static_cast<double>(n);
  s.se_W = std::sqrt(m2 / (nn - 1.0) / nn);
  s.p_hat = static_cast<double>(successes) / nn;
  s.se_p = std::sqrt(s.p_hat * (1.0 - s.p_hat) / nn);
  s.zero_mass = static_cast<double>(zeros) / nn;
  return s;
}

/// Work distribution with the zero-work runs held in a separate atom.
struct WorkHistogram {
  double zero_mass = 0.0;
  double origin = 0.0;     // k_BT, left edge of bin 0
  double bin_width = 1.0;  // k_BT
  std::vector<double> masses;

  double total_mass() const {
    double m = zero_mass;
    for (double v : masses) m += v;
    return m;
  }
};

inline WorkHistogram work_histogram(std::span<const ErasureRun> runs, double bin_width) {
  detail::require(std::isfinite(bin_width) && bin_width > 0.0, "bin width must be > 0");
  WorkHistogram h;
  h.bin_width = bin_width;
  if (runs.empty()) return h;
  const double unit = 1.0 / static_cast<double>(runs.size());

  bool any = false;
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& r : runs) {
    if (r.W_total == 0.0) continue;
    lo = any ? std::min(lo, r.W_total) : r.W_total;
    hi = any ? std::max(hi, r.W_total) : r.W_total;
    any = true;
  }
  if (any) {
    h.origin = std::floor(lo / bin_width) * bin_width;
    h.masses.assign(static_cast<std::size_t>(std::floor((hi - h.origin) / bin_width)) + 1, 0.0);
  }
  std::size_t zeros = 0;
  for (const auto& r : runs) {
    if (r.W_total == 0.0) {
      ++zeros;
      continue;
    }
    auto i = static_cast<std::size_t>(std::floor((r.W_total - h.origin) / bin_width));
    if (i >= h.masses.size()) i = h.masses.size() - 1;
    h.masses[i] += unit;
  }
  h.zero_mass = static_cast<double>(zeros) * unit;
  return h;
}

/// Regressor of the work model; strictly increasing on (0.5, 1).
inline double work_model_regressor(double d) {
  detail::require(std::isfinite(d) && d > 0.5, "work model needs d > 0.5");
  return std::exp(-0.99 / (d - 0.5)) / std::sqrt(d - 0.5);
}

struct FitResult {
  double A = 0.0;  // k_BT
  double B = 0.0;  // k_BT
  std::array<std::array<double, 2>, 2> cov{};
  double chi2 = 0.0;
  std::size_t dof = 0;

  double se_A() const { return std::sqrt(cov[0][0]); }
  double se_B() const { return std::sqrt(cov[1][1]); }
  double predict(double d) const { return A + B * work_model_regressor(d); }

  /// (θ - θ̂)ᵀ cov⁻¹ (θ - θ̂) for a candidate (A, B).
  double mahalanobis2(double a, double b) const {
    const double det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    const double da = a - A;
    const double db = b - B;
    return (cov[1][1] * da * da - 2.0 * cov[0][1] * da * db + cov[0][0] * db * db) / det;
  }
};

/// Weighted least squares with weights 1/se_W² over the (d, mean_W) points.
inline FitResult fit_work_model(std::span<const EnsembleStats> points) {
  detail::require(points.size() >= 3, "fit needs at least 3 points");
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, sy = 0.0, sgy = 0.0;
  for (const auto& p : points) {
    detail::require(std::isfinite(p.se_W) && p.se_W > 0.0, "fit needs se_W > 0 at every point");
    const double g = work_model_regressor(p.d);
    const double wt = 1.0 / (p.se_W * p.se_W);
    s0 += wt;
    s1 += wt * g;
    s2 += wt * g * g;
    sy += wt * p.mean_W;
    sgy += wt * g * p.mean_W;
  }
  const double det = s0 * s2 - s1 * s1;
  detail::require(det > 1e-12 * s0 * s2, "singular normal equations (duty ratios not distinct)");

  FitResult fit;
  fit.A = (s2 * sy - s1 * sgy) / det;
  fit.B = (s0 * sgy - s1 * sy) / det;
  fit.cov = {{{s2 / det, -s1 / det}, {-s1 / det, s0 / det}}};
  for (const auto& p : points) {
    const double r = (p.mean_W - fit.predict(p.d)) / p.se_W;
    fit.chi2 += r * r;
  }
  fit.dof = points.size() - 2;
  return fit;
}

struct DeficitReport {
  double deficit = 0.0;     // ln2 - A, k_BT
  double se_deficit = 0.0;  // = SE(A)
  double I = 0.0;           // nats
  double difference = 0.0;  // deficit - I
  bool consistent = false;  // |deficit - I| <= 2 SE(A)
};

inline DeficitReport deficit_report(double A, double se_A, double I) {
  DeficitReport r;
  r.deficit = kLn2 - A;
  r.se_deficit = se_A;
  r.I = I;
  r.difference = r.deficit - I;
  r.consistent = std::abs(r.difference) <= 2.0 * se_A;
  return r;
}

inline DeficitReport deficit_report(const FitResult& fit, double I) { return deficit_report(fit.A, fit.se_A(), I); }

}  // namespace erasure
