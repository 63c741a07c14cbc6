#pragma once

// Stochastic work and the second-law bookkeeping of feedback erasure.
// Analysis-facing energies are in units of k_BT; mutual information in nats.

#include <cmath>
#include <span>

#include "erasure/common.hpp"
#include "erasure/potential.hpp"
#include "erasure/run.hpp"

namespace erasure {

/// Work of an instantaneous duty switch at fixed position,
/// [U_eff(x, d_new) - U_eff(x, d_old)] / k_BT. Always uses the duty-averaged
/// potential, whichever mode drives the dynamics.
inline double switch_work(double x, double d_old, double d_new, const PotentialParams& params, double kT) {
  detail::require_finite(x, "position");
  detail::require_duty(d_old);
  detail::require_duty(d_new);
  detail::require(kT > 0.0, "k_BT must be > 0");
  if (d_old == d_new) return 0.0;
  return (detail::effective_energy_unchecked(x, d_new, params) -
          detail::effective_energy_unchecked(x, d_old, params)) /
         kT;
}

/// Generalised Landauer bound ln2 + p ln p + (1-p) ln(1-p), with 0·ln0 = 0.
inline double glb(double p) {
  detail::require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "success probability must lie in [0, 1]");
  auto xlogx = [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; };
  return kLn2 + xlogx(p) + xlogx(1.0 - p);
}

/// Least mean feedback work after gaining I nats: glb(p) - I. May be negative.
inline double feedback_bound(double I, double p) {
  detail::require(std::isfinite(I) && I >= 0.0, "mutual information must be >= 0");
  return glb(p) - I;
}

/// Deficit below the Landauer limit that the feedback bound permits,
/// ln2 - feedback_bound(I, p); returns exactly I when p = 1.
inline double bound_deficit(double I, double p) {
  detail::require(std::isfinite(I) && I >= 0.0, "mutual information must be >= 0");
  return I + (kLn2 - glb(p));
}

struct LedgerReport {
  double mean_W_fb = 0.0;              // k_BT
  double se_W_fb = 0.0;                // k_BT
  double delta_F_particle = 0.0;       // k_BT, glb(p̂)
  double I = 0.0;                      // nats
  double bound_fb = 0.0;               // k_BT
  double bound_meas_plus_reset = 0.0;  // k_BT
  double slack_fb = 0.0;               // k_BT
  bool satisfied = false;
};

/// Ledger from ensemble moments; `p` is the achieved success probability.
inline LedgerReport ledger_from_moments(double mean_W, double se_W, double p, double I) {
  detail::require(std::isfinite(mean_W), "mean work must be finite");
  detail::require(std::isfinite(se_W) && se_W >= 0.0, "standard error must be >= 0");
  LedgerReport r;
  r.mean_W_fb = mean_W;
  r.se_W_fb = se_W;
  r.delta_F_particle = glb(p);
  r.I = I;
  r.bound_fb = feedback_bound(I, p);
  // Measurement costs at least F(M) - F(M⁻) + k_BT·I and reset at least
  // F(M⁻) - F(M); the device terms cancel in the sum.
  r.bound_meas_plus_reset = I;
  r.slack_fb = r.mean_W_fb - r.bound_fb;
  r.satisfied = r.slack_fb > -2.0 * r.se_W_fb;
  return r;
}

/// Second-law check of the feedback phase over an ensemble of runs.
inline LedgerReport ledger_check(std::span<const ErasureRun> runs, double I) {
  detail::require(runs.size() >= 30, "ledger_check needs at least 30 runs");
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t successes = 0;
  std::size_t n = 0;
  for (const auto& run : runs) {
    ++n;
    const double delta = run.W_total - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (run.W_total - mean);
    if (run.success) ++successes;
  }
  const double se = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  return ledger_from_moments(mean, se, static_cast<double>(successes) / static_cast<double>(n), I);
}

}  // namespace erasure
