#pragma once

// Capped-quadratic trap potentials.
//
// A single optical trap is a harmonic well of stiffness k that flattens to a
// plateau at |x| > w. Two traps at ±L, time-multiplexed with duty ratio d
// (fraction of each period spent at the left trap), form the bistable memory.
// Energies are pN·nm, positions nm, forces pN.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "erasure/common.hpp"

namespace erasure {

struct PotentialParams {
  double k = 0.0045;   // pN/nm
  double w = 175.0;    // nm
  double L = 550.0;    // nm
  double U_r = 0.0;    // pN·nm

  void validate() const {
    detail::require(std::isfinite(k) && k > 0.0, "potential.k_pN_per_nm must be > 0");
    detail::require(std::isfinite(w) && w > 0.0, "potential.w_nm must be > 0");
    detail::require(std::isfinite(L) && L > w, "potential.L_nm must exceed potential.w_nm");
    detail::require(std::isfinite(U_r), "potential.U_r_pNnm must be finite");
  }

  /// ½kw² + U_r, the energy everywhere outside the active well(s).
  double plateau() const { return 0.5 * k * w * w + U_r; }
};

/// Which trap the multiplexed laser is currently at (the r(t) flag).
enum class LaserSide : int { left = 0, right = 1 };

namespace detail {

// Capped quadratic around `center`, relative to U_r. Seam |x-c| = w belongs to
// the quadratic branch.
inline double capped_quadratic(double x, double center, const PotentialParams& p) {
  const double u = x - center;
  return std::abs(u) <= p.w ? 0.5 * p.k * u * u : 0.5 * p.k * p.w * p.w;
}

inline double capped_quadratic_force(double x, double center, const PotentialParams& p) {
  const double u = x - center;
  return std::abs(u) <= p.w ? -p.k * u : 0.0;
}

inline double effective_energy_unchecked(double x, double d, const PotentialParams& p) {
  return d * capped_quadratic(x, -p.L, p) + (1.0 - d) * capped_quadratic(x, p.L, p) + p.U_r;
}

inline double effective_force_unchecked(double x, double d, const PotentialParams& p) {
  return d * capped_quadratic_force(x, -p.L, p) + (1.0 - d) * capped_quadratic_force(x, p.L, p);
}

inline double bistable_force_unchecked(double x, LaserSide r, const PotentialParams& p) {
  return capped_quadratic_force(x, r == LaserSide::right ? p.L : -p.L, p);
}

inline void require_duty(double d) {
  require(std::isfinite(d) && d > 0.0 && d < 1.0, "duty ratio must lie in (0, 1)");
}

}  // namespace detail

/// Single trap centred at the origin.
inline double single_well_energy(double x, const PotentialParams& params) {
  detail::require_finite(x, "position");
  return detail::capped_quadratic(x, 0.0, params) + params.U_r;
}

inline double single_well_force(double x, const PotentialParams& params) {
  detail::require_finite(x, "position");
  return detail::capped_quadratic_force(x, 0.0, params);
}

/// Instantaneous potential with the laser parked at one trap.
inline double bistable_energy(double x, LaserSide r, const PotentialParams& params) {
  detail::require_finite(x, "position");
  return detail::capped_quadratic(x, r == LaserSide::right ? params.L : -params.L, params) +
         params.U_r;
}

inline double bistable_force(double x, LaserSide r, const PotentialParams& params) {
  detail::require_finite(x, "position");
  return detail::bistable_force_unchecked(x, r, params);
}

/// Duty-averaged potential d·U_left + (1-d)·U_right. Valid when the
/// multiplexing period is much shorter than the particle relaxation time.
inline double effective_energy(double x, double d, const PotentialParams& params) {
  detail::require_finite(x, "position");
  detail::require_duty(d);
  return detail::effective_energy_unchecked(x, d, params);
}

/// -∂U_eff/∂x. Exactly zero on the plateau.
inline double effective_force(double x, double d, const PotentialParams& params) {
  detail::require_finite(x, "position");
  detail::require_duty(d);
  return detail::effective_force_unchecked(x, d, params);
}

/// Uniformly binned position counts.
struct PositionHistogram {
  double origin = 0.0;     // left edge of bin 0, nm
  double bin_width = 1.0;  // nm
  std::vector<std::size_t> counts;
  std::size_t outside = 0;  // samples that fell outside the binned range

  PositionHistogram() = default;
  PositionHistogram(double lo, double hi, double width) : origin(lo), bin_width(width) {
    detail::require(width > 0.0 && hi > lo, "histogram range must be non-empty with positive bin width");
    counts.assign(static_cast<std::size_t>(std::ceil((hi - lo) / width)), 0);
  }

  void add(double x) {
    const double f = std::floor((x - origin) / bin_width);
    if (f < 0.0 || f >= static_cast<double>(counts.size())) {
      ++outside;
      return;
    }
    ++counts[static_cast<std::size_t>(f)];
  }

  void add(std::span<const double> xs) {
    for (double x : xs) add(x);
  }

  double center(std::size_t i) const { return origin + (static_cast<double>(i) + 0.5) * bin_width; }

  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }
};

/// Reconstructed energy profile; bins with no samples are omitted.
struct PotentialCurve {
  std::vector<double> grid;    // nm, strictly increasing
  std::vector<double> values;  // pN·nm
  double C = 1.0;              // normalisation of P inside the logarithm
  std::vector<std::size_t> counts;  // samples behind each value
};

/// Boltzmann inversion U_i = -k_BT ln(P_i / C) over bin weights (counts or
/// probabilities). C is the largest bin probability, so the minimum of the
/// curve is exactly zero. Zero-weight bins are omitted rather than set to +inf.
inline PotentialCurve reconstruct_potential(std::span<const double> centers,
                                            std::span<const double> weights,
                                            double temperature_K) {
  detail::require(temperature_K > 0.0, "temperature must be > 0");
  detail::require(centers.size() == weights.size(), "centers and weights differ in length");
  double total = 0.0;
  double peak = 0.0;
  for (double wgt : weights) {
    detail::require(std::isfinite(wgt) && wgt >= 0.0, "histogram weights must be >= 0");
    total += wgt;
    peak = std::max(peak, wgt);
  }
  detail::require(total > 0.0, "cannot reconstruct a potential from an empty histogram");

  PotentialCurve curve;
  curve.C = peak / total;
  const double kT = thermal_energy(temperature_K);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    if (!curve.grid.empty()) {
      detail::require(centers[i] > curve.grid.back(), "bin centers must be strictly increasing");
    }
    curve.grid.push_back(centers[i]);
    curve.values.push_back(-kT * std::log((weights[i] / total) / curve.C));
    curve.counts.push_back(static_cast<std::size_t>(weights[i]));
  }
  return curve;
}

inline PotentialCurve reconstruct_potential(const PositionHistogram& hist, double temperature_K) {
  std::vector<double> centers(hist.counts.size());
  std::vector<double> weights(hist.counts.size());
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    centers[i] = hist.center(i);
    weights[i] = static_cast<double>(hist.counts[i]);
  }
  return reconstruct_potential(centers, weights, temperature_K);
}

}  // namespace erasure
