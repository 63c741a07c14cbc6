#pragma once

// Overdamped Langevin dynamics, γ dx/dt = F(x, t) + ξ(t), ⟨ξξ'⟩ = 2γk_BT δ,
// integrated with Euler–Maruyama.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "erasure/common.hpp"
#include "erasure/potential.hpp"
#include "erasure/rng.hpp"

namespace erasure {

/// How the two traps are presented to the particle: the duty-averaged
/// potential, or the instantaneous potential switching with r(t).
enum class PotentialMode { averaged, multiplexed };

struct SimConfig {
  double T = 300.0;          // K
  double gamma = 4.5e-6;     // pN·s/nm
  double dt = 5e-5;          // s
  PotentialMode mode = PotentialMode::averaged;
  double t_mux = 1e-5;       // s
  std::uint64_t seed = 20190917;
  std::size_t record_stride = 1;
  double escape_bound = 1e6;  // nm

  double kT() const { return thermal_energy(T); }

  /// Diffusion step scale sqrt(2 k_BT dt / γ), nm.
  double noise_scale() const { return std::sqrt(2.0 * kT() * dt / gamma); }

  void validate(const PotentialParams& params) const {
    detail::require(std::isfinite(T) && T > 0.0, "sim.T_K must be > 0");
    detail::require(std::isfinite(gamma) && gamma > 0.0, "sim.gamma_pNs_per_nm must be > 0");
    detail::require(std::isfinite(dt) && dt > 0.0, "sim.dt_s must be > 0");
    detail::require(dt < 2.0 * gamma / params.k,
                    "sim.dt_s must be below 2*gamma/k for Euler-Maruyama stability");
    detail::require(std::isfinite(t_mux) && t_mux > 0.0, "sim.t_mux_s must be > 0");
    if (mode == PotentialMode::multiplexed) {
      detail::require(dt <= t_mux / 10.0 * (1.0 + 1e-12),
                      "sim.dt_s must be <= t_mux/10 in multiplexed mode");
    }
    detail::require(record_stride >= 1, "sim.record_stride must be >= 1");
    detail::require(std::isfinite(escape_bound) && escape_bound > 0.0,
                    "sim.escape_bound_nm must be > 0");
  }
};

/// Integration left the admissible region; usually dt is too large.
class EscapeError : public std::runtime_error {
 public:
  EscapeError(double time_s, double position_nm)
      : std::runtime_error(describe(time_s, position_nm)), time_s_(time_s), position_nm_(position_nm) {}

  double time_s() const { return time_s_; }
  double position_nm() const { return position_nm_; }

 private:
  static std::string describe(double t, double x) {
    std::ostringstream os;
    os << "particle escaped the integration bound at t=" << t << " s (x=" << x << " nm)";
    return os.str();
  }
  double time_s_;
  double position_nm_;
};

/// Laser location at time t: left for the first d·t_mux of each period.
inline LaserSide multiplex_r(double t, double d, double t_mux) {
  detail::require(t >= 0.0, "time must be >= 0");
  detail::require(t_mux > 0.0, "t_mux must be > 0");
  const double cycles = t / t_mux;
  const double phase = cycles - std::floor(cycles);
  return phase < d ? LaserSide::left : LaserSide::right;
}

/// Force from the bistable trap in either presentation mode. The multiplexed
/// flag is sampled at the step midpoint, so a duty ratio is realised exactly
/// whenever d·t_mux is a whole number of steps.
struct BistableForce {
  PotentialParams params;
  double duty = 0.5;
  PotentialMode mode = PotentialMode::averaged;
  double t_mux = 1e-5;

  double operator()(double x, double t_mid) const {
    if (mode == PotentialMode::averaged) return detail::effective_force_unchecked(x, duty, params);
    const double cycles = t_mid / t_mux;
    const auto r = (cycles - std::floor(cycles)) < duty ? LaserSide::left : LaserSide::right;
    return detail::bistable_force_unchecked(x, r, params);
  }
};

/// A lone trap centred at the origin.
struct SingleWellForce {
  PotentialParams params;
  double operator()(double x, double) const { return detail::capped_quadratic_force(x, 0.0, params); }
};

/// One Euler–Maruyama step. `r` must be given exactly when cfg.mode is
/// multiplexed; it selects the instantaneous trap.
inline double step_em(double x, double d, std::optional<LaserSide> r, const SimConfig& cfg,
                      const PotentialParams& params, double noise) {
  detail::require_finite(x, "position");
  detail::require(r.has_value() == (cfg.mode == PotentialMode::multiplexed),
                  "laser flag must be given iff mode is multiplexed");
  double force;
  if (r) {
    force = detail::bistable_force_unchecked(x, *r, params);
  } else {
    detail::require_duty(d);
    force = detail::effective_force_unchecked(x, d, params);
  }
  const double next = x + force / cfg.gamma * cfg.dt + cfg.noise_scale() * noise;
  if (!(std::abs(next) <= cfg.escape_bound)) {
    throw EscapeError(std::numeric_limits<double>::quiet_NaN(), next);
  }
  return next;
}

/// Stateful Euler–Maruyama integrator over an addressed noise stream.
class LangevinIntegrator {
 public:
  LangevinIntegrator(const SimConfig& cfg, std::uint64_t stream_id, double x0)
      : dt_(cfg.dt),
        drift_scale_(cfg.dt / cfg.gamma),
        noise_scale_(cfg.noise_scale()),
        bound_(cfg.escape_bound),
        x_(x0),
        noise_(cfg.seed, stream_id, rng::Substream::dynamics) {
    detail::require_finite(x0, "initial position");
  }

  /// Advances n steps under `force`; calls on_step(step_index, x) after each.
  template <class Force, class Observer>
  void advance(std::uint64_t n_steps, const Force& force, Observer&& on_step) {
    for (std::uint64_t i = 0; i < n_steps; ++i) {
      const double t_mid = (static_cast<double>(step_) + 0.5) * dt_;
      x_ += force(x_, t_mid) * drift_scale_ + noise_scale_ * noise_.normal();
      ++step_;
      if (!(std::abs(x_) <= bound_)) throw EscapeError(time(), x_);
      on_step(step_, x_);
    }
  }

  template <class Force>
  void advance(std::uint64_t n_steps, const Force& force) {
    advance(n_steps, force, [](std::uint64_t, double) {});
  }

  double position() const { return x_; }
  std::uint64_t step_count() const { return step_; }
  double time() const { return static_cast<double>(step_) * dt_; }

 private:
  double dt_;
  double drift_scale_;
  double noise_scale_;
  double bound_;
  double x_;
  std::uint64_t step_ = 0;
  rng::Stream noise_;
};

/// Number of whole steps covering `duration`.
inline std::uint64_t steps_for(double duration, double dt) {
  detail::require(duration >= 0.0, "duration must be >= 0");
  return static_cast<std::uint64_t>(std::llround(duration / dt));
}

/// Piecewise-constant duty ratio over [0, horizon).
struct DutySchedule {
  struct Segment {
    double t_begin;  // s
    double duty;
  };
  std::vector<Segment> segments;
  double horizon = 0.0;  // s

  static DutySchedule constant(double duty, double horizon) { return {{{0.0, duty}}, horizon}; }

  void validate() const {
    detail::require(!segments.empty(), "duty schedule has no segments");
    detail::require(segments.front().t_begin == 0.0, "duty schedule must start at t=0");
    for (std::size_t i = 0; i < segments.size(); ++i) {
      detail::require_duty(segments[i].duty);
      if (i > 0) {
        detail::require(segments[i].t_begin > segments[i - 1].t_begin,
                        "duty schedule segments must be strictly increasing in time");
      }
    }
    detail::require(horizon > segments.back().t_begin, "duty schedule horizon must follow the last segment");
  }

  double duty_at(double t) const {
    double d = segments.front().duty;
    for (const auto& s : segments) {
      if (s.t_begin <= t) d = s.duty;
    }
    return d;
  }
};

struct Trajectory {
  std::vector<double> times;      // s
  std::vector<double> positions;  // nm
  std::vector<double> duties;     // d(t) at each recorded sample
  std::uint64_t seed_used = 0;
  std::uint64_t stream_id = 0;
};

/// Integrates from x0 through every schedule segment, recording t=0 and every
/// record_stride-th step thereafter.
inline Trajectory simulate_trajectory(double x0, const DutySchedule& schedule, const SimConfig& cfg,
                                      const PotentialParams& params, std::uint64_t stream_id) {
  params.validate();
  cfg.validate(params);
  schedule.validate();

  Trajectory traj;
  traj.seed_used = cfg.seed;
  traj.stream_id = stream_id;
  const std::uint64_t total = steps_for(schedule.horizon, cfg.dt);
  const std::size_t stride = cfg.record_stride;
  traj.times.reserve(total / stride + 1);
  traj.positions.reserve(total / stride + 1);
  traj.duties.reserve(total / stride + 1);

  LangevinIntegrator integrator(cfg, stream_id, x0);
  BistableForce force{params, schedule.segments.front().duty, cfg.mode, cfg.t_mux};
  auto record = [&](std::uint64_t step, double x) {
    if (step % stride != 0) return;
    traj.times.push_back(static_cast<double>(step) * cfg.dt);
    traj.positions.push_back(x);
    traj.duties.push_back(force.duty);
  };
  record(0, x0);
  for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
    const std::uint64_t begin = steps_for(schedule.segments[i].t_begin, cfg.dt);
    const std::uint64_t end =
        i + 1 < schedule.segments.size() ? steps_for(schedule.segments[i + 1].t_begin, cfg.dt) : total;
    force.duty = schedule.segments[i].duty;
    if (end > begin) integrator.advance(end - begin, force, record);
  }
  return traj;
}

struct StationaryStats {
  double mean = 0.0;      // nm
  double variance = 0.0;  // nm², unbiased
  std::size_t n = 0;
};

/// Sample mean and variance of positions recorded in [t_begin, t_end].
inline StationaryStats stationary_stats(const Trajectory& traj, double t_begin, double t_end) {
  StationaryStats s;
  double m2 = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.times[i] < t_begin || traj.times[i] > t_end) continue;
    ++s.n;
    const double delta = traj.positions[i] - s.mean;
    s.mean += delta / static_cast<double>(s.n);
    m2 += delta * (traj.positions[i] - s.mean);
  }
  detail::require(s.n > 0, "stationary_stats window contains no samples");
  s.variance = s.n > 1 ? m2 / static_cast<double>(s.n - 1) : 0.0;
  return s;
}

/// Exponential relaxation time from the autocorrelation of uniformly sampled
/// stationary series: least-squares slope of ln ρ(lag) through the origin,
/// over lags where ρ stays above `floor`.
inline double relaxation_time(std::span<const std::vector<double>> series, double sample_interval,
                              double floor = 0.2) {
  detail::require(!series.empty(), "relaxation_time needs at least one series");
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : series) {
    for (double x : s) sum += x;
    count += s.size();
  }
  detail::require(count > 2, "relaxation_time needs samples");
  const double mean = sum / static_cast<double>(count);
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& s : series) {
      for (std::size_t i = 0; i + lag < s.size(); ++i) acc += (s[i] - mean) * (s[i + lag] - mean);
      n += s.size() > lag ? s.size() - lag : 0;
    }
    return n > 0 ? acc / static_cast<double>(n) : 0.0;
  };
  const double c0 = autocov(0);
  detail::require(c0 > 0.0, "relaxation_time needs a fluctuating series");
  double st = 0.0;
  double tt = 0.0;
  for (std::size_t lag = 1;; ++lag) {
    const double rho = autocov(lag) / c0;
    if (!(rho > floor)) break;
    const double t = static_cast<double>(lag) * sample_interval;
    st += t * std::log(rho);
    tt += t * t;
  }
  detail::require(tt > 0.0, "sampling too coarse to resolve the relaxation time");
  return -tt / st;
}

}  // namespace erasure
