#pragma once

// Feedback and open-loop erasure of the one-bit memory.
//
// Phases for a feedback run:
//   [0, t_m)        symmetric trap (d = 0.5), particle thermalises
//   t_m             reading m = x + η; tilt only if m > 0
//   [t_m, t_f)      tilted trap (d = d_erase) if acted, else symmetric
//   [t_f, t_e)      symmetric again, relaxation
//   t_e             stored reading cleared; bookkeeping only
// The reset state is the left well; success means x(t_e) < 0.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>

#include "erasure/common.hpp"
#include "erasure/dynamics.hpp"
#include "erasure/energetics.hpp"
#include "erasure/measurement.hpp"
#include "erasure/potential.hpp"
#include "erasure/rng.hpp"
#include "erasure/run.hpp"

namespace erasure {

inline constexpr double kSymmetricDuty = 0.5;

struct ProtocolSchedule {
  double t_m = 0.1;       // s
  double tau = 30.0;      // s
  double t_relax = 2.0;   // s
  double d_erase = 0.7;

  double t_f() const { return t_m + tau; }
  double t_e() const { return t_f() + t_relax; }

  void validate() const {
    detail::require(std::isfinite(t_m) && t_m >= 0.0, "protocol.t_m_s must be >= 0");
    detail::require(std::isfinite(tau) && tau > 0.0, "protocol tau must be > 0");
    detail::require(std::isfinite(t_relax) && t_relax >= 0.0, "protocol.t_relax_s must be >= 0");
    detail::require(std::isfinite(d_erase) && d_erase > 0.5 && d_erase < 1.0,
                    "erasure duty ratio must lie in (0.5, 1)");
  }
};

/// Reset state is the left well; the plateau is split at x = 0.
inline bool classify_outcome(double x_final) {
  detail::require_finite(x_final, "final position");
  return x_final < 0.0;
}

/// Erasure duration scaled from a reference point,
/// τ(d) = τ_ref · g(d)/g(d_ref) with g(d) = exp(0.99/(d-0.5))·(d-0.5)^exponent.
inline double tau_for_duty(double d, double tau_ref, double d_ref, double exponent = 0.5) {
  detail::require(std::isfinite(d) && d > 0.5 && d < 1.0, "duty ratio must lie in (0.5, 1)");
  detail::require(std::isfinite(d_ref) && d_ref > 0.5 && d_ref < 1.0, "reference duty ratio must lie in (0.5, 1)");
  detail::require(std::isfinite(tau_ref) && tau_ref > 0.0, "reference tau must be > 0");
  // Work in logs; exp(0.99/(d-0.5)) overflows long before d reaches 0.5.
  auto log_g = [exponent](double x) { return 0.99 / (x - 0.5) + exponent * std::log(x - 0.5); };
  return tau_ref * std::exp(log_g(d) - log_g(d_ref));
}

namespace detail {

inline Well draw_initial_well(InitWell init, const SimConfig& cfg, std::uint64_t stream_id) {
  if (init == InitWell::left) return Well::left;
  if (init == InitWell::right) return Well::right;
  rng::Stream s(cfg.seed, stream_id, rng::Substream::initialization);
  return s.uniform() < 0.5 ? Well::left : Well::right;
}

inline ErasureRun run_protocol(ProtocolKind kind, const ProtocolSchedule& sched, const SimConfig& cfg,
                               const PotentialParams& params, const SensorModel* sensor, InitWell init,
                               std::uint64_t stream_id) {
  params.validate();
  cfg.validate(params);
  sched.validate();
  if (sensor) sensor->validate();

  ErasureRun run;
  run.run_id = stream_id;
  run.kind = kind;
  run.d = sched.d_erase;
  run.initial_well = draw_initial_well(init, cfg, stream_id);

  const double x0 = run.initial_well == Well::left ? -params.L : params.L;
  LangevinIntegrator integrator(cfg, stream_id, x0);
  BistableForce force{params, kSymmetricDuty, cfg.mode, cfg.t_mux};

  const std::uint64_t n_m = steps_for(sched.t_m, cfg.dt);
  const std::uint64_t n_tau = steps_for(sched.tau, cfg.dt);
  const std::uint64_t n_relax = steps_for(sched.t_relax, cfg.dt);

  integrator.advance(n_m, force);
  run.x_at_tm = integrator.position();

  if (kind == ProtocolKind::feedback) {
    // Own substream, so σ_n changes the reading but never the thermal noise.
    rng::Stream meas(cfg.seed, stream_id, rng::Substream::measurement);
    run.sigma_n = sensor->sigma_n;
    run.m = sample_measurement(run.x_at_tm, *sensor, meas.normal());
    run.action = decide_action(*run.m);
  } else {
    run.action = Action::act;
  }

  const double kT = cfg.kT();
  if (run.action == Action::act) {
    run.W1 = switch_work(integrator.position(), kSymmetricDuty, sched.d_erase, params, kT);
    force.duty = sched.d_erase;
    integrator.advance(n_tau, force);
    run.W2 = switch_work(integrator.position(), sched.d_erase, kSymmetricDuty, params, kT);
    force.duty = kSymmetricDuty;
    integrator.advance(n_relax, force);
    run.W_total = run.W1 + run.W2;
  } else {
    integrator.advance(n_tau + n_relax, force);
  }

  run.x_final = integrator.position();
  run.success = classify_outcome(run.x_final);
  return run;
}

}  // namespace detail

/// Measures at t_m and tilts only on a positive reading.
inline ErasureRun run_feedback_erasure(const ProtocolSchedule& sched, const SimConfig& cfg,
                                       const PotentialParams& params, const SensorModel& sensor, InitWell init,
                                       std::uint64_t stream_id) {
  return detail::run_protocol(ProtocolKind::feedback, sched, cfg, params, &sensor, init, stream_id);
}

/// Tilts unconditionally; no reading is taken.
inline ErasureRun run_openloop_erasure(const ProtocolSchedule& sched, const SimConfig& cfg,
                                       const PotentialParams& params, InitWell init, std::uint64_t stream_id) {
  return detail::run_protocol(ProtocolKind::open_loop, sched, cfg, params, nullptr, init, stream_id);
}

}  // namespace erasure
