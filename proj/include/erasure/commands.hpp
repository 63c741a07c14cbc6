#pragma once

// Subcommands behind the command-line tool. Each reads a validated RunConfig,
// writes its artifacts under the output directory and returns the JSON
// summary it wrote. Output depends only on the configuration and seed.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "erasure/analysis.hpp"
#include "erasure/config.hpp"
#include "erasure/dynamics.hpp"
#include "erasure/energetics.hpp"
#include "erasure/ensemble.hpp"
#include "erasure/io.hpp"
#include "erasure/measurement.hpp"
#include "erasure/potential.hpp"
#include "erasure/protocol.hpp"
#include "erasure/rng.hpp"

namespace erasure::commands {

namespace fs = std::filesystem;
using io::Json;

/// Success probability an ensemble must reach to count as an admissible erasure.
inline constexpr double kAdmissibleSuccess = 0.95;

struct Options {
  fs::path out_dir = "out";
  unsigned jobs = default_jobs();
};

inline std::string duty_tag(double d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "d%.3f", d);
  return buf;
}

inline fs::path runs_path(const fs::path& out, ProtocolKind kind, double d) {
  return out / "runs" / (std::string(to_string(kind)) + "_" + duty_tag(d) + ".csv");
}

struct ResolvedSigmaT {
  double value;
  std::string source;
};

/// σ_T from a prior `calibrate` in the same output directory, else the config.
inline ResolvedSigmaT resolve_sigma_T(const RunConfig& cfg, const fs::path& out) {
  const fs::path cal = out / "calibration.json";
  if (fs::exists(cal)) {
    const auto j = Json::parse(io::read_text(cal));
    return {j.at("sigma_T_nm").get<double>(), "calibration"};
  }
  return {cfg.mixture.sigma_T, "config"};
}

// ---- calibrate -------------------------------------------------------------

/// Equilibrium runs: single-well variance and relaxation time, the bistable
/// per-well spread σ_T at d = 0.5, and the Boltzmann-inverted potential.
inline Json calibrate(const RunConfig& cfg, const Options& opt) {
  const auto& p = cfg.potential;
  const double kT = cfg.sim.kT();
  const std::uint64_t n_steps = steps_for(cfg.calibration.duration_s, cfg.sim.dt);
  // Discard the first 10 relaxation times of the softest well.
  const std::uint64_t burn = std::min<std::uint64_t>(steps_for(10.0 * cfg.sim.gamma / (0.5 * p.k), cfg.sim.dt), n_steps / 2);
  const std::size_t n_traj = cfg.calibration.trajectories;

  // Single well, stiffness k.
  auto single = parallel_indexed(n_traj, opt.jobs, [&](std::size_t i) {
    LangevinIntegrator integ(cfg.sim, 1'000'000 + i, 0.0);
    std::vector<double> xs;
    xs.reserve(n_steps - burn);
    integ.advance(burn, SingleWellForce{p});
    integ.advance(n_steps - burn, SingleWellForce{p}, [&](std::uint64_t, double x) { xs.push_back(x); });
    return xs;
  });
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& s : single) {
    for (double x : s) {
      sum += x;
      sq += x * x;
    }
    n += s.size();
  }
  const double single_mean = sum / static_cast<double>(n);
  const double single_var = sq / static_cast<double>(n) - single_mean * single_mean;
  // Thin to ~γ/(20k) per sample before the autocorrelation fit.
  const std::size_t thin = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.sim.gamma / p.k / 20.0 / cfg.sim.dt));
  std::vector<std::vector<double>> thinned;
  for (const auto& s : single) {
    std::vector<double> t;
    for (std::size_t i = 0; i < s.size(); i += thin) t.push_back(s[i]);
    thinned.push_back(std::move(t));
  }
  const double tau_c = relaxation_time(thinned, static_cast<double>(thin) * cfg.sim.dt);

  // Bistable trap at d = 0.5, half the trajectories in each well.
  PositionHistogram hist(-p.L - p.w - cfg.calibration.bin_nm, p.L + p.w + cfg.calibration.bin_nm, cfg.calibration.bin_nm);
  auto wells = parallel_indexed(n_traj, opt.jobs, [&](std::size_t i) {
    const double x0 = i % 2 == 0 ? -p.L : p.L;
    LangevinIntegrator integ(cfg.sim, 2'000'000 + i, x0);
    BistableForce force{p, kSymmetricDuty, cfg.sim.mode, cfg.sim.t_mux};
    std::vector<double> xs;
    xs.reserve(n_steps - burn);
    integ.advance(burn, force);
    integ.advance(n_steps - burn, force, [&](std::uint64_t, double x) { xs.push_back(x); });
    return xs;
  });
  // Per-well spread from samples on each well's quadratic branch; excursions
  // onto the plateau belong to neither well.
  double well_sum[2] = {0.0, 0.0};
  double well_sq[2] = {0.0, 0.0};
  std::size_t well_n[2] = {0, 0};
  // One histogram sample per ~2.5 well relaxation times.
  const std::size_t hist_stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(2.5 * cfg.sim.gamma / (kSymmetricDuty * p.k) / cfg.sim.dt)));
  for (const auto& xs : wells) {
    for (std::size_t i = 0; i < xs.size(); i += hist_stride) hist.add(xs[i]);
    for (double x : xs) {
      const int side = x < 0.0 ? 0 : 1;
      const double u = x - (side == 0 ? -p.L : p.L);
      if (std::abs(u) > p.w) continue;
      well_sum[side] += u;
      well_sq[side] += u * u;
      ++well_n[side];
    }
  }
  Json per_well = Json::array();
  double var_acc = 0.0;
  std::size_t var_n = 0;
  for (int side = 0; side < 2; ++side) {
    if (well_n[side] < 2) continue;
    const double nn = static_cast<double>(well_n[side]);
    const double m = well_sum[side] / nn;
    const double v = well_sq[side] / nn - m * m;
    var_acc += v * nn;
    var_n += well_n[side];
    per_well.push_back({{"well", side == 0 ? "left" : "right"}, {"samples", well_n[side]},
                        {"mean_offset_nm", m}, {"variance_nm2", v}});
  }
  detail::require(var_n > 0, "calibration trajectories never sampled a well");
  const double well_var = var_acc / static_cast<double>(var_n);
  const double sigma_T = std::sqrt(well_var);

  const PotentialCurve curve = reconstruct_potential(hist, cfg.sim.T);
  io::write_text(opt.out_dir / "potential.csv", io::curve_csv(curve));

  // Largest deviation from U_eff(x, 0.5) over well-sampled bins, after
  // removing the count-weighted mean offset.
  double offset = 0.0, weight = 0.0;
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    if (curve.counts[i] < 100) continue;
    const double w = static_cast<double>(curve.counts[i]);
    offset += w * (curve.values[i] - effective_energy(curve.grid[i], kSymmetricDuty, p));
    weight += w;
  }
  offset /= weight;
  double max_dev = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    if (curve.counts[i] < 100) continue;
    ++used;
    const double dev = curve.values[i] - offset - effective_energy(curve.grid[i], kSymmetricDuty, p);
    max_dev = std::max(max_dev, std::abs(dev) / kT);
  }

  Json report{
      {"seed", cfg.sim.seed},
      {"single_well", {{"variance_nm2", single_var}, {"expected_variance_nm2", kT / p.k},
                       {"relaxation_time_s", tau_c}, {"expected_relaxation_time_s", cfg.sim.gamma / p.k}}},
      {"bistable", {{"duty", kSymmetricDuty}, {"wells", per_well}, {"pooled_variance_nm2", well_var},
                    {"expected_variance_nm2", kT / (kSymmetricDuty * p.k)}}},
      {"sigma_T_nm", sigma_T},
      {"reconstruction", {{"bins_used", used}, {"max_abs_deviation_kBT", max_dev}}},
      {"config", config_to_json(cfg)},
  };
  io::write_text(opt.out_dir / "calibration.json", io::dump(report));
  return report;
}

// ---- erase / sweep ---------------------------------------------------------

inline EnsembleRequest ensemble_request(const RunConfig& cfg, ProtocolKind kind, double d) {
  EnsembleRequest req;
  req.kind = kind;
  req.schedule = cfg.schedule_for(d);
  req.sim = cfg.sim;
  req.potential = cfg.potential;
  req.sensor = cfg.sensor;
  req.init = cfg.init;
  req.n_runs = cfg.n_runs;
  req.first_stream = 0;
  return req;
}

/// Work-histogram bin width used in the JSON summaries.
inline constexpr double kWorkBinWidth = 0.5;

inline Json ensemble_summary(std::span<const ErasureRun> runs, const ProtocolSchedule& sched) {
  Json j{{"tau_s", sched.tau}};
  if (runs.size() >= 2) j["stats"] = io::to_json(aggregate(runs));
  j["work_histogram"] = io::to_json(work_histogram(runs, kWorkBinWidth));
  return j;
}

/// One ensemble at (d, σ_n).
inline Json erase(const RunConfig& cfg, const Options& opt, ProtocolKind kind, double d) {
  const auto req = ensemble_request(cfg, kind, d);
  const auto runs = run_ensemble(req, opt.jobs);
  const std::string stem = "erase_" + std::string(to_string(kind)) + "_" + duty_tag(d);
  io::write_records(std::span<const ErasureRun>(runs), opt.out_dir / (stem + ".csv"), io::RecordFormat::csv);
  Json report{{"seed", cfg.sim.seed}, {"protocol", to_string(kind)}, {"d", d}};
  report["sigma_n_nm"] = kind == ProtocolKind::feedback ? Json(cfg.sensor.sigma_n) : Json(nullptr);
  report["ensemble"] = ensemble_summary(runs, req.schedule);
  report["config"] = config_to_json(cfg);
  io::write_text(opt.out_dir / (stem + ".json"), io::dump(report));
  return report;
}

/// Feedback and open-loop ensembles for every duty ratio in d_list.
inline Json sweep(const RunConfig& cfg, const Options& opt) {
  std::vector<EnsembleStats> fb_stats;
  std::vector<EnsembleStats> ol_stats;
  Json points = Json::array();
  for (double d : cfg.d_list) {
    Json point{{"d", d}};
    for (auto kind : {ProtocolKind::feedback, ProtocolKind::open_loop}) {
      const auto req = ensemble_request(cfg, kind, d);
      const auto runs = run_ensemble(req, opt.jobs);
      io::write_records(std::span<const ErasureRun>(runs), runs_path(opt.out_dir, kind, d), io::RecordFormat::csv);
      point[std::string(to_string(kind))] = ensemble_summary(runs, req.schedule);
      if (runs.size() >= 2) (kind == ProtocolKind::feedback ? fb_stats : ol_stats).push_back(aggregate(runs));
    }
    points.push_back(point);
  }
  io::write_records(std::span<const EnsembleStats>(fb_stats), opt.out_dir / "sweep_feedback.csv", io::RecordFormat::csv);
  io::write_records(std::span<const EnsembleStats>(ol_stats), opt.out_dir / "sweep_openloop.csv", io::RecordFormat::csv);
  Json report{{"seed", cfg.sim.seed}, {"points", points}, {"config", config_to_json(cfg)}};
  io::write_text(opt.out_dir / "sweep.json", io::dump(report));
  return report;
}

// ---- fit -------------------------------------------------------------------

inline Json fit(const RunConfig& cfg, const Options& opt) {
  const fs::path src = opt.out_dir / "sweep_feedback.csv";
  if (!fs::exists(src)) throw IoError("missing " + src.string() + "; run `sweep` first");
  const auto points = io::parse_stats_csv(io::read_text(src), ProtocolKind::feedback);
  const FitResult result = fit_work_model(points);
  Json report{{"seed", cfg.sim.seed},
              {"model", "A + B*exp(-0.99/(d-0.5))/sqrt(d-0.5)"},
              {"fit", io::to_json(result)},
              {"se_A", result.se_A()},
              {"se_B", result.se_B()},
              {"quasistatic_limit_kBT", result.A}};
  io::write_text(opt.out_dir / "fit.json", io::dump(report));
  return report;
}

// ---- mi --------------------------------------------------------------------

/// Draws (x, m) pairs from the mixture and sensor models.
inline std::vector<PositionReading> sample_readings(const MixtureModel& mix, const SensorModel& sensor,
                                                    std::size_t n, std::uint64_t seed, std::uint64_t stream_id) {
  rng::Stream s(seed, stream_id, rng::Substream::sampling);
  std::vector<PositionReading> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double center = s.uniform() < mix.p ? -mix.L : mix.L;
    const double x = center + mix.sigma_T * s.normal();
    out.push_back({x, sample_measurement(x, sensor, s.normal())});
  }
  return out;
}

inline Json mi(const RunConfig& cfg, const Options& opt) {
  const auto sigma_T = resolve_sigma_T(cfg, opt.out_dir);
  MixtureModel mix = cfg.mixture;
  mix.sigma_T = sigma_T.value;
  const double I = mi_quadrature(mix, cfg.sensor);
  const auto samples = sample_readings(mix, cfg.sensor, cfg.mi_samples, cfg.sim.seed, 0);
  const auto mc = mi_monte_carlo(samples, mix, cfg.sensor);

  Json sensitivity = Json::array();
  for (double s = 30.0; s <= 60.0 + 1e-9; s += 5.0) {
    MixtureModel m = mix;
    m.sigma_T = s;
    sensitivity.push_back({{"sigma_T_nm", s}, {"I_nats", mi_quadrature(m, cfg.sensor)}});
  }
  const auto p_err = normal_cdf(-mix.L / std::hypot(mix.sigma_T, cfg.sensor.sigma_n));
  Json report{{"seed", cfg.sim.seed},
              {"sigma_n_nm", cfg.sensor.sigma_n},
              {"sigma_T_nm", mix.sigma_T},
              {"sigma_T_source", sigma_T.source},
              {"p_left", mix.p},
              {"I_nats", I},
              {"I_bits", I / kLn2},
              {"monte_carlo", {{"I_nats", mc.value}, {"se", mc.se}, {"n", mc.n}}},
              {"misread_probability", p_err},
              {"sigma_T_sensitivity", sensitivity}};
  io::write_text(opt.out_dir / "mi.json", io::dump(report));
  return report;
}

// ---- report ----------------------------------------------------------------

/// Second-law ledger per sweep point, the erasure-probability check against
/// the open-loop rate, and the energy deficit of the fitted quasistatic limit.
inline Json report(const RunConfig& cfg, const Options& opt) {
  const fs::path mi_path = opt.out_dir / "mi.json";
  const fs::path fit_path = opt.out_dir / "fit.json";
  if (!fs::exists(mi_path)) throw IoError("missing " + mi_path.string() + "; run `mi` first");
  if (!fs::exists(fit_path)) throw IoError("missing " + fit_path.string() + "; run `fit` first");
  const auto mi_doc = Json::parse(io::read_text(mi_path));
  const double I = mi_doc.at("I_nats").get<double>();
  const FitResult fitted = io::fit_from_json(Json::parse(io::read_text(fit_path)).at("fit"));
  const auto sigma_T = resolve_sigma_T(cfg, opt.out_dir);
  MixtureModel mix = cfg.mixture;
  mix.sigma_T = sigma_T.value;

  Json points = Json::array();
  double prev_mean = -INFINITY;
  double prev_se = 0.0;
  bool monotone = true;
  bool all_satisfied = true;
  for (double d : cfg.d_list) {
    const fs::path fb_path = runs_path(opt.out_dir, ProtocolKind::feedback, d);
    const fs::path ol_path = runs_path(opt.out_dir, ProtocolKind::open_loop, d);
    if (!fs::exists(fb_path) || !fs::exists(ol_path)) {
      throw IoError("missing run records for d=" + io::format_number(d) + " under " + (opt.out_dir / "runs").string());
    }
    const auto fb = io::parse_runs_csv(io::read_text(fb_path), ProtocolKind::feedback);
    const auto ol = io::parse_runs_csv(io::read_text(ol_path), ProtocolKind::open_loop);
    const auto fb_stats = aggregate(fb);
    const auto ol_stats = aggregate(ol);
    const auto ledger = ledger_check(fb, I);
    const auto predicted = erasure_prob_analytic(ol_stats.p_hat, mix, cfg.sensor);
    const double combined_se = std::hypot(fb_stats.se_p, ol_stats.se_p);
    all_satisfied = all_satisfied && ledger.satisfied;
    if (fb_stats.mean_W < prev_mean - 2.0 * std::hypot(fb_stats.se_W, prev_se)) monotone = false;
    prev_mean = fb_stats.mean_W;
    prev_se = fb_stats.se_W;
    points.push_back({{"d", d},
                      {"ledger", io::to_json(ledger)},
                      {"feedback", io::to_json(fb_stats)},
                      {"openloop", io::to_json(ol_stats)},
                      {"erasure_probability",
                       {{"predicted", predicted.value},
                        {"predicted_out_of_range", predicted.out_of_range},
                        {"observed", fb_stats.p_hat},
                        {"combined_se", combined_se},
                        {"within_2se", std::abs(fb_stats.p_hat - predicted.value) <= 2.0 * combined_se},
                        {"admissible", fb_stats.p_hat > kAdmissibleSuccess}}}});
  }
  const auto deficit = deficit_report(fitted, I);
  Json out{{"seed", cfg.sim.seed},
           {"I_nats", I},
           {"sigma_T_nm", mix.sigma_T},
           {"sigma_T_source", sigma_T.source},
           {"points", points},
           {"second_law_satisfied", all_satisfied},
           {"mean_W_nondecreasing_within_2se", monotone},
           {"fit", {{"A", fitted.A}, {"se_A", fitted.se_A()}, {"B", fitted.B}, {"se_B", fitted.se_B()}}},
           {"deficit", io::to_json(deficit)},
           {"quasistatic_bound_kBT", kLn2 - I},
           {"A_respects_bound", fitted.A >= (kLn2 - I) - 2.0 * fitted.se_A()}};
  io::write_text(opt.out_dir / "report.json", io::dump(out));
  return out;
}

}  // namespace erasure::commands
