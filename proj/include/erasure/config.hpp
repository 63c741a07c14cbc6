#pragma once

// Run configuration: a strict JSON document. Every key is optional and falls
// back to the defaults below; any key not listed here is an error. See
// schema/config.schema.json.

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "erasure/common.hpp"
#include "erasure/dynamics.hpp"
#include "erasure/io.hpp"
#include "erasure/measurement.hpp"
#include "erasure/potential.hpp"
#include "erasure/protocol.hpp"

namespace erasure {

enum class Preset { full, fast_bath };

/// Time-scale factor of the fast-bath preset. Overdamped dynamics are
/// invariant under (t, γ) → (c·t, c·γ), so scaling γ, dt and every schedule
/// time together leaves all statistics unchanged.
inline constexpr double kFastBathScale = 0.01;

struct CalibrationSettings {
  double duration_s = 10.0;
  std::size_t trajectories = 8;
  double bin_nm = 10.0;
};

struct RunConfig {
  Preset preset = Preset::full;
  PotentialParams potential;
  SimConfig sim;
  SensorModel sensor;
  MixtureModel mixture;
  double t_m = 0.1;        // s
  double t_relax = 2.0;    // s
  double tau_ref = 30.0;   // s
  double d_ref = 0.7;
  double tau_exponent = 0.5;
  InitWell init = InitWell::random;
  std::vector<double> d_list{0.7, 0.75, 0.8, 0.85};
  std::size_t n_runs = 300;
  std::string output_dir = "out";
  CalibrationSettings calibration;
  std::size_t mi_samples = 100000;

  ProtocolSchedule schedule_for(double d) const {
    return {t_m, tau_for_duty(d, tau_ref, d_ref, tau_exponent), t_relax, d};
  }

  void validate() const {
    potential.validate();
    sim.validate(potential);
    sensor.validate();
    mixture.validate();
    detail::require(std::isfinite(t_m) && t_m >= 0.0, "protocol.t_m_s must be >= 0");
    detail::require(std::isfinite(t_relax) && t_relax >= 0.0, "protocol.t_relax_s must be >= 0");
    detail::require(std::isfinite(tau_ref) && tau_ref > 0.0, "protocol.tau_ref_s must be > 0");
    detail::require(std::isfinite(d_ref) && d_ref > 0.5 && d_ref < 1.0, "protocol.d_ref must lie in (0.5, 1)");
    detail::require(tau_exponent == 0.5 || tau_exponent == -0.5, "protocol.tau_exponent must be +0.5 or -0.5");
    detail::require(!d_list.empty(), "d_list must not be empty");
    for (double d : d_list) detail::require(std::isfinite(d) && d > 0.5 && d < 1.0, "d_list values must lie in (0.5, 1)");
    detail::require(n_runs >= 1, "n_runs must be >= 1");
    detail::require(calibration.duration_s > 0.0, "calibration.duration_s must be > 0");
    detail::require(calibration.trajectories >= 1, "calibration.trajectories must be >= 1");
    detail::require(calibration.bin_nm > 0.0, "calibration.bin_nm must be > 0");
    detail::require(mi_samples >= 1000, "mi.mc_samples must be >= 1000");
  }
};

namespace detail {

using Json = nlohmann::json;

inline void reject_unknown(const Json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ValidationError(std::string(where.empty() ? "config" : where) + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) {
      throw ValidationError("unknown config key '" + (where.empty() ? key : std::string(where) + "." + key) + "'");
    }
  }
}

template <class T>
void read(const Json& obj, std::string_view where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  const std::string path = where.empty() ? std::string(key) : std::string(where) + "." + key;
  const auto& v = obj.at(key);
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw ValidationError(path + " must be a number");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_unsigned()) throw ValidationError(path + " must be a non-negative integer");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ValidationError(path + " must be a string");
  }
  out = v.get<T>();
}

}  // namespace detail

/// Parses and validates a configuration document.
inline RunConfig config_from_json(const nlohmann::json& doc) {
  using detail::read;
  using detail::reject_unknown;
  reject_unknown(doc, "", {"preset", "seed", "output_dir", "d_list", "n_runs", "potential", "sim", "sensor",
                           "mixture", "protocol", "calibration", "mi"});
  RunConfig c;

  std::string preset = "full";
  read(doc, "", "preset", preset);
  if (preset == "fast-bath") {
    c.preset = Preset::fast_bath;
  } else if (preset != "full") {
    throw ValidationError("preset must be \"full\" or \"fast-bath\"");
  }
  read(doc, "", "seed", c.sim.seed);
  read(doc, "", "output_dir", c.output_dir);
  read(doc, "", "n_runs", c.n_runs);
  if (doc.contains("d_list")) {
    const auto& arr = doc.at("d_list");
    if (!arr.is_array()) throw ValidationError("d_list must be an array of numbers");
    c.d_list.clear();
    for (const auto& v : arr) {
      if (!v.is_number()) throw ValidationError("d_list must be an array of numbers");
      c.d_list.push_back(v.get<double>());
    }
  }

  if (doc.contains("potential")) {
    const auto& p = doc.at("potential");
    reject_unknown(p, "potential", {"k_pN_per_nm", "w_nm", "L_nm", "U_r_pNnm"});
    read(p, "potential", "k_pN_per_nm", c.potential.k);
    read(p, "potential", "w_nm", c.potential.w);
    read(p, "potential", "L_nm", c.potential.L);
    read(p, "potential", "U_r_pNnm", c.potential.U_r);
  }

  bool dt_given = false;
  if (doc.contains("sim")) {
    const auto& s = doc.at("sim");
    reject_unknown(s, "sim", {"T_K", "gamma_pNs_per_nm", "dt_s", "mode", "t_mux_s", "record_stride", "escape_bound_nm"});
    read(s, "sim", "T_K", c.sim.T);
    read(s, "sim", "gamma_pNs_per_nm", c.sim.gamma);
    dt_given = s.contains("dt_s");
    read(s, "sim", "dt_s", c.sim.dt);
    std::string mode = "averaged";
    read(s, "sim", "mode", mode);
    if (mode == "multiplexed") {
      c.sim.mode = PotentialMode::multiplexed;
    } else if (mode != "averaged") {
      throw ValidationError("sim.mode must be \"averaged\" or \"multiplexed\"");
    }
    read(s, "sim", "t_mux_s", c.sim.t_mux);
    read(s, "sim", "record_stride", c.sim.record_stride);
    read(s, "sim", "escape_bound_nm", c.sim.escape_bound);
  }

  if (doc.contains("sensor")) {
    const auto& s = doc.at("sensor");
    reject_unknown(s, "sensor", {"sigma_n_nm"});
    read(s, "sensor", "sigma_n_nm", c.sensor.sigma_n);
  }
  if (doc.contains("mixture")) {
    const auto& m = doc.at("mixture");
    reject_unknown(m, "mixture", {"p_left", "sigma_T_nm"});
    read(m, "mixture", "p_left", c.mixture.p);
    read(m, "mixture", "sigma_T_nm", c.mixture.sigma_T);
  }
  if (doc.contains("protocol")) {
    const auto& p = doc.at("protocol");
    reject_unknown(p, "protocol", {"t_m_s", "tau_ref_s", "d_ref", "tau_exponent", "t_relax_s", "init"});
    read(p, "protocol", "t_m_s", c.t_m);
    read(p, "protocol", "tau_ref_s", c.tau_ref);
    read(p, "protocol", "d_ref", c.d_ref);
    read(p, "protocol", "tau_exponent", c.tau_exponent);
    read(p, "protocol", "t_relax_s", c.t_relax);
    std::string init = "random";
    read(p, "protocol", "init", init);
    if (init == "left") {
      c.init = InitWell::left;
    } else if (init == "right") {
      c.init = InitWell::right;
    } else if (init != "random") {
      throw ValidationError("protocol.init must be \"left\", \"right\" or \"random\"");
    }
  }
  if (doc.contains("calibration")) {
    const auto& k = doc.at("calibration");
    reject_unknown(k, "calibration", {"duration_s", "trajectories", "bin_nm"});
    read(k, "calibration", "duration_s", c.calibration.duration_s);
    read(k, "calibration", "trajectories", c.calibration.trajectories);
    read(k, "calibration", "bin_nm", c.calibration.bin_nm);
  }
  if (doc.contains("mi")) {
    const auto& m = doc.at("mi");
    reject_unknown(m, "mi", {"mc_samples"});
    read(m, "mi", "mc_samples", c.mi_samples);
  }

  if (c.preset == Preset::fast_bath) {
    c.sim.gamma *= kFastBathScale;
    c.sim.t_mux *= kFastBathScale;
    if (dt_given) c.sim.dt *= kFastBathScale;
    c.t_m *= kFastBathScale;
    c.t_relax *= kFastBathScale;
    c.tau_ref *= kFastBathScale;
    c.calibration.duration_s *= kFastBathScale;
  }
  if (!dt_given) {
    // (γ/k)/20 when averaged, t_mux/20 when multiplexed.
    c.sim.dt = c.sim.mode == PotentialMode::averaged ? c.sim.gamma / c.potential.k / 20.0 : c.sim.t_mux / 20.0;
  }
  c.mixture.L = c.potential.L;
  c.validate();
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("config file not found: " + path.string());
  const std::string text = io::read_text(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

/// Fully resolved configuration, embedded in every report.
inline io::Json config_to_json(const RunConfig& c) {
  return io::Json{
      {"preset", c.preset == Preset::full ? "full" : "fast-bath"},
      {"seed", c.sim.seed},
      {"d_list", c.d_list},
      {"n_runs", c.n_runs},
      {"potential", {{"k_pN_per_nm", c.potential.k}, {"w_nm", c.potential.w}, {"L_nm", c.potential.L},
                     {"U_r_pNnm", c.potential.U_r}}},
      {"sim", {{"T_K", c.sim.T}, {"gamma_pNs_per_nm", c.sim.gamma}, {"dt_s", c.sim.dt},
               {"mode", c.sim.mode == PotentialMode::averaged ? "averaged" : "multiplexed"},
               {"t_mux_s", c.sim.t_mux}, {"record_stride", c.sim.record_stride},
               {"escape_bound_nm", c.sim.escape_bound}}},
      {"sensor", {{"sigma_n_nm", c.sensor.sigma_n}}},
      {"mixture", {{"p_left", c.mixture.p}, {"sigma_T_nm", c.mixture.sigma_T}}},
      {"protocol", {{"t_m_s", c.t_m}, {"tau_ref_s", c.tau_ref}, {"d_ref", c.d_ref},
                    {"tau_exponent", c.tau_exponent}, {"t_relax_s", c.t_relax}, {"init", to_string(c.init)}}},
  };
}

}  // namespace erasure
