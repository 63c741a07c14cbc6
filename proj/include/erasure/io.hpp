#pragma once

// Plain-text record formats. CSV numbers are written with 17 significant
// digits so every double round-trips; rows end in '\n'; absent optional
// values are empty fields.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "erasure/analysis.hpp"
#include "erasure/common.hpp"
#include "erasure/dynamics.hpp"
#include "erasure/energetics.hpp"
#include "erasure/potential.hpp"
#include "erasure/run.hpp"

namespace erasure::io {

using Json = nlohmann::ordered_json;

inline const char* const kRunsHeader =
    "run_id,d,sigma_n_nm,init_well,x_tm_nm,m_nm,action,W1_kBT,W2_kBT,W_kBT,x_final_nm,success";
inline const char* const kStatsHeader = "d,sigma_n_nm,n,mean_W_kBT,se_W_kBT,p_hat,se_p,zero_mass";
inline const char* const kTrajectoryHeader = "t_s,x_nm,d";
inline const char* const kCurveHeader = "x_nm,U_pNnm";

enum class RecordFormat { csv, json };

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string{}; }

inline void write_text(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---- CSV writers ---------------------------------------------------------

inline std::string runs_csv(std::span<const ErasureRun> runs) {
  std::string out = std::string(kRunsHeader) + "\n";
  for (const auto& r : runs) {
    out += std::to_string(r.run_id) + ',' + format_number(r.d) + ',' + format_number(r.sigma_n) + ',' +
           std::string(to_string(r.initial_well)) + ',' + format_number(r.x_at_tm) + ',' + format_number(r.m) +
           ',' + std::string(to_string(r.action)) + ',' + format_number(r.W1) + ',' + format_number(r.W2) + ',' +
           format_number(r.W_total) + ',' + format_number(r.x_final) + ',' + (r.success ? "1" : "0") + "\n";
  }
  return out;
}

inline std::string stats_csv(std::span<const EnsembleStats> stats) {
  std::string out = std::string(kStatsHeader) + "\n";
  for (const auto& s : stats) {
    out += format_number(s.d) + ',' + format_number(s.sigma_n) + ',' + std::to_string(s.n_runs) + ',' +
           format_number(s.mean_W) + ',' + format_number(s.se_W) + ',' + format_number(s.p_hat) + ',' +
           format_number(s.se_p) + ',' + format_number(s.zero_mass) + "\n";
  }
  return out;
}

inline std::string trajectory_csv(const Trajectory& traj) {
  std::string out = std::string(kTrajectoryHeader) + "\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out += format_number(traj.times[i]) + ',' + format_number(traj.positions[i]) + ',' +
           format_number(traj.duties[i]) + "\n";
  }
  return out;
}

inline std::string curve_csv(const PotentialCurve& curve) {
  std::string out = std::string(kCurveHeader) + "\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out += format_number(curve.grid[i]) + ',' + format_number(curve.values[i]) + "\n";
  }
  return out;
}

// ---- JSON ----------------------------------------------------------------

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json to_json(const ErasureRun& r) {
  return Json{{"run_id", r.run_id},
              {"d", r.d},
              {"sigma_n_nm", optional_json(r.sigma_n)},
              {"init_well", to_string(r.initial_well)},
              {"x_tm_nm", r.x_at_tm},
              {"m_nm", optional_json(r.m)},
              {"action", to_string(r.action)},
              {"W1_kBT", r.W1},
              {"W2_kBT", r.W2},
              {"W_kBT", r.W_total},
              {"x_final_nm", r.x_final},
              {"success", r.success}};
}

inline Json to_json(const EnsembleStats& s) {
  return Json{{"d", s.d},          {"sigma_n_nm", optional_json(s.sigma_n)},
              {"n", s.n_runs},     {"mean_W_kBT", s.mean_W},
              {"se_W_kBT", s.se_W}, {"p_hat", s.p_hat},
              {"se_p", s.se_p},    {"zero_mass", s.zero_mass}};
}

inline Json to_json(const LedgerReport& r) {
  return Json{{"mean_W_fb", r.mean_W_fb},
              {"se_W_fb", r.se_W_fb},
              {"delta_F_particle", r.delta_F_particle},
              {"I", r.I},
              {"bound_fb", r.bound_fb},
              {"bound_meas_plus_reset", r.bound_meas_plus_reset},
              {"slack_fb", r.slack_fb},
              {"satisfied", r.satisfied}};
}

inline Json to_json(const FitResult& f) {
  return Json{{"A", f.A},
              {"B", f.B},
              {"cov", {{f.cov[0][0], f.cov[0][1]}, {f.cov[1][0], f.cov[1][1]}}},
              {"chi2", f.chi2},
              {"dof", f.dof}};
}

inline FitResult fit_from_json(const Json& j) {
  FitResult f;
  f.A = j.at("A").get<double>();
  f.B = j.at("B").get<double>();
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) f.cov[r][c] = j.at("cov").at(r).at(c).get<double>();
  }
  f.chi2 = j.at("chi2").get<double>();
  f.dof = j.at("dof").get<std::size_t>();
  return f;
}

inline Json to_json(const DeficitReport& r) {
  return Json{{"deficit_kBT", r.deficit},
              {"se_deficit_kBT", r.se_deficit},
              {"I_nats", r.I},
              {"difference", r.difference},
              {"consistent", r.consistent}};
}

inline Json to_json(const WorkHistogram& h) {
  return Json{{"zero_mass", h.zero_mass}, {"origin_kBT", h.origin}, {"bin_width_kBT", h.bin_width}, {"masses", h.masses}};
}

/// Writes runs in either format; JSON numbers use the shortest round-trip form.
inline void write_records(std::span<const ErasureRun> runs, const std::filesystem::path& path, RecordFormat format) {
  if (format == RecordFormat::csv) return write_text(path, runs_csv(runs));
  Json arr = Json::array();
  for (const auto& r : runs) arr.push_back(to_json(r));
  write_text(path, dump(arr));
}

inline void write_records(std::span<const EnsembleStats> stats, const std::filesystem::path& path,
                          RecordFormat format) {
  if (format == RecordFormat::csv) return write_text(path, stats_csv(stats));
  Json arr = Json::array();
  for (const auto& s : stats) arr.push_back(to_json(s));
  write_text(path, dump(arr));
}

// ---- CSV readers ---------------------------------------------------------

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

inline std::vector<std::string_view> lines(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto& l : split(text, '\n')) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

inline double parse_double(std::string_view field, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ValidationError("malformed number in column " + std::string(what) + ": '" + std::string(field) + "'");
  }
  return v;
}

inline std::optional<double> parse_optional(std::string_view field, std::string_view what) {
  if (field.empty()) return std::nullopt;
  return parse_double(field, what);
}

inline std::uint64_t parse_uint(std::string_view field, std::string_view what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ValidationError("malformed integer in column " + std::string(what) + ": '" + std::string(field) + "'");
  }
  return v;
}

inline std::vector<std::vector<std::string_view>> table(std::string_view text, std::string_view header) {
  const auto ls = lines(text);
  if (ls.empty() || ls.front() != header) {
    throw ValidationError("unexpected CSV header; expected '" + std::string(header) + "'");
  }
  const auto ncol = split(header).size();
  std::vector<std::vector<std::string_view>> rows;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    auto fields = split(ls[i]);
    if (fields.size() != ncol) throw ValidationError("CSV row " + std::to_string(i) + " has the wrong column count");
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace detail

inline std::vector<EnsembleStats> parse_stats_csv(std::string_view text, ProtocolKind kind) {
  std::vector<EnsembleStats> out;
  for (const auto& f : detail::table(text, kStatsHeader)) {
    EnsembleStats s;
    s.kind = kind;
    s.d = detail::parse_double(f[0], "d");
    s.sigma_n = detail::parse_optional(f[1], "sigma_n_nm");
    s.n_runs = detail::parse_uint(f[2], "n");
    s.mean_W = detail::parse_double(f[3], "mean_W_kBT");
    s.se_W = detail::parse_double(f[4], "se_W_kBT");
    s.p_hat = detail::parse_double(f[5], "p_hat");
    s.se_p = detail::parse_double(f[6], "se_p");
    s.zero_mass = detail::parse_double(f[7], "zero_mass");
    out.push_back(s);
  }
  return out;
}

inline std::vector<ErasureRun> parse_runs_csv(std::string_view text, ProtocolKind kind) {
  std::vector<ErasureRun> out;
  for (const auto& f : detail::table(text, kRunsHeader)) {
    ErasureRun r;
    r.kind = kind;
    r.run_id = detail::parse_uint(f[0], "run_id");
    r.d = detail::parse_double(f[1], "d");
    r.sigma_n = detail::parse_optional(f[2], "sigma_n_nm");
    if (f[3] != "left" && f[3] != "right") throw ValidationError("init_well must be left or right");
    r.initial_well = f[3] == "left" ? Well::left : Well::right;
    r.x_at_tm = detail::parse_double(f[4], "x_tm_nm");
    r.m = detail::parse_optional(f[5], "m_nm");
    if (f[6] != "act" && f[6] != "no_action") throw ValidationError("action must be act or no_action");
    r.action = f[6] == "act" ? Action::act : Action::no_action;
    r.W1 = detail::parse_double(f[7], "W1_kBT");
    r.W2 = detail::parse_double(f[8], "W2_kBT");
    r.W_total = detail::parse_double(f[9], "W_kBT");
    r.x_final = detail::parse_double(f[10], "x_final_nm");
    if (f[11] != "0" && f[11] != "1") throw ValidationError("success must be 0 or 1");
    r.success = f[11] == "1";
    out.push_back(r);
  }
  return out;
}

}  // namespace erasure::io
