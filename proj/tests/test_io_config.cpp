#include <gtest/gtest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "erasure/config.hpp"
#include "erasure/io.hpp"

using namespace erasure;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("erasure_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ErasureRun sample_run() {
  ErasureRun r;
  r.run_id = 7;
  r.d = 0.7;
  r.sigma_n = 300.0;
  r.initial_well = Well::right;
  r.x_at_tm = 551.25;
  r.m = 420.5;
  r.action = Action::act;
  r.W1 = 3.25;
  r.W2 = -1.0 / 3.0;
  r.W_total = r.W1 + r.W2;
  r.x_final = -530.0;
  r.success = true;
  return r;
}

std::string expect_validation_error(const nlohmann::json& doc) {
  try {
    config_from_json(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected ValidationError for " << doc.dump();
  return {};
}

}  // namespace

TEST(Config, EmptyObjectGivesDefaults) {
  const auto c = config_from_json(nlohmann::json::object());
  EXPECT_EQ(c.preset, Preset::full);
  EXPECT_DOUBLE_EQ(c.potential.k, 0.0045);
  EXPECT_DOUBLE_EQ(c.potential.w, 175.0);
  EXPECT_DOUBLE_EQ(c.potential.L, 550.0);
  EXPECT_DOUBLE_EQ(c.sim.T, 300.0);
  EXPECT_DOUBLE_EQ(c.sim.gamma, 4.5e-6);
  EXPECT_NEAR(c.sim.dt, 5e-5, 1e-18);
  EXPECT_EQ(c.sim.mode, PotentialMode::averaged);
  EXPECT_DOUBLE_EQ(c.sensor.sigma_n, 300.0);
  EXPECT_DOUBLE_EQ(c.mixture.sigma_T, 43.0);
  EXPECT_DOUBLE_EQ(c.mixture.L, 550.0);
  EXPECT_DOUBLE_EQ(c.t_m, 0.1);
  EXPECT_DOUBLE_EQ(c.tau_ref, 30.0);
  EXPECT_DOUBLE_EQ(c.d_ref, 0.7);
  EXPECT_DOUBLE_EQ(c.t_relax, 2.0);
  EXPECT_EQ(c.d_list, (std::vector<double>{0.7, 0.75, 0.8, 0.85}));
  EXPECT_EQ(c.n_runs, 300u);
  EXPECT_EQ(c.init, InitWell::random);
  EXPECT_DOUBLE_EQ(c.schedule_for(0.7).tau, 30.0);
}

TEST(Config, NegativeSensorNoiseIsRejected) {
  const auto msg = expect_validation_error(nlohmann::json::parse(R"({"sensor":{"sigma_n_nm":-1}})"));
  EXPECT_NE(msg.find("sigma_n"), std::string::npos);
}

TEST(Config, FastBathScalesFrictionAndTimes) {
  const auto full = config_from_json(nlohmann::json::object());
  const auto fast = config_from_json(nlohmann::json::parse(R"({"preset":"fast-bath"})"));
  EXPECT_EQ(fast.preset, Preset::fast_bath);
  EXPECT_NEAR(fast.sim.gamma / full.sim.gamma, 0.01, 1e-15);
  EXPECT_NEAR(fast.sim.dt / full.sim.dt, 0.01, 1e-12);
  EXPECT_NEAR(fast.sim.t_mux / full.sim.t_mux, 0.01, 1e-15);
  EXPECT_NEAR(fast.t_m / full.t_m, 0.01, 1e-15);
  EXPECT_NEAR(fast.t_relax / full.t_relax, 0.01, 1e-15);
  EXPECT_NEAR(fast.tau_ref / full.tau_ref, 0.01, 1e-15);
  EXPECT_NEAR(fast.calibration.duration_s / full.calibration.duration_s, 0.01, 1e-15);
  EXPECT_DOUBLE_EQ(fast.potential.k, full.potential.k);
  EXPECT_DOUBLE_EQ(fast.sim.T, full.sim.T);
}

TEST(Config, ExplicitValuesAreRead) {
  const auto c = config_from_json(nlohmann::json::parse(R"({
    "seed": 5, "n_runs": 12, "d_list": [0.8, 0.9],
    "potential": {"w_nm": 150, "L_nm": 500},
    "sim": {"mode": "multiplexed", "t_mux_s": 2e-5, "record_stride": 4},
    "protocol": {"init": "right", "tau_exponent": -0.5},
    "mixture": {"p_left": 0.3}
  })"));
  EXPECT_EQ(c.sim.seed, 5u);
  EXPECT_EQ(c.n_runs, 12u);
  EXPECT_EQ(c.d_list, (std::vector<double>{0.8, 0.9}));
  EXPECT_DOUBLE_EQ(c.potential.w, 150.0);
  EXPECT_DOUBLE_EQ(c.mixture.L, 500.0);
  EXPECT_EQ(c.sim.mode, PotentialMode::multiplexed);
  EXPECT_NEAR(c.sim.dt, 1e-6, 1e-20);
  EXPECT_EQ(c.sim.record_stride, 4u);
  EXPECT_EQ(c.init, InitWell::right);
  EXPECT_DOUBLE_EQ(c.tau_exponent, -0.5);
  EXPECT_DOUBLE_EQ(c.mixture.p, 0.3);
}

TEST(Config, StrictKeysAndTypes) {
  EXPECT_NE(expect_validation_error(nlohmann::json::parse(R"({"bogus":1})")).find("bogus"), std::string::npos);
  EXPECT_NE(expect_validation_error(nlohmann::json::parse(R"({"sim":{"dt":1}})")).find("sim.dt"), std::string::npos);
  expect_validation_error(nlohmann::json::parse(R"({"n_runs":"300"})"));
  expect_validation_error(nlohmann::json::parse(R"({"n_runs":-3})"));
  expect_validation_error(nlohmann::json::parse(R"({"d_list":[0.4]})"));
  expect_validation_error(nlohmann::json::parse(R"({"d_list":[]})"));
  expect_validation_error(nlohmann::json::parse(R"({"preset":"quick"})"));
  expect_validation_error(nlohmann::json::parse(R"({"sim":{"mode":"other"}})"));
  expect_validation_error(nlohmann::json::parse(R"({"sim":{"dt_s":0.01}})"));
  expect_validation_error(nlohmann::json::parse(R"([1,2])"));
}

TEST(Config, LoadFromDisk) {
  const auto dir = scratch_dir("load");
  EXPECT_THROW(load_config(dir / "absent.json"), IoError);
  io::write_text(dir / "bad.json", "{not json");
  EXPECT_THROW(load_config(dir / "bad.json"), ValidationError);
  io::write_text(dir / "ok.json", R"({"n_runs": 40})");
  EXPECT_EQ(load_config(dir / "ok.json").n_runs, 40u);
}

TEST(Config, ResolvedConfigRoundTrips) {
  const auto c = config_from_json(nlohmann::json::parse(R"({"seed": 9, "sensor": {"sigma_n_nm": 120}})"));
  const auto j = config_to_json(c);
  EXPECT_EQ(j.at("seed").get<std::uint64_t>(), 9u);
  EXPECT_DOUBLE_EQ(j.at("sensor").at("sigma_n_nm").get<double>(), 120.0);
  EXPECT_EQ(j.at("protocol").at("init").get<std::string>(), "random");
}

TEST(Records, EmptyEnsembleIsHeaderOnly) {
  const std::vector<ErasureRun> none;
  EXPECT_EQ(io::runs_csv(none), std::string(io::kRunsHeader) + "\n");
}

TEST(Records, OneRunIsTwoLines) {
  const std::vector<ErasureRun> runs{sample_run()};
  const auto text = io::runs_csv(runs);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text.substr(0, text.find('\n')), io::kRunsHeader);
  EXPECT_NE(text.find("\n7,0.69999999999999996,300,right,551.25,420.5,act,3.25,"), std::string::npos);
  EXPECT_EQ(text.substr(text.size() - 3), ",1\n");
}

TEST(Records, RunsRoundTripBitExact) {
  std::vector<ErasureRun> runs{sample_run(), sample_run()};
  runs[1].run_id = 8;
  runs[1].sigma_n.reset();
  runs[1].m.reset();
  runs[1].success = false;
  const auto back = io::parse_runs_csv(io::runs_csv(runs), ProtocolKind::feedback);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].run_id, runs[i].run_id);
    EXPECT_EQ(back[i].d, runs[i].d);
    EXPECT_EQ(back[i].sigma_n, runs[i].sigma_n);
    EXPECT_EQ(back[i].m, runs[i].m);
    EXPECT_EQ(back[i].W2, runs[i].W2);
    EXPECT_EQ(back[i].x_final, runs[i].x_final);
    EXPECT_EQ(back[i].success, runs[i].success);
    EXPECT_EQ(back[i].action, runs[i].action);
    EXPECT_EQ(back[i].initial_well, runs[i].initial_well);
  }
}

TEST(Records, StatsColumnsAndRoundTrip) {
  EnsembleStats s;
  s.d = 0.75;
  s.sigma_n = 300.0;
  s.n_runs = 300;
  s.mean_W = 1.0 / 7.0;
  s.se_W = 0.01;
  s.p_hat = 0.9;
  s.se_p = std::sqrt(0.9 * 0.1 / 300.0);
  s.zero_mass = 0.49;
  const std::vector<EnsembleStats> stats{s};
  const auto text = io::stats_csv(stats);
  EXPECT_EQ(text.substr(0, text.find('\n')), "d,sigma_n_nm,n,mean_W_kBT,se_W_kBT,p_hat,se_p,zero_mass");
  const auto back = io::parse_stats_csv(text, ProtocolKind::feedback);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].mean_W, s.mean_W);
  EXPECT_EQ(back[0].se_p, s.se_p);
  EXPECT_EQ(back[0].n_runs, 300u);
  EXPECT_EQ(back[0].sigma_n, s.sigma_n);
}

TEST(Records, ParserRejectsMalformedInput) {
  EXPECT_THROW(io::parse_stats_csv("d,n\n1,2\n", ProtocolKind::feedback), ValidationError);
  EXPECT_THROW(io::parse_stats_csv(std::string(io::kStatsHeader) + "\n0.7,300\n", ProtocolKind::feedback),
               ValidationError);
  EXPECT_THROW(io::parse_stats_csv(std::string(io::kStatsHeader) + "\n0.7,300,x,1,1,1,1,1\n", ProtocolKind::feedback),
               ValidationError);
}

TEST(Records, WriteCsvAndJson) {
  const auto dir = scratch_dir("write");
  const std::vector<ErasureRun> runs{sample_run()};
  io::write_records(std::span<const ErasureRun>(runs), dir / "nested" / "runs.csv", io::RecordFormat::csv);
  EXPECT_EQ(io::read_text(dir / "nested" / "runs.csv"), io::runs_csv(runs));
  io::write_records(std::span<const ErasureRun>(runs), dir / "runs.json", io::RecordFormat::json);
  const auto j = nlohmann::json::parse(io::read_text(dir / "runs.json"));
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0].at("run_id").get<int>(), 7);
  EXPECT_EQ(j[0].at("action").get<std::string>(), "act");
  EXPECT_DOUBLE_EQ(j[0].at("W2_kBT").get<double>(), -1.0 / 3.0);
}

TEST(Records, UnwritablePathRaisesIoError) {
  const auto dir = scratch_dir("blocked");
  io::write_text(dir / "file", "x");
  EXPECT_THROW(io::write_text(dir / "file" / "child.csv", "y"), IoError);
  EXPECT_THROW(io::read_text(dir / "missing.csv"), IoError);
}

TEST(Records, FitJsonRoundTrip) {
  FitResult f;
  f.A = 0.1;
  f.B = 30.0;
  f.cov = {{{0.01, -0.2}, {-0.2, 9.0}}};
  f.chi2 = 1.5;
  f.dof = 2;
  const auto back = io::fit_from_json(io::to_json(f));
  EXPECT_EQ(back.A, f.A);
  EXPECT_EQ(back.cov[0][1], f.cov[0][1]);
  EXPECT_EQ(back.dof, 2u);
}

TEST(Schema, EveryDocumentedKeyParsesWithItsDefault) {
  const fs::path root = ERASURE_SOURCE_DIR;
  const auto schema = nlohmann::json::parse(io::read_text(root / "schema" / "config.schema.json"));
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [key, entry] : schema.at("properties").items()) {
    if (entry.contains("properties")) {
      doc[key] = nlohmann::json::object();
      for (const auto& [sub, subspec] : entry.at("properties").items()) {
        if (subspec.contains("default")) doc[key][sub] = subspec.at("default");
      }
    } else if (entry.contains("default")) {
      doc[key] = entry.at("default");
    }
  }
  const auto parsed = config_from_json(doc);
  const auto defaults = config_from_json(nlohmann::json::object());
  EXPECT_EQ(config_to_json(parsed), config_to_json(defaults));
}

TEST(Schema, ShippedConfigsLoad) {
  const fs::path root = ERASURE_SOURCE_DIR;
  EXPECT_EQ(load_config(root / "configs" / "default.json").preset, Preset::full);
  EXPECT_EQ(load_config(root / "configs" / "fast_bath.json").preset, Preset::fast_bath);
}
