#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "erasure/ensemble.hpp"
#include "erasure/protocol.hpp"

using namespace erasure;

namespace {
const PotentialParams kDefaults{};

ProtocolSchedule short_schedule(double d = 0.7) { return {0.1, 1.0, 0.2, d}; }
}  // namespace

TEST(Outcome, SignRule) {
  EXPECT_TRUE(classify_outcome(-550.0));
  EXPECT_FALSE(classify_outcome(550.0));
  EXPECT_TRUE(classify_outcome(-10.0));
  EXPECT_FALSE(classify_outcome(0.0));
  EXPECT_THROW(classify_outcome(NAN), ValidationError);
}

TEST(TauScaling, IdentityAtReference) { EXPECT_DOUBLE_EQ(tau_for_duty(0.7, 30.0, 0.7), 30.0); }

TEST(TauScaling, ShortensAwayFromSymmetry) {
  EXPECT_NEAR(tau_for_duty(0.75, 30.0, 0.7), 12.463061, 1e-6);
  EXPECT_LT(tau_for_duty(0.85, 30.0, 0.7), tau_for_duty(0.8, 30.0, 0.7));
}

TEST(TauScaling, DivergesNearSymmetry) {
  const double tau = tau_for_duty(0.51, 30.0, 0.7);
  EXPECT_TRUE(std::isfinite(tau));
  EXPECT_GT(tau, 1e30);
  EXPECT_THROW(tau_for_duty(0.5, 30.0, 0.7), ValidationError);
}

TEST(TauScaling, AlternativeExponent) {
  const double expected = 30.0 * std::exp(0.99 / 0.25 - 0.99 / 0.2) * std::sqrt(0.2 / 0.25);
  EXPECT_NEAR(tau_for_duty(0.75, 30.0, 0.7, -0.5), expected, 1e-9);
}

TEST(Schedule, PhaseTimes) {
  const ProtocolSchedule s{0.1, 30.0, 2.0, 0.7};
  EXPECT_DOUBLE_EQ(s.t_f(), 30.1);
  EXPECT_DOUBLE_EQ(s.t_e(), 32.1);
  EXPECT_THROW((ProtocolSchedule{0.1, 30.0, 2.0, 0.5}.validate()), ValidationError);
  EXPECT_THROW((ProtocolSchedule{0.1, 0.0, 2.0, 0.7}.validate()), ValidationError);
}

TEST(Feedback, LeftInitialisedBitIsLeftAlone) {
  const SimConfig cfg;
  const ProtocolSchedule sched{0.1, 30.0, 2.0, 0.7};
  std::size_t ok = 0;
  for (std::uint64_t id = 0; id < 20; ++id) {
    const auto run = run_feedback_erasure(sched, cfg, kDefaults, SensorModel{0.0}, InitWell::left, id);
    EXPECT_EQ(run.initial_well, Well::left);
    ASSERT_TRUE(run.m.has_value());
    EXPECT_DOUBLE_EQ(*run.m, run.x_at_tm);
    EXPECT_EQ(run.action, Action::no_action);
    EXPECT_EQ(run.W_total, 0.0);
    EXPECT_EQ(run.success, run.x_final < 0.0);
    ok += run.success ? 1 : 0;
  }
  // The symmetric barrier is ½·½kw² ≈ 8.3 k_BT, so a few bits wander in 32 s.
  EXPECT_GE(ok, 17u);
}

TEST(Feedback, RightInitialisedBitIsTilted) {
  const SimConfig cfg;
  const auto run = run_feedback_erasure(short_schedule(), cfg, kDefaults, SensorModel{0.0}, InitWell::right, 3);
  EXPECT_EQ(run.action, Action::act);
  EXPECT_NEAR(run.W1, switch_work(run.x_at_tm, 0.5, 0.7, kDefaults, cfg.kT()), 1e-12);
  EXPECT_DOUBLE_EQ(run.W_total, run.W1 + run.W2);
  EXPECT_GT(run.W1, 2.0);
}

TEST(Feedback, RightInitialisedEnsembleMostlyResets) {
  EnsembleRequest req;
  req.schedule = {0.1, 30.0, 2.0, 0.7};
  req.sensor = SensorModel{0.0};
  req.init = InitWell::right;
  req.n_runs = 60;
  const auto runs = run_ensemble(req, default_jobs());
  std::size_t ok = 0;
  for (const auto& r : runs) {
    EXPECT_EQ(r.action, Action::act);
    ok += r.success ? 1 : 0;
  }
  EXPECT_GT(ok, 30u);
}

TEST(Feedback, RandomInitialisationHalvesTheZeroSpike) {
  EnsembleRequest req;
  req.schedule = short_schedule();
  req.n_runs = 300;
  const auto runs = run_ensemble(req, default_jobs());
  std::size_t zeros = 0;
  std::size_t left = 0;
  for (const auto& r : runs) {
    zeros += r.W_total == 0.0 ? 1 : 0;
    left += r.initial_well == Well::left ? 1 : 0;
  }
  const double n = 300.0;
  EXPECT_NEAR(zeros / n, 0.5, 3.0 * std::sqrt(0.25 / n));
  EXPECT_NEAR(left / n, 0.5, 3.0 * std::sqrt(0.25 / n));
}

TEST(OpenLoop, AlwaysActs) {
  const SimConfig cfg;
  const auto run = run_openloop_erasure(short_schedule(), cfg, kDefaults, InitWell::left, 0);
  EXPECT_EQ(run.action, Action::act);
  EXPECT_FALSE(run.m.has_value());
  EXPECT_FALSE(run.sigma_n.has_value());
  EXPECT_NE(run.W_total, 0.0);
  EXPECT_LT(run.W1, 0.0);
}

TEST(Protocol, CommonRandomNumbersAcrossKinds) {
  const SimConfig cfg;
  const auto fb = run_feedback_erasure(short_schedule(), cfg, kDefaults, SensorModel{}, InitWell::random, 9);
  const auto ol = run_openloop_erasure(short_schedule(), cfg, kDefaults, InitWell::random, 9);
  EXPECT_EQ(fb.initial_well, ol.initial_well);
  EXPECT_EQ(fb.x_at_tm, ol.x_at_tm);
  if (fb.action == Action::act) {
    EXPECT_EQ(fb.x_final, ol.x_final);
  }
}

TEST(Protocol, SensorNoiseLeavesThermalNoiseUntouched) {
  const SimConfig cfg;
  const auto a = run_feedback_erasure(short_schedule(), cfg, kDefaults, SensorModel{100.0}, InitWell::right, 4);
  const auto b = run_feedback_erasure(short_schedule(), cfg, kDefaults, SensorModel{200.0}, InitWell::right, 4);
  EXPECT_EQ(a.x_at_tm, b.x_at_tm);
  EXPECT_NEAR(*a.m - a.x_at_tm, 0.5 * (*b.m - b.x_at_tm), 1e-9);
}

TEST(Ensemble, IndependentOfWorkerCount) {
  EnsembleRequest req;
  req.schedule = {0.01, 0.1, 0.02, 0.8};
  req.n_runs = 40;
  const auto a = run_ensemble(req, 1);
  const auto b = run_ensemble(req, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].run_id, i);
    EXPECT_EQ(a[i].x_final, b[i].x_final);
    EXPECT_EQ(a[i].W_total, b[i].W_total);
  }
}

TEST(Ensemble, LowestFailingIndexIsRethrown) {
  try {
    parallel_indexed(100, 4, [](std::size_t i) -> int {
      if (i == 7 || i == 60) throw std::runtime_error(std::to_string(i));
      return static_cast<int>(i);
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

TEST(Ensemble, ResultsInIndexOrder) {
  const auto out = parallel_indexed(50, 3, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
}
