#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "noontrack/experiments.hpp"
#include "noontrack/tracker.hpp"

using namespace noontrack;

namespace {

Estimate estimate_at(double t, double phi) {
  Estimate e;
  e.t = t;
  e.phi_hat = phi;
  e.phi_sd = 0.01;
  return e;
}

KineticsModel tracked_kinetics() {
  KineticsModel k;
  k.phi_initial = 0.35;
  k.phi_final = -0.30;
  k.tau_s = 600.0;
  return k;
}

}  // namespace

TEST_CASE("prediction modes follow the history length") {
  // samples of 0.2 + 0.1 exp(-t/100)
  const auto traj = [](double t) { return 0.2 + 0.1 * std::exp(-t / 100.0); };
  std::vector<Estimate> history;
  CHECK(predict_phase(history, 10.0).mode == PredictionMode::none);

  history.push_back(estimate_at(0.0, traj(0.0)));
  auto p = predict_phase(history, 37.0);
  CHECK(p.mode == PredictionMode::interpolation);
  CHECK(p.phi_p == doctest::Approx(traj(0.0)));  // a single point predicts itself

  history.push_back(estimate_at(37.0, traj(37.0)));
  p = predict_phase(history, 74.0);
  CHECK(p.mode == PredictionMode::interpolation);
  CHECK(p.phi_p == doctest::Approx(2.0 * traj(37.0) - traj(0.0)).epsilon(1e-12));

  history.push_back(estimate_at(74.0, traj(74.0)));
  CHECK(predict_phase(history, 111.0).mode == PredictionMode::interpolation);

  history.push_back(estimate_at(111.0, traj(111.0)));
  p = predict_phase(history, 148.0);
  CHECK(p.mode == PredictionMode::exponential_fit);
  CHECK(p.phi_p == doctest::Approx(traj(148.0)).epsilon(1e-6));

  SUBCASE("linear history falls back to interpolation") {
    std::vector<Estimate> line;
    for (int i = 0; i < 4; ++i) line.push_back(estimate_at(37.0 * i, 0.30 - 0.02 * i));
    const Prediction lp = predict_phase(line, 148.0);
    CHECK(lp.mode == PredictionMode::interpolation);
    CHECK(lp.phi_p == doctest::Approx(0.22).epsilon(1e-9));
  }
  SUBCASE("non-monotone timestamps are rejected") {
    history.push_back(estimate_at(100.0, 0.2));
    CHECK_THROWS_AS(predict_phase(history, 200.0), std::invalid_argument);
  }
  SUBCASE("t_next must lie beyond the history") {
    CHECK_THROWS_AS(predict_phase(history, 111.0), std::invalid_argument);
  }
}

TEST_CASE("noiseless exponential history is recovered exactly") {
  const double phi_inf = -0.372, amp = 0.722, tau = 300.0;
  std::vector<Estimate> history;
  std::vector<double> ts, ys;
  for (int i = 0; i < 4; ++i) {
    const double t = 37.0 * i;
    const double y = phi_inf + amp * std::exp(-t / tau);
    history.push_back(estimate_at(t, y));
    ts.push_back(t);
    ys.push_back(y);
  }
  const FitResult fit = fit_offset_exponential(ts, ys, 0.0);
  REQUIRE(fit.converged);
  CHECK(std::fabs(fit.tau_hat - tau) / tau < 1e-6);
  CHECK(std::fabs(fit.phi_inf - phi_inf) < 1e-6);

  const double t_next = 37.0 * 4;
  const Prediction p = predict_phase(history, t_next);
  CHECK(p.mode == PredictionMode::exponential_fit);
  CHECK(std::fabs(p.phi_p - (phi_inf + amp * std::exp(-t_next / tau))) < 1e-6);
}

TEST_CASE("choose_setting sits on the optimality condition") {
  CHECK(choose_setting(kPi / 8.0).theta0() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(choose_setting(0.0).theta0() == doctest::Approx(kPi / 32.0));
  CHECK(choose_setting(kPi / 8.0 + kPi).theta0() == doctest::Approx(0.0).epsilon(1e-12));

  for (double phi_p : {-2.0, -0.4, 0.0, 0.3, 1.2, 3.0}) {
    const MeasurementSetting s = choose_setting(phi_p);
    CHECK(s.theta0() >= 0.0);
    CHECK(s.theta0() < kPi / 4.0);
    const double residue = wrap_signed(8.0 * s.theta0() + 2.0 * phi_p - kPi / 4.0, kPi / 2.0);
    CHECK(std::fabs(residue) < 1e-9);
  }
}

TEST_CASE("tracking a full simulated run") {
  const KineticsModel kinetics = tracked_kinetics();
  DriftModel drift;
  drift.v_initial = 0.93;
  drift.v_noise_sd = 0.005;
  Schedule schedule;
  schedule.interval_s = 37.0;
  schedule.horizon_s = 740.0;
  ProbeModel probe;
  probe.flux_cps = 2000.0;

  SimulatedExperiment experiment([kinetics](double t) { return kinetics.phase_at(t); }, drift,
                                 probe, schedule, 4242);
  TrackerConfig cfg;
  const TrackRecord record = track(experiment, kinetics, cfg);
  REQUIRE(record.points.size() == 20);
  CHECK_FALSE(record.aborted);

  SUBCASE("estimates follow the truth") {
    const auto& truth = experiment.history();
    for (std::size_t i = 0; i < record.points.size(); ++i) {
      const double err =
          wrap_signed(record.points[i].estimate.phi_hat - truth[i].phi_true, kPhasePeriod);
      CHECK(std::fabs(err) < 5.0 * record.points[i].estimate.phi_sd);
    }
  }

  SUBCASE("settings satisfy the optimality condition once predictions exist") {
    for (const auto& p : record.points) {
      if (p.mode == PredictionMode::none) continue;
      const double residue =
          wrap_signed(8.0 * p.estimate.theta0 + 2.0 * p.phi_p - kPi / 4.0, kPi / 2.0);
      CHECK(std::fabs(residue) < 1e-9);
    }
  }

  SUBCASE("replayed predictions are bit-identical (strict causality)") {
    const auto replay = replay_predictions(record);
    REQUIRE(replay.size() == record.points.size());
    for (std::size_t i = 0; i < replay.size(); ++i) {
      CHECK(replay[i].phi_p == record.points[i].phi_p);
      CHECK(replay[i].mode == record.points[i].mode);
    }
  }

  SUBCASE("concentration uncertainty is the propagated phase uncertainty") {
    for (const auto& p : record.points) {
      const double expect = kinetics.c_initial_molar * p.estimate.phi_sd /
                            std::fabs(kinetics.phi_initial - kinetics.phi_final);
      CHECK(p.c_s_sd == doctest::Approx(expect).epsilon(1e-12));
      CHECK(p.c_s == doctest::Approx(kinetics.concentration_from_phase(p.estimate.phi_hat))
                         .epsilon(1e-12));
    }
  }
}

TEST_CASE("constant phase source converges to the stationary limit") {
  KineticsModel frozen = tracked_kinetics();
  frozen.inhibition = 1.0;  // phase fixed at phi_initial
  DriftModel drift;
  drift.v_initial = 0.9;
  Schedule schedule;
  schedule.interval_s = 10.0;
  schedule.horizon_s = 120.0;
  ProbeModel probe;
  probe.flux_cps = 2000.0;

  SimulatedExperiment experiment([frozen](double t) { return frozen.phase_at(t); }, drift, probe,
                                 schedule, 515);
  TrackerConfig cfg;
  const TrackRecord record = track(experiment, frozen, cfg);
  REQUIRE(record.points.size() == 12);

  for (std::size_t i = 4; i < record.points.size(); ++i) {
    const auto& p = record.points[i];
    CHECK(std::fabs(p.phi_p - frozen.phi_initial) < 0.02);
    CHECK(p.mode != PredictionMode::none);
    // near-optimal uncertainty once the prediction has locked in
    const double opt = 1.0 / std::sqrt(static_cast<double>(p.estimate.n_events) *
                                       fisher_optimal_phase_information(0.9));
    CHECK(p.estimate.phi_sd < 1.35 * opt);
  }
}

TEST_CASE("aborting source preserves the partial record") {
  struct FlakySource : BatchSource {
    int calls = 0;
    std::optional<double> next_time() const override {
      return 10.0 * (calls + 1);
    }
    CountBatch measure(const MeasurementSetting& setting) override {
      if (++calls > 3) throw std::runtime_error("detector offline");
      return simulate_batch(setting, 0.2, 0.9, 2000.0, 5.0, 77 + calls,
                            10.0 * calls);
    }
  } source;

  const TrackRecord record = track(source, tracked_kinetics(), TrackerConfig{});
  CHECK(record.aborted);
  CHECK(record.abort_reason == "detector offline");
  CHECK(record.points.size() == 3);
}

TEST_CASE("exponential staircase helper") {
  const auto phases = exponential_staircase(5, 0.35, -0.37, 300.0, 37.0);
  REQUIRE(phases.size() == 5);
  CHECK(phases[0] == doctest::Approx(0.35));
  for (std::size_t i = 1; i < phases.size(); ++i) CHECK(phases[i] < phases[i - 1]);
  CHECK(phases[4] == doctest::Approx(-0.37 + 0.72 * std::exp(-148.0 / 300.0)).epsilon(1e-12));
}

TEST_CASE("known-phase staircase: estimates match the inserted phases") {
  StaircaseConfig cfg;
  cfg.phases = exponential_staircase(12, 0.35, -0.37, 300.0, 37.0);
  cfg.flux_cps = 2000.0;
  cfg.duration_s = 1.0;
  cfg.v_true = 0.95;
  cfg.seed = 2718;
  const StaircaseResult res = run_adaptive_test(cfg);
  REQUIRE(res.points.size() == 12);
  for (const auto& p : res.points) {
    CHECK(std::fabs(wrap_signed(p.adaptive.phi_hat - p.phi_true, kPhasePeriod)) <
          4.0 * p.adaptive.phi_sd);
    CHECK(p.events > 1000);
  }
  // error settles at its minimum from the fourth point on; the exponential
  // fit takes over once four estimates exist
  for (std::size_t i = 3; i < res.points.size(); ++i) {
    if (i >= 4) CHECK(res.points[i].mode_adaptive == PredictionMode::exponential_fit);
    CHECK(res.points[i].adaptive.phi_sd < 1.2 * res.points[i].sd_optimal);
  }
}

TEST_CASE("reconstructed concentration decays monotonically within error bars") {
  const KineticsModel kinetics = tracked_kinetics();
  DriftModel drift;
  drift.v_initial = 0.95;
  drift.v_noise_sd = 0.005;
  Schedule schedule;
  schedule.interval_s = 37.0;
  schedule.horizon_s = 1500.0;
  ProbeModel probe;
  probe.flux_cps = 2000.0;

  SimulatedExperiment experiment([kinetics](double t) { return kinetics.phase_at(t); }, drift,
                                 probe, schedule, 90125);
  const TrackRecord record = track(experiment, kinetics, TrackerConfig{});
  REQUIRE(record.points.size() == 40);
  for (std::size_t i = 1; i < record.points.size(); ++i) {
    const auto& prev = record.points[i - 1];
    const auto& cur = record.points[i];
    CHECK(cur.c_s < prev.c_s + 2.0 * (cur.c_s_sd + prev.c_s_sd));
  }
  CHECK(record.points.back().c_s < 0.15);  // near completion after 2.5 tau
}
