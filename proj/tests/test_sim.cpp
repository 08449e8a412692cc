#include <cmath>
#include <stdexcept>
#include <sstream>

#include "doctest.h"
#include "noontrack/sim.hpp"

using namespace noontrack;

namespace {
KineticsModel test_kinetics() {
  KineticsModel k;
  k.phi_initial = 0.35;
  k.phi_final = -0.30;
  k.tau_s = 600.0;
  return k;
}
}  // namespace

TEST_CASE("simulate_batch is deterministic and validates inputs") {
  const MeasurementSetting setting(0.05);
  const CountBatch a = simulate_batch(setting, 0.3, 0.9, 2000.0, 5.0, 99);
  const CountBatch b = simulate_batch(setting, 0.3, 0.9, 2000.0, 5.0, 99);
  CHECK(a.counts == b.counts);
  CHECK(a.total() == b.total());
  CHECK(a.duration_s == 5.0);

  const CountBatch c = simulate_batch(setting, 0.3, 0.9, 2000.0, 5.0, 100);
  CHECK(a.counts != c.counts);

  CHECK_THROWS_AS(simulate_batch(setting, 0.0, 1.0, -1.0, 5.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_batch(setting, 0.0, 1.0, 2000.0, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_batch(setting, 0.0, 1.0, 0.5, 1.0, 1), std::invalid_argument);
}

TEST_CASE("uniform multinomial at V = 0") {
  const CountBatch batch = simulate_batch(MeasurementSetting(0.11), 0.7, 0.0, 1e6, 1.0, 42);
  const double m = static_cast<double>(batch.total());
  const double sigma = std::sqrt(0.25 * 0.75 / m);
  for (long long n : batch.counts) {
    CHECK(std::fabs(static_cast<double>(n) / m - 0.25) < 3.0 * sigma);
  }
}

TEST_CASE("zero-probability setting stays empty") {
  // theta0 = 0, phi = 0, V = 1: p2 = 0 exactly.
  const CountBatch batch = simulate_batch(MeasurementSetting(0.0), 0.0, 1.0, 1e6, 1.0, 7);
  CHECK(batch.counts[2] == 0);
}

TEST_CASE("empirical frequencies match the fringe law at scale") {
  const MeasurementSetting setting(0.0);
  const double phi = kPi / 8.0, v = 0.95;
  const CountBatch batch = simulate_batch(setting, phi, v, 2000.0, 37.0, 4711);
  const auto p = setting_probabilities(setting, phi, v);
  const double m = static_cast<double>(batch.total());
  CHECK(m > 70000);  // E[M] = 74000
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(std::fabs(static_cast<double>(batch.counts[k]) / m - p[k]) < 4.0 / std::sqrt(m));
  }
}

TEST_CASE("mean count frequencies are unbiased over 200 seeds") {
  const MeasurementSetting setting(0.03);
  const double phi = 0.4, v = 0.85, flux = 2000.0, duration = 1.0;
  const auto p = setting_probabilities(setting, phi, v);

  double sum[4] = {0, 0, 0, 0};
  const int runs = 200;
  for (int k = 0; k < runs; ++k) {
    const CountBatch b = simulate_batch(setting, phi, v, flux, duration, 1000 + k);
    for (std::size_t i = 0; i < 4; ++i)
      sum[i] += static_cast<double>(b.counts[i]) / static_cast<double>(b.total());
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const double mean = sum[i] / runs;
    // standard error of the mean frequency ~ sqrt(p q / E[M]) / sqrt(runs)
    const double se_mean = std::sqrt(p[i] * (1.0 - p[i]) / (flux * duration)) / std::sqrt(runs);
    CHECK(std::fabs(mean - p[i]) < 5.0 * se_mean);
  }
}

TEST_CASE("schedule geometry") {
  Schedule s;
  s.interval_s = 37.0;
  s.horizon_s = 0.0;
  CHECK(s.batch_count() == 0);
  s.horizon_s = 2000.0;
  CHECK(s.batch_count() == 54);  // floor(2000 / 37)
  s.interval_s = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("simulate_run honors the schedule, the seed and the policy") {
  const auto kinetics = test_kinetics();
  DriftModel drift;
  drift.v_initial = 0.9;
  drift.v_noise_sd = 0.01;
  Schedule schedule;
  schedule.interval_s = 37.0;
  schedule.horizon_s = 370.0;
  ProbeModel probe;
  probe.flux_cps = 2000.0;

  const SettingPolicy fixed_policy = [](const std::vector<SimBatch>&, double) {
    return MeasurementSetting(0.02);
  };

  SUBCASE("horizon 0 gives an empty run") {
    Schedule empty = schedule;
    empty.horizon_s = 0.0;
    const RunOutput out = simulate_run(kinetics, drift, empty, probe, fixed_policy, 5);
    CHECK(out.batches.empty());
    CHECK_FALSE(out.aborted);
  }

  SUBCASE("batch count and determinism") {
    const RunOutput a = simulate_run(kinetics, drift, schedule, probe, fixed_policy, 5);
    const RunOutput b = simulate_run(kinetics, drift, schedule, probe, fixed_policy, 5);
    CHECK(a.batches.size() == 10);
    REQUIRE(b.batches.size() == a.batches.size());
    for (std::size_t i = 0; i < a.batches.size(); ++i) {
      CHECK(a.batches[i].batch.counts == b.batches[i].batch.counts);
      CHECK(a.batches[i].batch.t == b.batches[i].batch.t);
      CHECK(a.batches[i].phi_true == b.batches[i].phi_true);
      CHECK(a.batches[i].v_true == b.batches[i].v_true);
    }
  }

  SUBCASE("the event totals do not depend on the chosen settings") {
    const SettingPolicy other_policy = [](const std::vector<SimBatch>& h, double) {
      return MeasurementSetting(0.19 + 0.01 * static_cast<double>(h.size()));
    };
    const RunOutput a = simulate_run(kinetics, drift, schedule, probe, fixed_policy, 5);
    const RunOutput b = simulate_run(kinetics, drift, schedule, probe, other_policy, 5);
    REQUIRE(a.batches.size() == b.batches.size());
    for (std::size_t i = 0; i < a.batches.size(); ++i) {
      CHECK(a.batches[i].batch.total() == b.batches[i].batch.total());
      CHECK(a.batches[i].v_true == b.batches[i].v_true);
    }
  }

  SUBCASE("a throwing policy aborts with partial output preserved") {
    const SettingPolicy flaky = [](const std::vector<SimBatch>& history, double) {
      if (history.size() == 3) throw std::runtime_error("policy offline");
      return MeasurementSetting(0.0);
    };
    const RunOutput out = simulate_run(kinetics, drift, schedule, probe, flaky, 5);
    CHECK(out.aborted);
    CHECK(out.batches.size() == 3);
    CHECK(out.abort_reason == "policy offline");
  }

  SUBCASE("efficiency only scales the bounds analysis, not the statistics") {
    ProbeModel lossy = probe;
    lossy.efficiency = 0.05;
    ProbeModel clean = probe;
    clean.efficiency = 1.0;
    const RunOutput a = simulate_run(kinetics, drift, schedule, lossy, fixed_policy, 21);
    const RunOutput b = simulate_run(kinetics, drift, schedule, clean, fixed_policy, 21);
    REQUIRE(a.batches.size() == b.batches.size());
    for (std::size_t i = 0; i < a.batches.size(); ++i)
      CHECK(a.batches[i].batch.counts == b.batches[i].batch.counts);
  }
}

TEST_CASE("stationary truth gives statistically identical batches") {
  DriftModel drift;
  drift.v_initial = 0.9;
  Schedule schedule;
  schedule.interval_s = 10.0;
  schedule.horizon_s = 400.0;
  ProbeModel probe;
  probe.flux_cps = 5000.0;

  KineticsModel frozen = test_kinetics();
  frozen.inhibition = 1.0;  // phase stays at phi_initial

  const RunOutput out = simulate_run(frozen, drift, schedule, probe,
                                     [](const std::vector<SimBatch>&, double) {
                                       return MeasurementSetting(0.07);
                                     },
                                     33);
  REQUIRE(out.batches.size() == 40);
  const auto p = setting_probabilities(MeasurementSetting(0.07), frozen.phi_initial, 0.9);
  for (const auto& sb : out.batches) {
    CHECK(sb.phi_true == doctest::Approx(frozen.phi_initial).epsilon(1e-14));
    const double m = static_cast<double>(sb.batch.total());
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(std::fabs(static_cast<double>(sb.batch.counts[k]) / m - p[k]) <
            5.0 / std::sqrt(m));
    }
  }
}

TEST_CASE("batch CSV stream") {
  const CountBatch batch = simulate_batch(MeasurementSetting(0.0), 0.1, 0.9, 100.0, 1.0, 3, 18.5);
  std::vector<SimBatch> batches{SimBatch{batch, 0.1, 0.9}};
  std::ostringstream with_truth, bare;
  write_batches_csv(with_truth, batches, true, "config_hash=abc");
  write_batches_csv(bare, batches, false);
  CHECK(with_truth.str().find("# config_hash=abc\n") == 0);
  CHECK(with_truth.str().find("t,theta0,n0,n1,n2,n3,duration,phi_true,v_true\n") !=
        std::string::npos);
  CHECK(bare.str().find("phi_true") == std::string::npos);
  CHECK(with_truth.str().find("18.5,") != std::string::npos);
}
