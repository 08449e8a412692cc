#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "noontrack/kinetics.hpp"
#include "noontrack/optics.hpp"

namespace noontrack {

/// Coincidence counts of one estimation batch, one entry per analyzer angle.
struct CountBatch {
  double t = 0.0;  // batch midpoint, seconds
  MeasurementSetting setting;
  std::array<long long, 4> counts{};
  double duration_s = 0.0;

  long long total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

/// Slow visibility drift: linear trend plus Gaussian jitter, clamped to [0, 1].
/// The seed offsets the jitter stream so the drift realization can be varied
/// independently of the count statistics.
struct DriftModel {
  double v_initial = 0.95;
  double v_slope_per_s = 0.0;
  double v_noise_sd = 0.0;
  std::uint64_t seed = 0;

  double trend_at(double t, double t0) const {
    return v_initial + v_slope_per_s * (t - t0);
  }
};

struct Schedule {
  double t0_s = 0.0;
  double interval_s = 37.0;
  double horizon_s = 0.0;

  void validate() const;  // throws std::invalid_argument
  std::size_t batch_count() const;
  /// Midpoint of batch i; batches tile [t0, t0 + horizon) in interval_s steps.
  double batch_midpoint(std::size_t i) const {
    return t0_s + (static_cast<double>(i) + 0.5) * interval_s;
  }
};

long long sample_poisson(double mean, std::mt19937_64& rng);

/// Split `total` events across the four outcomes with probabilities p
/// (chained binomials). p must be non-negative and sum to ~1.
std::array<long long, 4> sample_multinomial(long long total, const std::array<double, 4>& p,
                                            std::mt19937_64& rng);

/// One batch: total events Poisson(flux * duration) split multinomially by the
/// four setting probabilities. Deterministic given the seed.
CountBatch simulate_batch(const MeasurementSetting& setting, double phi_true, double v_true,
                          double flux_cps, double duration_s, std::uint64_t seed,
                          double t = 0.0);

/// A simulated batch together with the ground truth it was drawn from.
struct SimBatch {
  CountBatch batch;
  double phi_true = 0.0;
  double v_true = 1.0;
};

/// Interactive measurement source for the tracking loop: announces the next
/// batch time, then measures at a caller-chosen setting.
class BatchSource {
 public:
  virtual ~BatchSource() = default;
  virtual std::optional<double> next_time() const = 0;
  virtual CountBatch measure(const MeasurementSetting& setting) = 0;
};

/// Batch source backed by a ground-truth phase trajectory and drift model.
/// Count statistics and drift noise are drawn from separate child streams, so
/// the realized (phi, V) trajectory does not depend on the settings chosen.
class SimulatedExperiment : public BatchSource {
 public:
  using PhaseFn = std::function<double(double)>;

  SimulatedExperiment(PhaseFn phase_fn, DriftModel drift, ProbeModel probe,
                      Schedule schedule, std::uint64_t seed);

  std::optional<double> next_time() const override;
  CountBatch measure(const MeasurementSetting& setting) override;

  const std::vector<SimBatch>& history() const { return history_; }
  const Schedule& schedule() const { return schedule_; }

 private:
  PhaseFn phase_fn_;
  DriftModel drift_;
  ProbeModel probe_;
  Schedule schedule_;
  std::uint64_t seed_;
  std::size_t index_ = 0;
  std::vector<SimBatch> history_;
};

/// Policy hook supplying the analyzer setting for the next batch from the
/// batches measured so far.
using SettingPolicy =
    std::function<MeasurementSetting(const std::vector<SimBatch>& history, double t_next)>;

struct RunOutput {
  std::vector<SimBatch> batches;
  bool aborted = false;
  std::string abort_reason;
};

/// Full simulated run over the schedule: phi from the kinetics model, V from
/// the drift model, theta0 from the policy. A throwing policy aborts the run
/// with the partial output preserved.
RunOutput simulate_run(const KineticsModel& kinetics, const DriftModel& drift,
                       const Schedule& schedule, const ProbeModel& probe,
                       const SettingPolicy& policy, std::uint64_t seed);

/// CSV stream of batches: t, theta0, n0..n3, duration [, phi_true, v_true].
void write_batches_csv(std::ostream& out, std::span<const SimBatch> batches,
                       bool include_truth, const std::string& comment = "");

}  // namespace noontrack
