#include "noontrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace noontrack {

namespace {
// Child-stream ids for the per-run generators.
constexpr std::uint64_t kStreamCounts = 1;
constexpr std::uint64_t kStreamDrift = 2;

std::string csv_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}
}  // namespace

void Schedule::validate() const {
  if (!(interval_s > 0.0)) throw std::invalid_argument("schedule: interval must be positive");
  if (!(horizon_s >= 0.0)) throw std::invalid_argument("schedule: horizon must be non-negative");
  if (!std::isfinite(t0_s)) throw std::invalid_argument("schedule: t0 must be finite");
}

std::size_t Schedule::batch_count() const {
  validate();
  return static_cast<std::size_t>(std::floor(horizon_s / interval_s));
}

long long sample_poisson(double mean, std::mt19937_64& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw std::invalid_argument("sample_poisson: mean must be finite and non-negative");
  std::poisson_distribution<long long> dist(mean);
  return dist(rng);
}

std::array<long long, 4> sample_multinomial(long long total, const std::array<double, 4>& p,
                                            std::mt19937_64& rng) {
  if (total < 0) throw std::invalid_argument("sample_multinomial: total must be non-negative");
  std::array<long long, 4> n{};
  long long remaining = total;
  double prob_left = p[0] + p[1] + p[2] + p[3];
  for (std::size_t k = 0; k < 3 && remaining > 0; ++k) {
    if (p[k] < 0.0) throw std::invalid_argument("sample_multinomial: negative probability");
    double q = prob_left > 0.0 ? p[k] / prob_left : 0.0;
    q = std::clamp(q, 0.0, 1.0);
    if (q >= 1.0) {
      n[k] = remaining;
      remaining = 0;
    } else if (q > 0.0) {
      std::binomial_distribution<long long> dist(remaining, q);
      n[k] = dist(rng);
      remaining -= n[k];
    }
    prob_left -= p[k];
  }
  n[3] = remaining;
  return n;
}

CountBatch simulate_batch(const MeasurementSetting& setting, double phi_true, double v_true,
                          double flux_cps, double duration_s, std::uint64_t seed, double t) {
  if (!(flux_cps > 0.0)) throw std::invalid_argument("simulate_batch: flux must be positive");
  if (!(duration_s > 0.0)) throw std::invalid_argument("simulate_batch: duration must be positive");
  if (flux_cps * duration_s < 1.0)
    throw std::invalid_argument("simulate_batch: expected events below one");

  auto rng = child_rng(seed, kStreamCounts, 0);
  // Total first: the event count must not depend on the setting, so that runs
  // sharing a seed see identical per-batch totals whatever policy chose.
  const long long total = sample_poisson(flux_cps * duration_s, rng);
  const auto p = setting_probabilities(setting, phi_true, v_true);

  CountBatch batch;
  batch.t = t;
  batch.setting = setting;
  batch.duration_s = duration_s;
  batch.counts = sample_multinomial(total, p, rng);
  return batch;
}

SimulatedExperiment::SimulatedExperiment(PhaseFn phase_fn, DriftModel drift, ProbeModel probe,
                                         Schedule schedule, std::uint64_t seed)
    : phase_fn_(std::move(phase_fn)),
      drift_(drift),
      probe_(probe),
      schedule_(schedule),
      seed_(seed) {
  probe_.validate();
  schedule_.validate();
  if (!phase_fn_) throw std::invalid_argument("experiment: phase function required");
}

std::optional<double> SimulatedExperiment::next_time() const {
  if (index_ >= schedule_.batch_count()) return std::nullopt;
  return schedule_.batch_midpoint(index_);
}

CountBatch SimulatedExperiment::measure(const MeasurementSetting& setting) {
  const auto t = next_time();
  if (!t) throw std::runtime_error("experiment: schedule exhausted");

  const double phi_true = phase_fn_(*t);
  auto drift_rng = child_rng(seed_ ^ drift_.seed, kStreamDrift, index_);
  double v_true = drift_.trend_at(*t, schedule_.t0_s);
  if (drift_.v_noise_sd > 0.0) {
    std::normal_distribution<double> jitter(0.0, drift_.v_noise_sd);
    v_true += jitter(drift_rng);
  }
  v_true = std::clamp(v_true, 0.0, 1.0);

  std::uint64_t s = seed_;
  const std::uint64_t batch_seed = splitmix64(s) ^ (0x9e3779b97f4a7c15ull * (index_ + 1));
  CountBatch batch = simulate_batch(setting, phi_true, v_true, probe_.flux_cps,
                                    schedule_.interval_s, batch_seed, *t);
  ++index_;
  history_.push_back(SimBatch{batch, phi_true, v_true});
  return batch;
}

RunOutput simulate_run(const KineticsModel& kinetics, const DriftModel& drift,
                       const Schedule& schedule, const ProbeModel& probe,
                       const SettingPolicy& policy, std::uint64_t seed) {
  kinetics.validate();
  SimulatedExperiment experiment([&kinetics](double t) { return kinetics.phase_at(t); }, drift,
                                 probe, schedule, seed);
  RunOutput out;
  while (auto t_next = experiment.next_time()) {
    MeasurementSetting setting;
    try {
      setting = policy(out.batches, *t_next);
    } catch (const std::exception& e) {
      out.aborted = true;
      out.abort_reason = e.what();
      return out;
    }
    experiment.measure(setting);
    out.batches.push_back(experiment.history().back());
  }
  return out;
}

void write_batches_csv(std::ostream& out, std::span<const SimBatch> batches, bool include_truth,
                       const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "t,theta0,n0,n1,n2,n3,duration";
  if (include_truth) out << ",phi_true,v_true";
  out << "\n";
  for (const auto& sb : batches) {
    out << csv_num(sb.batch.t) << ',' << csv_num(sb.batch.setting.theta0());
    for (long long n : sb.batch.counts) out << ',' << n;
    out << ',' << csv_num(sb.batch.duration_s);
    if (include_truth) out << ',' << csv_num(sb.phi_true) << ',' << csv_num(sb.v_true);
    out << "\n";
  }
}

}  // namespace noontrack
