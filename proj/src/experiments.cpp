#include "noontrack/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace noontrack {

std::vector<double> exponential_staircase(std::size_t n, double phi0, double phi_inf,
                                          double tau_s, double interval_s) {
  std::vector<double> phases(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * interval_s;
    phases[i] = phi_inf + (phi0 - phi_inf) * std::exp(-t / tau_s);
  }
  return phases;
}

StaircaseResult run_adaptive_test(const StaircaseConfig& config) {
  if (config.phases.empty()) throw std::invalid_argument("adaptive test: no phases given");
  if (!(config.flux_cps * config.duration_s >= 1.0))
    throw std::invalid_argument("adaptive test: expected events below one");

  StaircaseResult result;
  std::vector<Estimate> history_adaptive, history_fixed;
  const MeasurementSetting fixed_setting(config.fixed_theta0);

  for (std::size_t i = 0; i < config.phases.size(); ++i) {
    StaircasePoint point;
    point.t = static_cast<double>(i) * config.interval_s;
    point.phi_true = config.phases[i];

    // One event total per point, shared by both arms.
    auto rng_total = child_rng(config.seed, 10, i);
    point.events = sample_poisson(config.flux_cps * config.duration_s, rng_total);

    const Prediction pred_a = predict_phase(history_adaptive, point.t);
    const MeasurementSetting setting_a = pred_a.mode != PredictionMode::none
                                             ? choose_setting(pred_a.phi_p)
                                             : MeasurementSetting(config.default_theta0);
    point.phi_p_adaptive = pred_a.phi_p;
    point.mode_adaptive = pred_a.mode;

    const Prediction pred_f = predict_phase(history_fixed, point.t);

    auto make_batch = [&](const MeasurementSetting& setting, std::uint64_t stream) {
      CountBatch batch;
      batch.t = point.t;
      batch.setting = setting;
      batch.duration_s = config.duration_s;
      auto rng = child_rng(config.seed, stream, i);
      batch.counts = sample_multinomial(
          point.events, setting_probabilities(setting, point.phi_true, config.v_true), rng);
      return batch;
    };

    const CountBatch batch_a = make_batch(setting_a, 20);
    const CountBatch batch_f = make_batch(fixed_setting, 30);

    const double center_a =
        pred_a.mode != PredictionMode::none ? pred_a.phi_p : config.window_center;
    const double center_f =
        pred_f.mode != PredictionMode::none ? pred_f.phi_p : config.window_center;
    point.adaptive = estimate_with_retry(batch_a, center_a, config.estimator);
    point.fixed = estimate_with_retry(batch_f, center_f, config.estimator);

    const double v_ref = std::clamp(point.adaptive.v_hat, 0.05, 0.999);
    point.sd_optimal = 1.0 / std::sqrt(static_cast<double>(std::max<long long>(point.events, 1)) *
                                       fisher_optimal_phase_information(v_ref));

    history_adaptive.push_back(point.adaptive);
    history_fixed.push_back(point.fixed);
    result.points.push_back(point);
  }
  return result;
}

}  // namespace noontrack
