#pragma once

#include <span>
#include <string>
#include <vector>

#include "noontrack/estimation.hpp"
#include "noontrack/kinetics.hpp"
#include "noontrack/sim.hpp"

namespace noontrack {

enum class PredictionMode { none, interpolation, exponential_fit };

const char* to_string(PredictionMode mode);

/// Result of fitting y(t) = phi_inf + amplitude * exp(-(t - t_ref)/tau).
struct FitResult {
  double phi_inf = 0.0;
  double amplitude = 0.0;
  double tau_hat = 0.0;
  double residual_rms = 0.0;
  bool converged = false;
  double t_ref = 0.0;
  double tau_sd = 0.0;   // 1-sigma from the parameter covariance
  double rate_sd = 0.0;  // propagated onto 1/tau

  double eval(double t) const;
  double rate() const { return 1.0 / tau_hat; }
};

/// Damped (Levenberg-style) least squares for the offset exponential.
/// Initialization: phi_inf from the last sample, tau from the log-slope of
/// the two samples preceding it; relative step tolerance 1e-8, at most 100
/// iterations.
FitResult fit_offset_exponential(std::span<const double> t, std::span<const double> y,
                                 double t_ref);

struct Prediction {
  double phi_p = 0.0;
  PredictionMode mode = PredictionMode::none;
};

/// Phase prediction for the next batch from the estimate history: nothing for
/// an empty history, linear extrapolation for 1-3 points, the exponential fit
/// from the fourth point on (with interpolation as the fallback when the fit
/// does not converge). Throws std::invalid_argument for non-increasing
/// timestamps or a t_next not later than the history.
Prediction predict_phase(std::span<const Estimate> history, double t_next);

/// Fisher-optimal base angle for a predicted phase: theta0 = (pi/4 - 2 phi)/8,
/// reduced to [0, pi/4).
MeasurementSetting choose_setting(double phi_p);

struct TrackerConfig {
  bool adaptive = true;
  double default_theta0 = kPi / 32.0;
  double default_window_center = 0.0;
  EstimatorConfig estimator;
};

struct TrackPoint {
  Estimate estimate;
  double phi_p = 0.0;
  PredictionMode mode = PredictionMode::none;
  double c_s = 0.0;
  double c_s_sd = 0.0;
  bool recentered = false;  // bimodality triggered a window re-centering retry
};

struct TrackRecord {
  std::vector<TrackPoint> points;
  bool aborted = false;
  std::string abort_reason;
};

/// One batch estimate with the tracker's bimodality handling: if the first
/// pass flags two comparable modes, retry once with the window re-centered on
/// the dominant-mode estimate; a persistent flag stays on the record.
Estimate estimate_with_retry(const CountBatch& batch, double window_center,
                             const EstimatorConfig& config, bool* recentered = nullptr);

/// Closed tracking loop: predict, choose the setting, measure, estimate, and
/// convert the phase to a substrate concentration with linearly propagated
/// uncertainty. Source exhaustion ends the run cleanly.
TrackRecord track(BatchSource& source, const KineticsModel& conversion,
                  const TrackerConfig& config);

/// Recompute every prediction from the recorded estimate prefix; used to
/// verify strict causality of a record.
std::vector<Prediction> replay_predictions(const TrackRecord& record);

}  // namespace noontrack
