#pragma once

#include <cstdint>
#include <vector>

#include "noontrack/estimation.hpp"
#include "noontrack/tracker.hpp"

namespace noontrack {

/// Known-phase staircase test of the adaptive scheme: the same calibrated
/// phase sequence is measured twice, once with the setting adapted to the
/// running prediction and once at a fixed theta0. Both arms share each
/// point's event total, so their uncertainties compare at equal M.
struct StaircaseConfig {
  std::vector<double> phases;
  double interval_s = 37.0;
  double flux_cps = 2000.0;
  double duration_s = 1.0;
  double v_true = 0.95;
  double fixed_theta0 = kPi / 32.0;
  double default_theta0 = kPi / 32.0;
  double window_center = 0.0;
  std::uint64_t seed = 1;
  EstimatorConfig estimator;
};

struct StaircasePoint {
  double t = 0.0;
  double phi_true = 0.0;
  long long events = 0;
  Estimate adaptive;
  Estimate fixed;
  double phi_p_adaptive = 0.0;
  PredictionMode mode_adaptive = PredictionMode::none;
  double sd_optimal = 0.0;  // 1/sqrt(M * F_opt(v_hat)) for the realized M
};

struct StaircaseResult {
  std::vector<StaircasePoint> points;
};

/// Phases sampled from phi_inf + (phi0 - phi_inf) exp(-t/tau) at the given
/// interval; the default trajectory of the adaptive test.
std::vector<double> exponential_staircase(std::size_t n, double phi0, double phi_inf,
                                          double tau_s, double interval_s);

StaircaseResult run_adaptive_test(const StaircaseConfig& config);

}  // namespace noontrack
