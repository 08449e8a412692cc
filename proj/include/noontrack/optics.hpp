#pragma once

#include <array>

#include "noontrack/common.hpp"

namespace noontrack {

/// Statistical identity of the two-photon probe. The flux is the detected
/// coincidence rate, so the efficiency enters only the bounds analysis:
/// post-selected statistics do not depend on it.
struct ProbeModel {
  int photon_number = 2;
  double visibility = 1.0;
  double efficiency = 1.0;
  double flux_cps = 2000.0;

  void validate() const;  // throws std::invalid_argument
};

/// Analyzer design of one estimation batch: a base half-wave-plate angle plus
/// the three offsets pi/16 apart. theta0 is stored reduced to [0, pi/4), the
/// period of the coincidence fringe in theta.
class MeasurementSetting {
 public:
  MeasurementSetting() = default;
  explicit MeasurementSetting(double theta0);

  double theta0() const { return theta0_; }
  std::array<double, 4> angles() const;

 private:
  double theta0_ = 0.0;
};

/// Real coefficients of the post-sample two-photon polarization state over
/// the basis {|1H 1V>, |2H 0V>, |0H 2V>}.
struct TwoPhotonState {
  double amplitude_hv = 1.0;
  double amplitude_hh = 0.0;
  double amplitude_vv = 0.0;

  double norm_squared() const;
};

/// State of the N00N probe after the chiral sample has rotated both photons
/// by phi/2: amplitudes (cos phi, -sin phi / sqrt 2, +sin phi / sqrt 2).
TwoPhotonState noon_state_after_sample(double phi);

/// Coincidence probability (1 + V cos(8 theta + 2 phi)) / 4 for one of the
/// four analyzer settings; the 1/4 normalizes the four settings to a
/// multinomial under equal acquisition time. Throws std::domain_error for
/// visibility outside [0, 1].
double fringe_probability(double theta, double phi, double visibility);

/// The four per-setting probabilities p(theta0 + k pi/16; phi, V). Sums to 1.
std::array<double, 4> setting_probabilities(const MeasurementSetting& setting,
                                            double phi, double visibility);

/// Independent derivation of the ideal (V = 1) fringe: propagates the
/// two-photon state through the analyzer half-wave plate by explicit
/// creation-operator algebra and returns the conditional probability of one
/// photon per analyzer output. Equals (1 + cos(8 theta + 2 phi)) / 2.
double amplitude_oracle_coincidence(double theta, double phi);

/// Single-photon polarimeter fringe (1 + cos(4 theta + phi)) / 2 through the
/// same analyzer; reference curve at half the N00N fringe frequency.
double single_photon_fringe(double theta, double phi);

}  // namespace noontrack
