#include "noontrack/optics.hpp"

#include <cmath>
#include <stdexcept>

namespace noontrack {

void ProbeModel::validate() const {
  if (photon_number < 1) throw std::invalid_argument("probe: photon_number must be >= 1");
  if (!(visibility >= 0.0 && visibility <= 1.0))
    throw std::invalid_argument("probe: visibility must be in [0, 1]");
  if (!(efficiency > 0.0 && efficiency <= 1.0))
    throw std::invalid_argument("probe: efficiency must be in (0, 1]");
  if (!(flux_cps > 0.0)) throw std::invalid_argument("probe: flux must be positive");
}

MeasurementSetting::MeasurementSetting(double theta0) {
  if (!std::isfinite(theta0)) throw std::invalid_argument("setting: theta0 must be finite");
  theta0_ = wrap_into(theta0, 0.0, kThetaPeriod);
}

std::array<double, 4> MeasurementSetting::angles() const {
  return {theta0_, theta0_ + kPi / 16.0, theta0_ + kPi / 8.0, theta0_ + 3.0 * kPi / 16.0};
}

double TwoPhotonState::norm_squared() const {
  return amplitude_hv * amplitude_hv + amplitude_hh * amplitude_hh +
         amplitude_vv * amplitude_vv;
}

TwoPhotonState noon_state_after_sample(double phi) {
  if (!std::isfinite(phi)) throw std::invalid_argument("noon_state_after_sample: phi must be finite");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  TwoPhotonState st;
  st.amplitude_hv = std::cos(phi);
  st.amplitude_hh = -std::sin(phi) * inv_sqrt2;
  st.amplitude_vv = std::sin(phi) * inv_sqrt2;
  return st;
}

double fringe_probability(double theta, double phi, double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0))
    throw std::domain_error("fringe_probability: visibility must be in [0, 1]");
  return 0.25 * (1.0 + visibility * std::cos(8.0 * theta + 2.0 * phi));
}

std::array<double, 4> setting_probabilities(const MeasurementSetting& setting,
                                            double phi, double visibility) {
  const auto thetas = setting.angles();
  std::array<double, 4> p{};
  for (std::size_t k = 0; k < 4; ++k) p[k] = fringe_probability(thetas[k], phi, visibility);
  return p;
}

double amplitude_oracle_coincidence(double theta, double phi) {
  const TwoPhotonState st = noon_state_after_sample(phi);

  // Write the state as a polynomial in the input creation operators,
  //   P(aH, aV) = u aH^2 + w aH aV + v aV^2,
  // using |2> = (a^dag)^2 / sqrt(2) |0>.
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const double u = st.amplitude_hh * inv_sqrt2;
  const double w = st.amplitude_hv;
  const double v = st.amplitude_vv * inv_sqrt2;

  // Analyzer half-wave plate at angle theta, with the plate angle counted in
  // the opposite rotational sense to the sample rotation:
  //   aH^dag -> c bH^dag - s bV^dag,   aV^dag -> -s bH^dag - c bV^dag.
  const double c = std::cos(2.0 * theta);
  const double s = std::sin(2.0 * theta);

  // Substitute and collect the coefficient of bH^dag bV^dag (one photon per
  // analyzer output -> coincidence):
  //   aH^2      -> -2 c s
  //   aH aV     ->  s^2 - c^2
  //   aV^2      -> +2 c s
  const double coincidence_amp = u * (-2.0 * c * s) + w * (s * s - c * c) + v * (2.0 * c * s);
  return coincidence_amp * coincidence_amp;
}

double single_photon_fringe(double theta, double phi) {
  const double a = std::cos(2.0 * theta + 0.5 * phi);
  return a * a;
}

}  // namespace noontrack
