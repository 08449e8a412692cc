#include "noontrack/kinetics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace noontrack {

void KineticsModel::validate() const {
  if (!(tau_s > 0.0)) throw std::invalid_argument("kinetics: tau must be positive");
  if (phi_initial == phi_final)
    throw std::invalid_argument("kinetics: phi_initial must differ from phi_final");
  if (!(c_initial_molar > 0.0))
    throw std::invalid_argument("kinetics: initial concentration must be positive");
  if (!(inhibition >= 0.0 && inhibition <= 1.0))
    throw std::invalid_argument("kinetics: inhibition must be in [0, 1]");
}

double KineticsModel::phase_at(double t) const {
  if (t < t0_s) throw std::domain_error("kinetics: phase requested before t0");
  return phi_final + (phi_initial - phi_final) * std::exp(-(t - t0_s) * rate_per_s());
}

double KineticsModel::concentration_from_phase(double phi) const {
  if (phi_initial == phi_final)
    throw std::domain_error("kinetics: degenerate model, phi_initial == phi_final");
  return c_initial_molar * (phi - phi_final) / (phi_initial - phi_final);
}

double inhibition_scenario(std::string_view label) {
  if (label == "none") return 0.00;
  if (label == "red_1h") return 0.05;
  if (label == "blue_10min") return 0.10;
  if (label == "blue_30min") return 0.18;
  if (label == "blue_1h") return 0.25;
  throw std::invalid_argument("unknown illumination scenario: " + std::string(label));
}

}  // namespace noontrack
