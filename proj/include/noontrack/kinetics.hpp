#pragma once

#include <string_view>

namespace noontrack {

/// Ground-truth enzymatic phase evolution. The optical phase relaxes from
/// phi_initial to phi_final as the substrate is consumed,
///   phi(t) = phi_final + (phi_initial - phi_final) exp(-(t - t0) rate),
/// with rate = (1 - inhibition) / tau. The offset form lets the phase cross
/// zero while the substrate concentration still decays as a pure exponential.
struct KineticsModel {
  double phi_initial = 0.0;     // radians, phi(t0)
  double phi_final = 0.0;       // radians, phi(t -> inf)
  double tau_s = 1.0;           // uninhibited time constant, seconds
  double t0_s = 0.0;
  double c_initial_molar = 0.8; // C_s(t0)
  double inhibition = 0.0;      // fractional activity reduction in [0, 1]

  void validate() const;  // throws std::invalid_argument

  double rate_per_s() const { return (1.0 - inhibition) / tau_s; }

  /// Phase at time t >= t0. Throws std::domain_error for t < t0.
  double phase_at(double t) const;

  /// Substrate concentration corresponding to a measured phase,
  ///   C_s = C_s(t0) (phi - phi_final) / (phi_initial - phi_final).
  /// Not clamped; noise may push it slightly outside [0, C_s(t0)].
  double concentration_from_phase(double phi) const;
};

/// Activity-reduction fraction for a named illumination scenario. Labels:
/// none, red_1h, blue_10min, blue_30min, blue_1h. The red_1h and blue_1h
/// values anchor measured reductions; the intermediate blue exposures are
/// illustrative defaults. Throws std::invalid_argument for unknown labels.
double inhibition_scenario(std::string_view label);

}  // namespace noontrack
