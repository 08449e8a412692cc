#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "noontrack/estimation.hpp"
#include "noontrack/kinetics.hpp"
#include "noontrack/optics.hpp"
#include "noontrack/sim.hpp"
#include "noontrack/tracker.hpp"

namespace noontrack {

struct ConfigParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Full description of a seeded experiment. Angles cross the config boundary
/// in degrees and are converted to radians when the runtime models are built.
struct ScenarioConfig {
  std::string name = "custom";
  std::uint64_t seed = 1;

  ProbeModel probe;

  // kinetics
  double phi_initial_deg = 20.0;
  double phi_final_deg = -17.0;
  double tau_s = 600.0;
  double t0_s = 0.0;
  double c0_molar = 0.8;
  std::string illumination = "none";
  std::optional<double> inhibition_override;  // explicit value wins over the label

  DriftModel drift;
  Schedule schedule;

  // estimator
  EstimatorConfig estimator;
  double window_center_deg = 0.0;

  // adaptive loop
  bool adaptive_enabled = true;
  double default_theta0_deg = 5.625;  // pi/32

  // output
  std::string output_dir;
  bool write_truth = true;

  double inhibition() const;
  KineticsModel kinetics_model() const;
  TrackerConfig tracker_config() const;
  void validate() const;  // throws ConfigValidationError
};

ScenarioConfig scenario_from_json(const std::string& text);
ScenarioConfig scenario_from_file(const std::string& path);
std::string scenario_to_json(const ScenarioConfig& config);

/// FNV-1a over the canonical JSON echo; embedded in every artifact.
std::uint64_t config_hash(const ScenarioConfig& config);
std::string config_hash_hex(const ScenarioConfig& config);

std::vector<std::string> builtin_scenario_names();
ScenarioConfig builtin_scenario(const std::string& name);

/// Load order: builtin name, then file path. Throws ConfigParseError.
ScenarioConfig load_scenario(const std::string& name_or_path);

}  // namespace noontrack
