#include "noontrack/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace noontrack {

using nlohmann::json;

double ScenarioConfig::inhibition() const {
  if (inhibition_override) return *inhibition_override;
  return inhibition_scenario(illumination);
}

KineticsModel ScenarioConfig::kinetics_model() const {
  KineticsModel k;
  k.phi_initial = deg2rad(phi_initial_deg);
  k.phi_final = deg2rad(phi_final_deg);
  k.tau_s = tau_s;
  k.t0_s = t0_s;
  k.c_initial_molar = c0_molar;
  k.inhibition = inhibition();
  return k;
}

TrackerConfig ScenarioConfig::tracker_config() const {
  TrackerConfig t;
  t.adaptive = adaptive_enabled;
  t.default_theta0 = deg2rad(default_theta0_deg);
  t.default_window_center = deg2rad(window_center_deg);
  t.estimator = estimator;
  return t;
}

void ScenarioConfig::validate() const {
  try {
    probe.validate();
    kinetics_model().validate();
    schedule.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigValidationError(e.what());
  }
  if (estimator.n_phi < 8 || estimator.n_v < 3)
    throw ConfigValidationError("estimator: grid too small");
  if (estimator.n_phi_max < estimator.n_phi)
    throw ConfigValidationError("estimator: n_phi_max below n_phi");
  if (!(estimator.prob_floor > 0.0 && estimator.prob_floor < 0.25))
    throw ConfigValidationError("estimator: prob_floor out of range");
  if (!(probe.flux_cps * schedule.interval_s >= 1.0))
    throw ConfigValidationError("schedule: below one expected event per batch");
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

ScenarioConfig parse(const json& j) {
  ScenarioConfig c;
  maybe(j, "name", c.name);
  maybe(j, "seed", c.seed);

  if (j.contains("probe")) {
    const auto& p = j.at("probe");
    maybe(p, "photon_number", c.probe.photon_number);
    maybe(p, "visibility", c.probe.visibility);
    maybe(p, "efficiency", c.probe.efficiency);
    maybe(p, "flux_cps", c.probe.flux_cps);
  }
  if (j.contains("kinetics")) {
    const auto& k = j.at("kinetics");
    maybe(k, "phi_initial_deg", c.phi_initial_deg);
    maybe(k, "phi_final_deg", c.phi_final_deg);
    maybe(k, "tau_s", c.tau_s);
    maybe(k, "t0_s", c.t0_s);
    maybe(k, "c0_molar", c.c0_molar);
    maybe(k, "illumination", c.illumination);
    if (k.contains("inhibition")) c.inhibition_override = k.at("inhibition").get<double>();
  }
  if (j.contains("drift")) {
    const auto& d = j.at("drift");
    maybe(d, "v_initial", c.drift.v_initial);
    maybe(d, "v_slope_per_s", c.drift.v_slope_per_s);
    maybe(d, "v_noise_sd", c.drift.v_noise_sd);
    maybe(d, "seed", c.drift.seed);
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    maybe(s, "t0_s", c.schedule.t0_s);
    maybe(s, "interval_s", c.schedule.interval_s);
    maybe(s, "horizon_s", c.schedule.horizon_s);
  }
  if (j.contains("estimator")) {
    const auto& e = j.at("estimator");
    maybe(e, "n_phi", c.estimator.n_phi);
    maybe(e, "n_v", c.estimator.n_v);
    maybe(e, "n_phi_max", c.estimator.n_phi_max);
    maybe(e, "prob_floor", c.estimator.prob_floor);
    maybe(e, "refine", c.estimator.refine);
    maybe(e, "sequential_prior", c.estimator.sequential_prior);
    maybe(e, "window_center_deg", c.window_center_deg);
  }
  if (j.contains("adaptive")) {
    const auto& a = j.at("adaptive");
    maybe(a, "enabled", c.adaptive_enabled);
    maybe(a, "default_theta0_deg", c.default_theta0_deg);
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    maybe(o, "dir", c.output_dir);
    maybe(o, "write_truth", c.write_truth);
  }
  return c;
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& text) {
  try {
    return parse(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigParseError(e.what());
  }
}

ScenarioConfig scenario_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::string scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["probe"] = {{"photon_number", c.probe.photon_number},
                {"visibility", c.probe.visibility},
                {"efficiency", c.probe.efficiency},
                {"flux_cps", c.probe.flux_cps}};
  json k = {{"phi_initial_deg", c.phi_initial_deg}, {"phi_final_deg", c.phi_final_deg},
            {"tau_s", c.tau_s},                     {"t0_s", c.t0_s},
            {"c0_molar", c.c0_molar},               {"illumination", c.illumination}};
  if (c.inhibition_override) k["inhibition"] = *c.inhibition_override;
  j["kinetics"] = k;
  j["drift"] = {{"v_initial", c.drift.v_initial},
                {"v_slope_per_s", c.drift.v_slope_per_s},
                {"v_noise_sd", c.drift.v_noise_sd},
                {"seed", c.drift.seed}};
  j["schedule"] = {{"t0_s", c.schedule.t0_s},
                   {"interval_s", c.schedule.interval_s},
                   {"horizon_s", c.schedule.horizon_s}};
  j["estimator"] = {{"n_phi", c.estimator.n_phi},
                    {"n_v", c.estimator.n_v},
                    {"n_phi_max", c.estimator.n_phi_max},
                    {"prob_floor", c.estimator.prob_floor},
                    {"refine", c.estimator.refine},
                    {"sequential_prior", c.estimator.sequential_prior},
                    {"window_center_deg", c.window_center_deg}};
  j["adaptive"] = {{"enabled", c.adaptive_enabled},
                   {"default_theta0_deg", c.default_theta0_deg}};
  j["output"] = {{"dir", c.output_dir}, {"write_truth", c.write_truth}};
  return j.dump(2);
}

std::uint64_t config_hash(const ScenarioConfig& config) {
  return fnv1a64(scenario_to_json(config));
}

std::string config_hash_hex(const ScenarioConfig& config) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  return buf;
}

std::vector<std::string> builtin_scenario_names() {
  return {"invertase-10", "invertase-20", "red-1h", "blue-10min", "blue-30min", "blue-1h"};
}

ScenarioConfig builtin_scenario(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  c.seed = 20210405;
  c.probe.photon_number = 2;
  c.probe.visibility = 0.95;
  c.probe.efficiency = 0.05;
  c.probe.flux_cps = 2000.0;
  c.phi_initial_deg = 20.0;
  c.phi_final_deg = -17.0;
  c.tau_s = 600.0;
  c.c0_molar = 0.8;
  c.drift.v_initial = 0.95;
  c.drift.v_slope_per_s = -1.0e-5;
  c.drift.v_noise_sd = 0.005;
  c.schedule.interval_s = 37.0;
  c.schedule.horizon_s = 2000.0;

  if (name == "invertase-10") {
    return c;
  }
  if (name == "invertase-20") {
    // Doubled enzyme concentration: the kinetics runs twice as fast.
    c.tau_s = 300.0;
    c.schedule.horizon_s = 1000.0;
    return c;
  }
  if (name == "red-1h" || name == "blue-10min" || name == "blue-30min" || name == "blue-1h") {
    std::string label = name;
    for (auto& ch : label)
      if (ch == '-') ch = '_';
    c.illumination = label;
    return c;
  }
  throw ConfigParseError("unknown builtin scenario: " + name);
}

ScenarioConfig load_scenario(const std::string& name_or_path) {
  for (const auto& known : builtin_scenario_names())
    if (known == name_or_path) return builtin_scenario(name_or_path);
  return scenario_from_file(name_or_path);
}

}  // namespace noontrack
