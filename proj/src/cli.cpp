#include "noontrack/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "noontrack/experiments.hpp"

namespace noontrack::cli {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json point_to_json(const TrackPoint& p) {
  return json{{"t", p.estimate.t},
              {"phi_p", p.phi_p},
              {"mode", to_string(p.mode)},
              {"theta0", p.estimate.theta0},
              {"phi_hat", p.estimate.phi_hat},
              {"phi_sd", p.estimate.phi_sd},
              {"v_hat", p.estimate.v_hat},
              {"v_sd", p.estimate.v_sd},
              {"c_s", p.c_s},
              {"c_s_sd", p.c_s_sd},
              {"n_events", p.estimate.n_events},
              {"window_center", p.estimate.window_center},
              {"recentered", p.recentered},
              {"bimodal", p.estimate.bimodal},
              {"uninformative", p.estimate.uninformative}};
}

std::string trajectory_csv(const TrackRecord& record, const std::string& hash) {
  std::ostringstream out;
  out << "# config_hash=" << hash << "\n";
  out << "t,phi_p,mode,theta0,phi_hat_rad,phi_sd_rad,v_hat,v_sd,c_s_molar,c_s_sd_molar,"
         "n_events,window_center_rad,phi_hat_deg,recentered\n";
  for (const auto& p : record.points) {
    const auto& e = p.estimate;
    out << fmt(e.t) << ',' << fmt(p.phi_p) << ',' << to_string(p.mode) << ',' << fmt(e.theta0)
        << ',' << fmt(e.phi_hat) << ',' << fmt(e.phi_sd) << ',' << fmt(e.v_hat) << ','
        << fmt(e.v_sd) << ',' << fmt(p.c_s) << ',' << fmt(p.c_s_sd) << ',' << e.n_events << ','
        << fmt(e.window_center) << ',' << fmt(rad2deg(e.phi_hat)) << ','
        << (p.recentered ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string bounds_csv(const TrackRecord& record, const ProbeModel& probe,
                       const std::string& hash) {
  std::ostringstream out;
  out << "# config_hash=" << hash << "\n";
  out << "t,n_events,phi_sd_rad,crb_noon_ideal,bound_classical\n";
  for (const auto& p : record.points) {
    const long long m = std::max<long long>(p.estimate.n_events, 1);
    const auto r = bounds_report(probe, m);
    out << fmt(p.estimate.t) << ',' << p.estimate.n_events << ',' << fmt(p.estimate.phi_sd)
        << ',' << fmt(r.crb_phase_noon) << ',' << fmt(r.bound_classical) << "\n";
  }
  return out.str();
}

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

CheckResult check_oracle_sweep() {
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> u_theta(0.0, kPi);
  std::uniform_real_distribution<double> u_phi(-kPi, kPi);
  double max_dev = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double theta = u_theta(rng);
    const double phi = u_phi(rng);
    const double closed = 0.5 * (1.0 + std::cos(8.0 * theta + 2.0 * phi));
    max_dev = std::max(max_dev, std::fabs(amplitude_oracle_coincidence(theta, phi) - closed));
  }
  return {"oracle-equivalence sweep (1000 points)", max_dev < 1e-12,
          "max deviation " + fmt(max_dev)};
}

CheckResult check_fisher_fd() {
  std::mt19937_64 rng(171717);
  std::uniform_real_distribution<double> u_theta(0.0, kPi / 4.0);
  std::uniform_real_distribution<double> u_phi(-kPi / 2.0, kPi / 2.0);
  std::uniform_real_distribution<double> u_v(0.2, 0.95);
  const double h = 1e-6;
  double max_dev = 0.0;
  for (int n = 0; n < 100; ++n) {
    const double theta0 = u_theta(rng);
    const double phi = u_phi(rng);
    const double v = u_v(rng);
    const MeasurementSetting setting(theta0);

    const auto f = fisher_matrix(theta0, phi, v);
    const auto p0 = setting_probabilities(setting, phi, v);
    const auto pp = setting_probabilities(setting, phi + h, v);
    const auto pm = setting_probabilities(setting, phi - h, v);
    const auto pvp = setting_probabilities(setting, phi, v + h);
    const auto pvm = setting_probabilities(setting, phi, v - h);

    double fd[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t k = 0; k < 4; ++k) {
      const double dphi = (pp[k] - pm[k]) / (2.0 * h);
      const double dv = (pvp[k] - pvm[k]) / (2.0 * h);
      fd[0][0] += dphi * dphi / p0[k];
      fd[0][1] += dphi * dv / p0[k];
      fd[1][1] += dv * dv / p0[k];
    }
    max_dev = std::max({max_dev, std::fabs(fd[0][0] - f[0][0]), std::fabs(fd[0][1] - f[0][1]),
                        std::fabs(fd[1][1] - f[1][1])});
  }
  return {"fisher finite-difference check (100 points)", max_dev < 1e-6,
          "max entry deviation " + fmt(max_dev)};
}

CheckResult check_coverage() {
  const double phi_true = 0.22;
  const double v_true = 0.9;
  const long long events = 10000;
  const MeasurementSetting setting = choose_setting(phi_true);
  const auto probs = setting_probabilities(setting, phi_true, v_true);
  EstimatorConfig cfg;

  int hits = 0;
  const int runs = 200;
  for (int k = 0; k < runs; ++k) {
    auto rng = child_rng(909090, 5, static_cast<std::uint64_t>(k));
    CountBatch batch;
    batch.setting = setting;
    batch.duration_s = 1.0;
    batch.counts = sample_multinomial(events, probs, rng);
    const Estimate est = estimate_batch(batch, phi_true, cfg).estimate;
    if (std::fabs(wrap_signed(est.phi_hat - phi_true, kPhasePeriod)) <= est.phi_sd) ++hits;
  }
  const double frac = static_cast<double>(hits) / runs;
  return {"posterior 68% coverage micro-suite (200 runs)", frac >= 0.63 && frac <= 0.73,
          "coverage " + fmt(frac)};
}

std::string figdata_fringe_calibration(const ScenarioConfig& config, const std::string& hash) {
  std::ostringstream out;
  out << "# config_hash=" << hash << "\n";
  out << "theta_rad,theta_deg,noon_rate_cps,noon_counts,single_photon_rate_cps\n";
  const double phi = 0.0;  // empty cuvette calibration
  const double v = config.probe.visibility;
  const double dwell = 1.0;
  for (int i = 0; i < 181; ++i) {
    const double theta = kPi / 2.0 * static_cast<double>(i) / 180.0;
    const double rate = config.probe.flux_cps * 0.5 * (1.0 + v * std::cos(8.0 * theta + 2.0 * phi));
    const double classical = config.probe.flux_cps * single_photon_fringe(theta, phi);
    auto rng = child_rng(config.seed, 40, static_cast<std::uint64_t>(i));
    const long long counts = rate * dwell > 0.0 ? sample_poisson(rate * dwell, rng) : 0;
    out << fmt(theta) << ',' << fmt(rad2deg(theta)) << ',' << fmt(rate) << ',' << counts << ','
        << fmt(classical) << "\n";
  }
  return out.str();
}

std::string figdata_adaptive_test(const ScenarioConfig& config, const std::string& hash) {
  StaircaseConfig sc;
  sc.phases = exponential_staircase(12, deg2rad(config.phi_initial_deg),
                                    deg2rad(config.phi_final_deg), config.tau_s,
                                    config.schedule.interval_s);
  sc.interval_s = config.schedule.interval_s;
  sc.flux_cps = config.probe.flux_cps;
  sc.duration_s = 1.0;
  sc.v_true = config.drift.v_initial;
  sc.seed = config.seed;
  sc.estimator = config.estimator;
  sc.default_theta0 = deg2rad(config.default_theta0_deg);
  sc.fixed_theta0 = deg2rad(config.default_theta0_deg);
  const StaircaseResult res = run_adaptive_test(sc);

  std::ostringstream out;
  out << "# config_hash=" << hash << "\n";
  out << "index,t,phi_true,n_events,mode,theta0_adaptive,phi_hat_adaptive,phi_sd_adaptive,"
         "theta0_fixed,phi_hat_fixed,phi_sd_fixed,sd_fisher_optimal\n";
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    const auto& p = res.points[i];
    out << i << ',' << fmt(p.t) << ',' << fmt(p.phi_true) << ',' << p.events << ','
        << to_string(p.mode_adaptive) << ',' << fmt(p.adaptive.theta0) << ','
        << fmt(p.adaptive.phi_hat) << ',' << fmt(p.adaptive.phi_sd) << ','
        << fmt(p.fixed.theta0) << ',' << fmt(p.fixed.phi_hat) << ',' << fmt(p.fixed.phi_sd)
        << ',' << fmt(p.sd_optimal) << "\n";
  }
  return out.str();
}

}  // namespace

std::filesystem::path resolve_output_dir(const std::string& flag_value,
                                         const std::string& config_value) {
  if (!flag_value.empty()) return flag_value;
  if (!config_value.empty()) return config_value;
  if (const char* env = std::getenv("NOONTRACK_OUT_DIR"); env && *env) return env;
  return ".";
}

int cmd_track(const ScenarioConfig& config, const std::filesystem::path& outdir,
              std::ostream& log, TrackArtifacts* artifacts) {
  try {
    config.validate();
  } catch (const ConfigValidationError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfigInvalid;
  }
  try {
    const KineticsModel kinetics = config.kinetics_model();
    SimulatedExperiment experiment([kinetics](double t) { return kinetics.phase_at(t); },
                                   config.drift, config.probe, config.schedule, config.seed);
    const TrackRecord record = track(experiment, kinetics, config.tracker_config());

    const std::string hash = config_hash_hex(config);
    std::filesystem::create_directories(outdir);
    TrackArtifacts a;
    a.record = record;
    a.trajectory_csv = outdir / (config.name + "_trajectory.csv");
    a.bounds_csv = outdir / (config.name + "_bounds.csv");
    a.summary_json = outdir / (config.name + "_summary.json");

    write_text_file(a.trajectory_csv, trajectory_csv(record, hash));
    write_text_file(a.bounds_csv, bounds_csv(record, config.probe, hash));

    json summary;
    summary["name"] = config.name;
    summary["seed"] = config.seed;
    summary["config_hash"] = hash;
    summary["config"] = json::parse(scenario_to_json(config));
    summary["aborted"] = record.aborted;
    if (record.aborted) summary["abort_reason"] = record.abort_reason;
    summary["n_points"] = record.points.size();
    json points = json::array();
    for (const auto& p : record.points) points.push_back(point_to_json(p));
    summary["points"] = points;
    write_text_file(a.summary_json, summary.dump(2) + "\n");

    log << "tracked " << record.points.size() << " points";
    if (record.aborted) log << " (aborted: " << record.abort_reason << ")";
    log << "\n  " << a.trajectory_csv.string() << "\n  " << a.bounds_csv.string() << "\n  "
        << a.summary_json.string() << "\n";
    if (artifacts) *artifacts = std::move(a);
    return record.aborted ? kExitRuntime : kExitOk;
  } catch (const std::exception& e) {
    log << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_simulate(const ScenarioConfig& config, const std::filesystem::path& outdir,
                 std::ostream& log, std::filesystem::path* csv_path) {
  try {
    config.validate();
  } catch (const ConfigValidationError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfigInvalid;
  }
  try {
    const KineticsModel kinetics = config.kinetics_model();
    const MeasurementSetting fixed(deg2rad(config.default_theta0_deg));
    const RunOutput run =
        simulate_run(kinetics, config.drift, config.schedule, config.probe,
                     [&fixed](const std::vector<SimBatch>&, double) { return fixed; },
                     config.seed);

    std::filesystem::create_directories(outdir);
    const auto path = outdir / (config.name + "_batches.csv");
    std::ostringstream body;
    write_batches_csv(body, run.batches, config.write_truth,
                      "config_hash=" + config_hash_hex(config));
    write_text_file(path, body.str());
    log << "simulated " << run.batches.size() << " batches\n  " << path.string() << "\n";
    if (csv_path) *csv_path = path;
    return kExitOk;
  } catch (const std::exception& e) {
    log << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_bounds(const ProbeModel& probe, long long events, bool machine_readable,
               std::ostream& out) {
  BoundsReport r;
  try {
    r = bounds_report(probe, events);
  } catch (const std::invalid_argument& e) {
    out << "invalid probe: " << e.what() << "\n";
    return kExitConfigInvalid;
  }
  if (machine_readable) {
    json j{{"photon_number", r.photon_number},
           {"visibility", r.visibility},
           {"efficiency", r.efficiency},
           {"events", r.events},
           {"bound_heisenberg_product", r.bound_heisenberg_product},
           {"bound_classical", r.bound_classical},
           {"crb_phase_noon", r.crb_phase_noon},
           {"crb_phase_noon_operational", r.crb_phase_noon_operational},
           {"crb_phase_fisher", r.crb_phase_fisher},
           {"bound_classical_lossy", r.bound_classical_lossy},
           {"crb_phase_noon_lossy", r.crb_phase_noon_lossy},
           {"v_threshold", r.v_threshold},
           {"advantage", r.advantage}};
    out << j.dump(2) << "\n";
    return kExitOk;
  }
  out << "phase uncertainty bounds (N=" << r.photon_number << ", M=" << r.events << ")\n";
  out << "  visibility                  " << fmt(r.visibility) << "\n";
  out << "  efficiency                  " << fmt(r.efficiency) << "\n";
  out << "  heisenberg product bound    " << fmt(r.bound_heisenberg_product) << "\n";
  out << "  classical bound (ideal)     " << fmt(r.bound_classical) << "\n";
  out << "  noon CRB (ideal)            " << fmt(r.crb_phase_noon) << "\n";
  out << "  noon CRB (V-degraded)       " << fmt(r.crb_phase_noon_operational) << "\n";
  out << "  noon CRB (Fisher, 4-angle)  " << fmt(r.crb_phase_fisher) << "\n";
  out << "  classical bound (lossy)     " << fmt(r.bound_classical_lossy) << "\n";
  out << "  noon CRB (lossy)            " << fmt(r.crb_phase_noon_lossy) << "\n";
  out << "  visibility threshold        " << fmt(r.v_threshold) << "\n";
  out << "  quantum advantage           " << (r.advantage ? "yes" : "no") << "\n";
  return kExitOk;
}

int cmd_selfcheck(std::ostream& out) {
  const CheckResult results[] = {check_oracle_sweep(), check_fisher_fd(), check_coverage()};
  bool all = true;
  for (const auto& r : results) {
    out << (r.passed ? "[ok]   " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
    all = all && r.passed;
  }
  out << (all ? "selfcheck passed\n" : "selfcheck FAILED\n");
  return all ? kExitOk : kExitFailure;
}

int cmd_figdata(const std::string& figure_id, const ScenarioConfig& config,
                const std::filesystem::path& outdir, std::ostream& log,
                std::filesystem::path* csv_path) {
  try {
    config.validate();
  } catch (const ConfigValidationError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfigInvalid;
  }
  const std::string hash = config_hash_hex(config);
  try {
    std::string body;
    if (figure_id == "fringe-calibration") {
      body = figdata_fringe_calibration(config, hash);
    } else if (figure_id == "adaptive-test") {
      body = figdata_adaptive_test(config, hash);
    } else if (figure_id == "tracking" || figure_id == "errors-vs-bounds" ||
               figure_id == "visibility") {
      const KineticsModel kinetics = config.kinetics_model();
      SimulatedExperiment experiment([kinetics](double t) { return kinetics.phase_at(t); },
                                     config.drift, config.probe, config.schedule, config.seed);
      const TrackRecord record = track(experiment, kinetics, config.tracker_config());
      if (figure_id == "tracking") {
        body = trajectory_csv(record, hash);
      } else if (figure_id == "errors-vs-bounds") {
        std::ostringstream out;
        out << "# config_hash=" << hash << "\n";
        out << "t,n_events,phi_sd_rad,crb_noon_ideal,bound_classical,sd_fisher_optimal\n";
        for (const auto& p : record.points) {
          const long long m = std::max<long long>(p.estimate.n_events, 1);
          const auto r = bounds_report(config.probe, m);
          const double v_ref = std::clamp(p.estimate.v_hat, 0.05, 0.999);
          const double opt =
              1.0 / std::sqrt(static_cast<double>(m) * fisher_optimal_phase_information(v_ref));
          out << fmt(p.estimate.t) << ',' << p.estimate.n_events << ',' << fmt(p.estimate.phi_sd)
              << ',' << fmt(r.crb_phase_noon) << ',' << fmt(r.bound_classical) << ',' << fmt(opt)
              << "\n";
        }
        body = out.str();
      } else {
        std::ostringstream out;
        out << "# config_hash=" << hash << "\n";
        out << "t,v_true,v_hat,v_sd\n";
        const auto& truth = experiment.history();
        for (std::size_t i = 0; i < record.points.size(); ++i) {
          const auto& p = record.points[i];
          out << fmt(p.estimate.t) << ',' << fmt(truth[i].v_true) << ',' << fmt(p.estimate.v_hat)
              << ',' << fmt(p.estimate.v_sd) << "\n";
        }
        body = out.str();
      }
    } else {
      log << "unknown figure id: " << figure_id << " (expected fringe-calibration, tracking, "
             "errors-vs-bounds, adaptive-test, visibility)\n";
      return kExitConfigInvalid;
    }

    std::filesystem::create_directories(outdir);
    const auto path = outdir / (config.name + "_fig_" + figure_id + ".csv");
    write_text_file(path, body);
    log << "wrote " << path.string() << "\n";
    if (csv_path) *csv_path = path;
    return kExitOk;
  } catch (const std::exception& e) {
    log << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace noontrack::cli
