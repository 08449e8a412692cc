#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "noontrack/cli.hpp"

namespace {

using namespace noontrack;

struct ScenarioFlags {
  std::string config_path;
  std::string scenario_name;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon_s, interval_s, flux_cps, tau_s, inhibition, visibility,
      v_noise_sd;
  std::optional<bool> adaptive, truth;

  void attach(CLI::App* cmd, bool with_output = true) {
    cmd->add_option("-c,--config", config_path, "scenario config file (JSON)");
    cmd->add_option("-s,--scenario", scenario_name, "builtin scenario name");
    if (with_output) cmd->add_option("-o,--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "override the run seed");
    cmd->add_option("--horizon", horizon_s, "override schedule horizon [s]");
    cmd->add_option("--interval", interval_s, "override sampling interval [s]");
    cmd->add_option("--flux", flux_cps, "override coincidence flux [1/s]");
    cmd->add_option("--tau", tau_s, "override kinetics time constant [s]");
    cmd->add_option("--inhibition", inhibition, "override activity reduction fraction");
    cmd->add_option("--visibility", visibility, "override initial visibility");
    cmd->add_option("--v-noise", v_noise_sd, "override visibility jitter sd");
    cmd->add_flag("--adaptive,!--no-adaptive", adaptive, "enable/disable the adaptive setting");
    cmd->add_flag("--truth,!--no-truth", truth, "include ground-truth columns");
  }

  // Flag values override anything read from the file.
  ScenarioConfig resolve() const {
    ScenarioConfig config;
    if (!scenario_name.empty())
      config = builtin_scenario(scenario_name);
    else if (!config_path.empty())
      config = scenario_from_file(config_path);
    else
      config = builtin_scenario("invertase-10");
    if (seed) config.seed = *seed;
    if (horizon_s) config.schedule.horizon_s = *horizon_s;
    if (interval_s) config.schedule.interval_s = *interval_s;
    if (flux_cps) config.probe.flux_cps = *flux_cps;
    if (tau_s) config.tau_s = *tau_s;
    if (inhibition) config.inhibition_override = *inhibition;
    if (visibility) {
      config.probe.visibility = *visibility;
      config.drift.v_initial = *visibility;
    }
    if (v_noise_sd) config.drift.v_noise_sd = *v_noise_sd;
    if (adaptive) config.adaptive_enabled = *adaptive;
    if (truth) config.write_truth = *truth;
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-photon N00N phase tracking: simulation, estimation, bounds"};
  app.require_subcommand(1);

  ScenarioFlags track_flags, sim_flags, fig_flags;

  auto* track_cmd = app.add_subcommand("track", "run a tracking experiment, write CSV/JSON");
  track_flags.attach(track_cmd);

  auto* sim_cmd = app.add_subcommand("simulate", "generate coincidence batches only");
  sim_flags.attach(sim_cmd);

  auto* bounds_cmd = app.add_subcommand("bounds", "print phase-uncertainty bounds");
  double eta = 1.0, vis = 1.0;
  int n_photons = 2;
  long long events = 1;
  bool as_json = false;
  bounds_cmd->add_option("--eta", eta, "overall efficiency (0, 1]")->required();
  bounds_cmd->add_option("-n,--n", n_photons, "photon number N")->required();
  bounds_cmd->add_option("-M,--events", events, "number of detected events M")->required();
  bounds_cmd->add_option("--v", vis, "fringe visibility");
  bounds_cmd->add_flag("--json", as_json, "machine-readable output");

  auto* self_cmd = app.add_subcommand("selfcheck", "oracle, Fisher and coverage checks");
  (void)self_cmd;

  auto* fig_cmd = app.add_subcommand("figdata", "emit plot-ready CSV data");
  std::string figure_id;
  fig_cmd
      ->add_option("-f,--figure", figure_id,
                   "one of: fringe-calibration, tracking, errors-vs-bounds, adaptive-test, "
                   "visibility")
      ->required();
  fig_flags.attach(fig_cmd);

  auto* list_cmd = app.add_subcommand("scenarios", "list builtin scenarios");
  (void)list_cmd;

  CLI11_PARSE(app, argc, argv);

  try {
    if (track_cmd->parsed()) {
      const ScenarioConfig config = track_flags.resolve();
      const auto outdir = cli::resolve_output_dir(track_flags.out_dir, config.output_dir);
      return cli::cmd_track(config, outdir, std::cout);
    }
    if (sim_cmd->parsed()) {
      const ScenarioConfig config = sim_flags.resolve();
      const auto outdir = cli::resolve_output_dir(sim_flags.out_dir, config.output_dir);
      return cli::cmd_simulate(config, outdir, std::cout);
    }
    if (bounds_cmd->parsed()) {
      ProbeModel probe;
      probe.photon_number = n_photons;
      probe.efficiency = eta;
      probe.visibility = vis;
      return cli::cmd_bounds(probe, events, as_json, std::cout);
    }
    if (self_cmd->parsed()) return cli::cmd_selfcheck(std::cout);
    if (fig_cmd->parsed()) {
      const ScenarioConfig config = fig_flags.resolve();
      const auto outdir = cli::resolve_output_dir(fig_flags.out_dir, config.output_dir);
      return cli::cmd_figdata(figure_id, config, outdir, std::cout);
    }
    if (list_cmd->parsed()) {
      for (const auto& name : builtin_scenario_names()) std::cout << name << "\n";
      return cli::kExitOk;
    }
  } catch (const ConfigParseError& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return cli::kExitConfigParse;
  } catch (const ConfigValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kExitConfigInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitRuntime;
  }
  return cli::kExitOk;
}
