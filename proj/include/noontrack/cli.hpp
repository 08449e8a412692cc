#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "noontrack/scenario.hpp"
#include "noontrack/tracker.hpp"

namespace noontrack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigParse = 2;
inline constexpr int kExitConfigInvalid = 3;
inline constexpr int kExitRuntime = 4;

/// Output directory resolution: explicit flag, then the config value, then
/// the NOONTRACK_OUT_DIR environment variable, then the working directory.
std::filesystem::path resolve_output_dir(const std::string& flag_value,
                                         const std::string& config_value);

struct TrackArtifacts {
  std::filesystem::path trajectory_csv;
  std::filesystem::path bounds_csv;
  std::filesystem::path summary_json;
  TrackRecord record;
};

/// Run a full tracking experiment and write the trajectory CSV, the
/// per-point bounds CSV, and the run-summary JSON.
int cmd_track(const ScenarioConfig& config, const std::filesystem::path& outdir,
              std::ostream& log, TrackArtifacts* artifacts = nullptr);

/// Simulate coincidence batches only (fixed or adaptive-free settings) and
/// write the batch CSV.
int cmd_simulate(const ScenarioConfig& config, const std::filesystem::path& outdir,
                 std::ostream& log, std::filesystem::path* csv_path = nullptr);

/// Print the phase-uncertainty bounds report; JSON when machine_readable.
int cmd_bounds(const ProbeModel& probe, long long events, bool machine_readable,
               std::ostream& out);

/// Built-in consistency checks: oracle sweep, Fisher finite differences,
/// posterior coverage micro-suite. Non-zero exit on any failure.
int cmd_selfcheck(std::ostream& out);

/// Plot-ready CSV for one of: fringe-calibration, tracking, errors-vs-bounds,
/// adaptive-test, visibility.
int cmd_figdata(const std::string& figure_id, const ScenarioConfig& config,
                const std::filesystem::path& outdir, std::ostream& log,
                std::filesystem::path* csv_path = nullptr);

}  // namespace noontrack::cli
