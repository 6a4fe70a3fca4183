#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hmhf/collision_analysis.hpp"
#include "hmhf/run_config.hpp"

namespace hmhf {

/// Files of a run directory.
namespace run_files {
inline constexpr const char* config = "config.ini";
inline constexpr const char* time_series = "time_series.csv";
inline constexpr const char* verdict = "verdict.json";
inline constexpr const char* snapshot_dir = "snapshots";
inline constexpr const char* snapshot_index = "snapshots/index.csv";
inline constexpr const char* summary = "summary.csv";
}  // namespace run_files

/// Exit codes of the commands.
enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_config = 2,
  exit_io = 3,
};

/// $HMHF_OUTPUT_ROOT, or ./hmhf_runs when unset.
std::filesystem::path default_output_root();

/// Output directory for a config: explicit override, run.output_dir, or
/// default_output_root() / label.
std::filesystem::path resolve_output_dir(const RunConfig& cfg,
                                         const std::optional<std::filesystem::path>& override_dir);

struct SimulateOutcome {
  int status = exit_ok;
  std::filesystem::path dir;
  /// Set once the flow has run.
  std::optional<FlowResult> result;
  std::size_t snapshot_count = 0;
};

/// Runs the flow and writes config.ini, time_series.csv, verdict.json and the
/// snapshot directory. On failure nothing is left behind in the output dir.
SimulateOutcome simulate(const RunConfig& cfg, const std::filesystem::path& dir,
                         std::ostream& log);

int cmd_simulate(const std::filesystem::path& config_path,
                 const std::optional<std::filesystem::path>& out_dir, std::ostream& log);

/// Snapshots listed in snapshots/index.csv, in order.
std::vector<Snapshot> load_run_snapshots(const std::filesystem::path& run_dir);

struct AnalyzeOptions {
  /// Disc centers; empty means the config's analysis.discs.
  std::vector<Point2> discs;
  std::optional<double> gamma0;
};

struct AnalysisOutcome {
  int status = exit_ok;
  /// One series per tracked disc.
  std::vector<DeltaSeries> series;
};

/// Writes delta_<i>.csv, fits_<i>.txt, collisions_<i>.csv, durations_<i>.csv
/// and quantization_<i>.csv for every tracked disc i.
AnalysisOutcome analyze(const std::filesystem::path& run_dir, const AnalyzeOptions& opts,
                        std::ostream& log);
int cmd_analyze(const std::filesystem::path& run_dir, const AnalyzeOptions& opts,
                std::ostream& log);

/// Fits one snapshot on D(center, radius); writes a one-row delta CSV and the
/// fit report next to it (same name, .txt).
int cmd_fit_bubbles(const std::filesystem::path& snapshot, const Disc& disc, double gamma0,
                    double t, const std::filesystem::path& out_csv, std::ostream& log);

/// Reads a delta CSV and writes the collision and duration reports next to
/// `out_prefix` (out_prefix + "_collisions.csv", + "_durations.csv").
int cmd_detect_collisions(const std::filesystem::path& delta_csv, const CollisionOptions& opts,
                          double c0, const std::filesystem::path& out_prefix, std::ostream& log);

struct BatchRow {
  std::string label;
  std::string verdict;
  double t_plus = 0.0;
  double final_energy = 0.0;
  int k_level = 0;
  std::string error;  // empty on success
};

/// Runs every manifest entry (simulate, then analyze when there are enough
/// snapshots) in its own subdirectory of out_root with at most `width`
/// concurrent runs, and writes summary.csv. Nonzero only if every run failed.
int cmd_batch(const std::filesystem::path& manifest, const std::filesystem::path& out_root,
              std::ostream& log);

/// Copies the CSVs of a run into out_dir and writes report.json describing
/// them (kind, columns, config hash) together with the verdict.
int cmd_make_report(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir,
                    std::ostream& log);

}  // namespace hmhf
