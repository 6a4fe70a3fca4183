// hmhf: command-line front end of the harmonic map heat flow lab.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "hmhf/cli_io.hpp"
#include "hmhf/errors.hpp"

namespace {

hmhf::Point2 parse_point(const std::string& text) {
  std::istringstream ss(text);
  hmhf::Point2 p;
  char comma = 0;
  if (!(ss >> p.x)) throw CLI::ValidationError("expected 'x,y', got '" + text + "'");
  if (ss >> comma && comma == ',' && ss >> p.y) return p;
  throw CLI::ValidationError("expected 'x,y', got '" + text + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for harmonic map heat flow from the plane to the sphere"};
  app.set_version_flag("--version", std::string(HMHF_VERSION));
  app.require_subcommand(1);

  std::string config, out_dir;
  auto* sim = app.add_subcommand("simulate", "run the flow for a config file");
  sim->add_option("config", config, "INI run configuration")->required()->check(CLI::ExistingFile);
  sim->add_option("-o,--out", out_dir, "output directory (default: $HMHF_OUTPUT_ROOT/<label>)");

  std::string run_dir;
  std::vector<std::string> discs;
  std::optional<double> gamma0;
  auto* ana = app.add_subcommand("analyze", "delta series, collisions and quantization of a run");
  ana->add_option("run_dir", run_dir, "directory written by simulate")->required();
  ana->add_option("--disc", discs, "disc center x,y (repeatable; default from config)");
  ana->add_option("--gamma0", gamma0, "scale threshold (checked against the flow bound)");

  std::string snapshot, out_csv = "fit.csv", center = "0,0";
  double radius = 1.0, fit_gamma0 = 0.01, fit_t = 0.0;
  auto* fit = app.add_subcommand("fit-bubbles", "fit a bubble configuration to one snapshot");
  fit->add_option("snapshot", snapshot, "snapshot file")->required();
  fit->add_option("--center", center, "disc center x,y");
  fit->add_option("--radius", radius, "disc radius")->check(CLI::PositiveNumber);
  fit->add_option("--gamma0", fit_gamma0, "scale threshold");
  fit->add_option("--time", fit_t, "time stamp written to the csv");
  fit->add_option("-o,--out", out_csv, "output csv");

  std::string delta_csv, prefix;
  hmhf::CollisionOptions co;
  double c0 = 0.1;
  auto* det = app.add_subcommand("detect-collisions", "collision intervals of a delta csv");
  det->add_option("delta_csv", delta_csv, "csv written by analyze")->required()->check(
      CLI::ExistingFile);
  det->add_option("--epsilon", co.epsilon, "entry threshold");
  det->add_option("--eta", co.eta, "exit threshold");
  det->add_option("--quantization-tolerance", co.quantization_tolerance, "allowed |E - 4 pi K|");
  det->add_option("--c0", c0, "duration floor");
  det->add_option("-o,--out", prefix, "output prefix (default: input without .csv)");

  std::string manifest, root;
  auto* bat = app.add_subcommand("batch", "run a manifest of configs");
  bat->add_option("manifest", manifest, "INI manifest")->required()->check(CLI::ExistingFile);
  bat->add_option("-o,--out", root, "output root (default: $HMHF_OUTPUT_ROOT)");

  std::string report_dir;
  auto* rep = app.add_subcommand("make-report", "bundle the csvs of a run for plotting");
  rep->add_option("run_dir", run_dir, "directory written by simulate")->required();
  rep->add_option("-o,--out", report_dir, "report directory (default: <run_dir>/report)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      std::optional<std::filesystem::path> dir;
      if (!out_dir.empty()) dir = out_dir;
      return hmhf::cmd_simulate(config, dir, std::cerr);
    }
    if (*ana) {
      hmhf::AnalyzeOptions opts;
      for (const auto& d : discs) opts.discs.push_back(parse_point(d));
      opts.gamma0 = gamma0;
      return hmhf::cmd_analyze(run_dir, opts, std::cerr);
    }
    if (*fit) return hmhf::cmd_fit_bubbles(snapshot, {parse_point(center), radius}, fit_gamma0,
                                           fit_t, out_csv, std::cerr);
    if (*det) {
      if (prefix.empty()) {
        std::filesystem::path p = delta_csv;
        prefix = (p.parent_path() / p.stem()).string();
      }
      return hmhf::cmd_detect_collisions(delta_csv, co, c0, prefix, std::cerr);
    }
    if (*bat)
      return hmhf::cmd_batch(manifest, root.empty() ? hmhf::default_output_root() : std::filesystem::path(root),
                             std::cerr);
    if (*rep)
      return hmhf::cmd_make_report(
          run_dir, report_dir.empty() ? std::filesystem::path(run_dir) / "report"
                             : std::filesystem::path(report_dir),
          std::cerr);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hmhf::exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hmhf::exit_failure;
  }
  return hmhf::exit_failure;
}
