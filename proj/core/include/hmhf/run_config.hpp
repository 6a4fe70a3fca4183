#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hmhf/bubbles.hpp"
#include "hmhf/flow_solver.hpp"

namespace hmhf {

struct GridSpec {
  std::string type = "radial";  // radial | cartesian
  int degree = 1;
  double h = 0.01;
  /// Radial grading; h_core = 0 means uniform spacing h.
  double h_core = 0.0;
  double r_core = 0.0;
  double ratio = 1.02;
  double r_max = 1.0;
  /// Cartesian square [c - w, c + w]^2.
  double half_width = 2.0;
  Point2 center;
};

/// Initial data are equivariant profiles phi(r) about initial.center:
///   bubble            2 atan((r / lambda)^k)
///   perturbed-bubble  bubble + amplitude sin(pi r / r_max) r / r_max
///   ramp              boundary_angle r / r_max
///   constant          0
/// optionally followed by seeded Gaussian noise of size `noise`.
struct InitialSpec {
  std::string kind = "bubble";
  double lambda = 1.0;
  double amplitude = 0.0;
  double boundary_angle = 0.0;
  double noise = 0.0;
  Point2 center;
};

struct AnalysisSpec {
  /// Centers y of the tracked discs.
  std::vector<Point2> discs{Point2{0.0, 0.0}};
  std::optional<double> gamma0;
  /// Fit every n-th snapshot.
  std::size_t fit_every = 1;
  std::string mode = "auto";  // auto | blow-up | global
  double epsilon = 0.05;
  double eta = 0.3;
  double c0 = 0.1;
  double quantization_tolerance = 0.2 * 4.0 * 3.14159265358979323846;
};

struct RunConfig {
  std::string label = "run";
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  GridSpec grid;
  InitialSpec initial;
  FlowConfig flow;
  AnalysisSpec analysis;

  /// Canonical INI text of every effective value; hashed into output headers.
  std::string canonical() const;
  std::uint64_t hash() const;
};

/// Flat INI with sections run, grid, initial, flow, analysis. Throws
/// ConfigError naming the line or key on any problem, including unknown keys.
RunConfig parse_run_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

SphereField make_initial_field(const RunConfig& cfg);

/// Override from the config, or the flow bound for the initial energy.
/// Throws ConfigError when the override exceeds that bound.
Gamma0 effective_gamma0(const RunConfig& cfg, double initial_energy);

/// Builds the initial field and checks gamma0 against its energy.
void validate_run_config(const RunConfig& cfg);

struct ManifestEntry {
  std::string label;
  std::filesystem::path config;
};

struct ExperimentManifest {
  std::vector<ManifestEntry> runs;
  std::size_t width = 1;
};

/// [batch] width = n, [runs] label = config path (relative to the manifest).
/// Duplicate labels are rejected.
ExperimentManifest load_manifest(const std::filesystem::path& path);

}  // namespace hmhf
