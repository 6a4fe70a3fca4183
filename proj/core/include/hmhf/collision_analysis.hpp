#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "hmhf/bubble_fit.hpp"
#include "hmhf/flow_solver.hpp"

namespace hmhf {

enum class DeltaMode { blowup, global };

const char* to_string(DeltaMode mode);

struct DeltaRecord {
  double t = 0.0;
  Point2 y;
  double rho = 0.0;
  /// Fitted upper bound; NaN for unresolved records.
  double d_total = 0.0;
  double lambda_max = 0.0;
  std::size_t m = 0;
  double energy = 0.0;  // E(u(t); D(y, rho))
  /// False when the grid cannot resolve D(y, rho(t)).
  bool resolved = true;
};

struct DeltaSeries {
  DeltaMode mode = DeltaMode::blowup;
  double t_plus = 0.0;
  std::vector<DeltaRecord> records;
};

struct DeltaOptions {
  FitOptions fit;
  /// Called with every fitted record and its fit.
  std::function<void(const DeltaRecord&, const FitResult&)> on_fit;
  /// rho must cover at least this many grid spacings to count as resolved.
  double min_cells = 4.0;
};

/// Fits a bubble configuration on D(y, rho(t)) for every snapshot, with
/// rho = sqrt(t_plus - t) (blow-up) or sqrt(t) (global). Every snapshot gets a
/// record; those with rho = 0 or a disc the grid cannot resolve are flagged
/// unresolved. t_plus is ignored in global mode.
DeltaSeries build_delta_series(const std::vector<Snapshot>& snapshots, const Point2& y,
                               DeltaMode mode, double t_plus, Gamma0 gamma0,
                               const DeltaOptions& opts = {});

struct CollisionInterval {
  double sigma = 0.0;
  double tau = 0.0;
  std::size_t sigma_index = 0;
  std::size_t tau_index = 0;
  Point2 y;
  double rho = 0.0;  // rho(sigma)
  double epsilon = 0.0;
  double eta = 0.0;
  int k_level = 0;
  /// d is non-decreasing from sigma to tau.
  bool monotone = false;

  double duration() const { return tau - sigma; }
};

struct CollisionOptions {
  double epsilon = 0.05;
  double eta = 0.3;
  /// Allowed |E(sigma) - 4 pi K|.
  double quantization_tolerance = 0.2 * 4.0 * 3.14159265358979323846;
};

/// An interval is a crossing sigma < tau of resolved records with
/// d(sigma) <= epsilon, d(tau) >= eta and epsilon < d < eta strictly in between,
/// that also satisfies tau - sigma <= epsilon rho(sigma)^2 and lies within the
/// quantization tolerance of K = nearest integer to E(sigma) / 4 pi.
std::vector<CollisionInterval> detect_collisions(const DeltaSeries& series,
                                                 const CollisionOptions& opts = {});

/// Same definition by exhaustive enumeration of index pairs.
std::vector<CollisionInterval> detect_collisions_brute_force(const DeltaSeries& series,
                                                             const CollisionOptions& opts = {});

struct DurationEntry {
  double duration = 0.0;
  double lambda_max = 0.0;
  /// duration / lambda_max^2 (infinite when lambda_max = 0).
  double ratio = 0.0;
  bool below_floor = false;
};

struct DurationReport {
  double c0 = 0.1;
  std::vector<DurationEntry> entries;
  std::size_t flagged = 0;
};

DurationReport duration_law_check(const std::vector<CollisionInterval>& intervals,
                                  const DeltaSeries& series, double c0 = 0.1);

struct QuantizationEntry {
  double t = 0.0;
  int k = 0;
  /// |E - 4 pi K| / 4 pi.
  double deviation = 0.0;
  bool within_tolerance = false;
};

struct QuantizationReport {
  double tolerance = 0.2 * 4.0 * 3.14159265358979323846;
  std::vector<QuantizationEntry> entries;
  /// Counts of deviations in [b / bins, (b + 1) / bins) of one half quantum; the
  /// last bin also takes everything above.
  std::vector<std::size_t> histogram;
};

int nearest_level(double energy);

QuantizationReport quantization_check(const DeltaSeries& series,
                                      double tolerance = 0.2 * 4.0 * 3.14159265358979323846,
                                      std::size_t bins = 10);

/// Spearman rank correlation (average ranks for ties). NaN for fewer than two
/// points or a constant sample.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hmhf
