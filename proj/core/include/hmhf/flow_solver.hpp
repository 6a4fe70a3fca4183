#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "hmhf/geometry.hpp"
#include "hmhf/sphere_field.hpp"

namespace hmhf {

struct FlowState {
  double t = 0.0;
  SphereField field;
  double dt = 0.0;
  std::size_t step_count = 0;
};

struct TimeRecord {
  double t = 0.0;
  double energy = 0.0;
  double tension_l2_sq = 0.0;
  double dissipation_cum = 0.0;
  double lambda_min_est = 0.0;
  double grad_max = 0.0;
  double dt = 0.0;
};

struct TimeSeries {
  std::vector<TimeRecord> records;
};

enum class VerdictKind { reached_final_time, blowup_detected, degenerate_step };

const char* to_string(VerdictKind kind);
VerdictKind verdict_from_string(const std::string& s);

struct BlowupVerdict {
  VerdictKind kind = VerdictKind::reached_final_time;
  /// Final time for reached/degenerate runs; extrapolated T+ after blow-up.
  double t_plus = 0.0;
  Point2 point;
  std::string message;
};

struct Snapshot {
  double t = 0.0;
  SphereField field;
};

struct FlowConfig {
  double t_final = 1.0;
  double dt_max = 1e-3;
  /// dt is never reduced below this when retrying a failed step.
  double dt_min = 1e-16;
  /// dt <= scale_factor * lambda_min^2 with lambda_min = 1 / max|grad u|.
  double scale_factor = 0.05;
  /// Explicit 2D steps use dt <= explicit_factor * h^2 / 4.
  double explicit_factor = 0.9;
  /// Regular snapshot cadence in time; 0 keeps only the first and last.
  double snapshot_interval = 0.0;
  /// Blow-up: max|grad u| > gradient_factor / h_min for `persist` steps ...
  double gradient_factor = 0.25;
  int persist = 10;
  /// ... and at least `concentration_energy` inside radius radius_factor / max|grad u|.
  double concentration_energy = 3.0 * 3.14159265358979323846;
  double radius_factor = 8.0;
  /// Snapshots near blow-up are geometric in T - t with this ratio.
  double approach_ratio = 0.84;
  /// Record every n-th accepted step (the first and last are always kept).
  std::size_t record_stride = 1;
  std::size_t max_steps = 200'000'000;
};

struct FlowResult {
  TimeSeries series;
  std::vector<Snapshot> snapshots;
  BlowupVerdict verdict;
  FlowState final_state;
  /// Times at which lambda_min first dropped below lambda_min(0) / 2^m.
  std::vector<double> dyadic_crossings;
};

/// Receives snapshots as they are produced; when given, run_flow does not
/// keep them in FlowResult::snapshots.
using SnapshotSink = std::function<void(const Snapshot&)>;

/// One backward-Euler step of the equivariant flow with a convex/concave
/// split of the sin^2 potential; diffusion and the stabilizing part of the
/// potential are implicit (tridiagonal solve). The outer node is pinned.
FlowState step_equivariant(const FlowState& state, double dt);

/// One explicit Euler step of u_t = T(u) followed by renormalization. The
/// boundary is frozen. Requires dt <= h^2 / 4.
FlowState step_full2d(const FlowState& state, double dt);

FlowResult run_flow(const SphereField& initial, const FlowConfig& config,
                    const SnapshotSink& sink = {});

/// T+ from the last three dyadic crossing times by Aitken extrapolation
/// (exact when T+ - t_m is geometric). Returns NaN when it cannot be formed.
double extrapolate_blowup_time(const std::vector<double>& crossings);

/// |E(t2) + int_{t1}^{t2} ||T||^2 - E(t1)|, dissipation by the trapezoid rule
/// on the records. Times between records are linearly interpolated.
double energy_identity_residual(const TimeSeries& series, double t1, double t2);

struct LocalEnergyReport {
  double lhs = 0.0;    // int |grad u(t2)|^2 phi^2
  double base = 0.0;   // int |grad u(t1)|^2 phi^2
  double slack = 0.0;  // C E(u0) (t2 - t1) / R^2
  bool holds = false;
};

/// Cutoff equal to 1 on D(y, R), falling to 0 as cos((|x - y| - R) / R) on
/// the ramp of width pi R / 2, so |grad phi| <= 1 / R.
double cutoff(const Disc& d, const Point2& x);

/// int |grad u|^2 phi^2 for the cutoff above.
double weighted_gradient_sq(const SphereField& f, const Disc& d);

/// Checks the localized energy inequality between two snapshots of one run;
/// the constant is C = 1. Throws RangeError when the snapshots are missing.
LocalEnergyReport local_energy_inequality_check(
    const std::vector<Snapshot>& snapshots, double initial_energy,
    const Disc& d, double t1, double t2, double c = 1.0);

}  // namespace hmhf
