#include "hmhf/flow_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "hmhf/errors.hpp"

namespace hmhf {
namespace {

constexpr double kPi = 3.14159265358979323846;

double sq(double x) { return x * x; }

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool is_radial(const SphereField& f) { return std::holds_alternative<RadialField>(f); }

// Largest step the explicit 2D scheme may take.
double explicit_bound(const SphereField& f) {
  const auto* c = std::get_if<CartesianField>(&f);
  if (c == nullptr) return std::numeric_limits<double>::infinity();
  return 0.25 * sq(c->grid.spacing());
}

double record_energy_concentration(const SphereField& f, const GradientPeak& peak,
                                   double radius) {
  if (const auto* rf = std::get_if<RadialField>(&f))
    return radial_disc_energy(*rf, std::hypot(peak.location.x, peak.location.y) + radius);
  return dirichlet_energy(f, Disc{peak.location, radius}).value;
}

// Linear interpolation of a record column at time t.
template <class Get>
double interpolate(const std::vector<TimeRecord>& r, double t, Get get) {
  auto it = std::lower_bound(r.begin(), r.end(), t,
                             [](const TimeRecord& a, double v) { return a.t < v; });
  if (it == r.end()) return get(r.back());
  if (it->t == t || it == r.begin()) return get(*it);
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double s = (t - a.t) / (b.t - a.t);
  return (1.0 - s) * get(a) + s * get(b);
}

const Snapshot& find_snapshot(const std::vector<Snapshot>& snaps, double t) {
  const Snapshot* best = nullptr;
  for (const auto& s : snaps)
    if (best == nullptr || std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
  if (best == nullptr || std::abs(best->t - t) > 1e-9 * std::max(1.0, std::abs(t))) {
    std::ostringstream msg;
    msg << "no snapshot at t = " << t;
    throw RangeError(msg.str());
  }
  return *best;
}

}  // namespace

const char* to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::reached_final_time: return "reached-final-time";
    case VerdictKind::blowup_detected: return "blow-up-detected";
    case VerdictKind::degenerate_step: return "degenerate-step";
  }
  return "unknown";
}

VerdictKind verdict_from_string(const std::string& s) {
  for (auto k : {VerdictKind::reached_final_time, VerdictKind::blowup_detected,
                 VerdictKind::degenerate_step})
    if (s == to_string(k)) return k;
  throw ParameterError("unknown verdict '" + s + "'");
}

FlowState step_equivariant(const FlowState& state, double dt) {
  const auto* rf = std::get_if<RadialField>(&state.field);
  if (rf == nullptr) throw ParameterError("step_equivariant needs a radial field");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive");

  const auto r = rf->grid.nodes();
  const std::size_t n = r.size();
  const double k2 = sq(rf->grid.degree());
  const auto& phi = rf->phi;

  // Unknowns are nodes 0 .. n-2; node n-1 is pinned.
  const std::size_t m = n - 1;
  std::vector<double> lower(m), diag(m), upper(m), rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double rm = i == 0 ? 0.0 : r[i - 1];
    const double hm = r[i] - rm;
    const double hp = r[i + 1] - r[i];
    const double wr = 0.5 * (hm + hp) * r[i];
    const double cm = 0.5 * (r[i] + rm) / hm / wr;
    const double cp = 0.5 * (r[i] + r[i + 1]) / hp / wr;
    const double a = k2 / sq(r[i]);
    lower[i] = -dt * cm;
    upper[i] = -dt * cp;
    diag[i] = 1.0 + dt * (a + cm + cp);
    rhs[i] = phi[i] + dt * a * (phi[i] - 0.5 * std::sin(2.0 * phi[i]));
  }
  rhs[0] -= lower[0] * rf->phi_origin;
  rhs[m - 1] -= upper[m - 1] * phi[n - 1];

  // Thomas algorithm; the matrix is strictly diagonally dominant.
  for (std::size_t i = 1; i < m; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> next(n);
  next[n - 1] = phi[n - 1];
  next[m - 1] = rhs[m - 1] / diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;)
    next[i] = (rhs[i] - upper[i] * next[i + 1]) / diag[i];

  if (!all_finite(next)) throw DegenerateStep("equivariant step produced non-finite values");

  return FlowState{state.t + dt, RadialField(rf->grid, std::move(next), rf->phi_origin), dt,
                   state.step_count + 1};
}

FlowState step_full2d(const FlowState& state, double dt) {
  const auto* c = std::get_if<CartesianField>(&state.field);
  if (c == nullptr) throw ParameterError("step_full2d needs a Cartesian field");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive");
  if (dt > explicit_bound(state.field) * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds the explicit bound h^2/4 = " << explicit_bound(state.field);
    throw ParameterError(msg.str());
  }
  const auto t = tension(*c);
  CartesianField next = *c;
  for (std::size_t n = 0; n < next.values.size(); ++n) {
    next.values[n] += dt * t[n];
    const Vec3& v = next.values[n];
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
      throw DegenerateStep("2D step produced non-finite values");
  }
  try {
    return FlowState{state.t + dt, renormalize(std::move(next)), dt, state.step_count + 1};
  } catch (const DegenerateField& e) {
    throw DegenerateStep(std::string("2D step: ") + e.what());
  }
}

double extrapolate_blowup_time(const std::vector<double>& crossings) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (crossings.size() < 3) return nan;
  const double t1 = crossings[crossings.size() - 3];
  const double t2 = crossings[crossings.size() - 2];
  const double t3 = crossings.back();
  const double d2 = t3 - t2;
  const double d1 = t2 - t1;
  const double denom = d2 - d1;
  // Only contracting gaps point at a finite limit.
  if (!(d1 > 0.0) || !(d2 > 0.0) || !(denom < -1e-9 * d1)) return nan;
  return t3 - d2 * d2 / denom;
}

FlowResult run_flow(const SphereField& initial, const FlowConfig& config,
                    const SnapshotSink& sink) {
  if (!(config.t_final > 0.0)) throw ParameterError("t_final must be positive");
  if (!(config.dt_max > 0.0)) throw ParameterError("dt_max must be positive");
  if (!(config.scale_factor > 0.0)) throw ParameterError("scale_factor must be positive");
  if (!(config.approach_ratio > 0.0 && config.approach_ratio < 1.0))
    throw ParameterError("approach_ratio must lie in (0, 1)");
  if (config.snapshot_interval < 0.0) throw ParameterError("snapshot_interval must be >= 0");
  if (config.record_stride == 0) throw ParameterError("record_stride must be >= 1");

  const bool radial = is_radial(initial);
  const double h_min = grid_spacing(initial);
  const double grad_threshold = config.gradient_factor / h_min;

  TimeSeries series;
  std::vector<Snapshot> snapshots;
  std::vector<double> crossings;
  BlowupVerdict verdict;
  auto emit = [&](const FlowState& s) {
    Snapshot snap{s.t, s.field};
    if (sink)
      sink(snap);
    else
      snapshots.push_back(std::move(snap));
  };

  FlowState state{0.0, initial, 0.0, 0};
  double energy = dirichlet_energy(initial);
  double tension_sq = tension_l2_sq(initial);
  GradientPeak peak = max_gradient(initial);
  double dissipation = 0.0;
  const double lambda_ref = peak.value > 0.0 ? 1.0 / peak.value : 0.0;

  auto make_record = [&](double dt) {
    TimeRecord rec;
    rec.t = state.t;
    rec.energy = energy;
    rec.tension_l2_sq = tension_sq;
    rec.dissipation_cum = dissipation;
    rec.grad_max = peak.value;
    rec.lambda_min_est = peak.value > 0.0 ? 1.0 / peak.value
                                          : std::numeric_limits<double>::infinity();
    rec.dt = dt;
    return rec;
  };
  series.records.push_back(make_record(0.0));
  emit(state);

  double next_regular = config.snapshot_interval > 0.0 ? config.snapshot_interval
                                                       : std::numeric_limits<double>::infinity();
  double next_gap = std::numeric_limits<double>::infinity();
  int next_level = 1;
  int persist = 0;
  bool last_recorded = true;
  double dt_used = 0.0;
  verdict.kind = VerdictKind::reached_final_time;

  const double t_eps = 1e-14 * config.t_final;
  while (state.t < config.t_final - t_eps) {
    if (state.step_count >= config.max_steps) {
      verdict.kind = VerdictKind::degenerate_step;
      verdict.message = "step budget exhausted";
      break;
    }
    double dt = std::min(config.dt_max, config.t_final - state.t);
    if (peak.value > 0.0) dt = std::min(dt, config.scale_factor / sq(peak.value));
    if (!radial) dt = std::min(dt, config.explicit_factor * explicit_bound(state.field));

    std::optional<FlowState> next;
    double next_energy = 0.0;
    bool accepted = false;
    std::string failure;
    while (dt >= config.dt_min) {
      try {
        next = radial ? step_equivariant(state, dt) : step_full2d(state, dt);
        next_energy = dirichlet_energy(next->field);
        if (next_energy <= energy + 1e-10 * std::max(energy, 1.0)) {
          accepted = true;
          break;
        }
        failure = "energy increased";
      } catch (const DegenerateStep& e) {
        failure = e.what();
      }
      dt *= 0.5;
    }
    if (!accepted) {
      verdict.kind = VerdictKind::degenerate_step;
      verdict.message = "dt fell below " + std::to_string(config.dt_min) + ": " + failure;
      break;
    }

    const double old_tension = tension_sq;
    const double old_lambda = peak.value > 0.0 ? 1.0 / peak.value : 0.0;
    state = std::move(*next);
    energy = next_energy;
    tension_sq = tension_l2_sq(state.field);
    peak = max_gradient(state.field);
    dissipation += 0.5 * (old_tension + tension_sq) * dt;
    dt_used = dt;

    last_recorded = state.step_count % config.record_stride == 0;
    if (last_recorded) series.records.push_back(make_record(dt));

    // Dyadic crossings of the resolved scale, placed by interpolation in log lambda.
    const double lambda = peak.value > 0.0 ? 1.0 / peak.value : 0.0;
    while (lambda_ref > 0.0 && lambda > 0.0 &&
           lambda < lambda_ref * std::ldexp(1.0, -next_level)) {
      const double target = std::log(lambda_ref) - next_level * std::log(2.0);
      const double l0 = std::log(old_lambda);
      const double l1 = std::log(lambda);
      const double s = l0 > l1 ? std::clamp((l0 - target) / (l0 - l1), 0.0, 1.0) : 1.0;
      crossings.push_back(state.t - dt + s * dt);
      ++next_level;
    }

    // Snapshots: regular cadence, then geometric in T - t once T is visible.
    bool snap = false;
    if (state.t >= next_regular - t_eps) {
      snap = true;
      while (next_regular <= state.t + t_eps) next_regular += config.snapshot_interval;
    }
    const double t_hat = extrapolate_blowup_time(crossings);
    if (std::isfinite(t_hat) && t_hat > state.t) {
      const double gap = t_hat - state.t;
      if (!std::isfinite(next_gap)) {
        snap = true;
        next_gap = gap * config.approach_ratio;
      } else if (gap <= next_gap) {
        snap = true;
        while (next_gap >= gap) next_gap *= config.approach_ratio;
      }
    }

    // Blow-up: persistent unresolved gradient plus concentrated energy.
    persist = peak.value > grad_threshold ? persist + 1 : 0;
    if (persist >= config.persist) {
      const double conc = record_energy_concentration(
          state.field, peak, config.radius_factor / peak.value);
      if (conc >= config.concentration_energy) {
        verdict.kind = VerdictKind::blowup_detected;
        verdict.point = radial ? Point2{0.0, 0.0} : peak.location;
        std::ostringstream msg;
        msg << "max|grad u| = " << peak.value << " > " << grad_threshold << " for "
            << persist << " steps; energy " << conc << " within radius "
            << config.radius_factor / peak.value;
        verdict.message = msg.str();
        break;
      }
    }
    if (snap && state.t < config.t_final - t_eps) emit(state);
  }

  if (!last_recorded) series.records.push_back(make_record(dt_used));
  emit(state);

  switch (verdict.kind) {
    case VerdictKind::blowup_detected: {
      const double t_hat = extrapolate_blowup_time(crossings);
      verdict.t_plus = std::isfinite(t_hat) && t_hat >= state.t ? t_hat : state.t;
      break;
    }
    case VerdictKind::reached_final_time:
      verdict.t_plus = state.t;
      verdict.point = peak.location;
      break;
    case VerdictKind::degenerate_step:
      verdict.t_plus = state.t;
      verdict.point = peak.location;
      break;
  }
  return FlowResult{std::move(series), std::move(snapshots), std::move(verdict),
                    std::move(state), std::move(crossings)};
}

double energy_identity_residual(const TimeSeries& series, double t1, double t2) {
  const auto& r = series.records;
  if (r.empty()) throw RangeError("empty time series");
  if (t1 > t2) throw RangeError("t1 must not exceed t2");
  if (t1 < r.front().t || t2 > r.back().t) {
    std::ostringstream msg;
    msg << "[" << t1 << ", " << t2 << "] lies outside the series [" << r.front().t << ", "
        << r.back().t << "]";
    throw RangeError(msg.str());
  }
  if (t1 == t2) return 0.0;
  const auto e = [](const TimeRecord& x) { return x.energy; };
  const auto d = [](const TimeRecord& x) { return x.dissipation_cum; };
  return std::abs(interpolate(r, t2, e) + (interpolate(r, t2, d) - interpolate(r, t1, d)) -
                  interpolate(r, t1, e));
}

double cutoff(const Disc& d, const Point2& x) {
  const double s = distance(x, d.center) - d.radius;
  if (s <= 0.0) return 1.0;
  if (s >= 0.5 * kPi * d.radius) return 0.0;
  return std::cos(s / d.radius);
}

double weighted_gradient_sq(const SphereField& f, const Disc& d) {
  if (!(d.radius > 0.0)) throw ParameterError("cutoff radius must be positive");
  if (const auto* c = std::get_if<CartesianField>(&f)) {
    const auto e = cell_energies(c->grid, c->values);
    const std::size_t nx = c->grid.nx();
    double s = 0.0;
    for (std::size_t n = 0; n < e.size(); ++n) {
      if (e[n] == 0.0) continue;
      s += 2.0 * e[n] * sq(cutoff(d, c->grid.cell_center(n % nx, n / nx)));
    }
    return s;
  }
  // Equivariant energy density is rotation invariant, so each segment is
  // weighted by the angular mean of phi^2 on its mid circle.
  const auto& rf = std::get<RadialField>(f);
  const auto e = segment_energies(rf);
  const auto r = rf.grid.nodes();
  constexpr int kAngles = 64;
  double s = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double rm = 0.5 * (prev + r[i]);
    prev = r[i];
    double w = 0.0;
    for (int a = 0; a < kAngles; ++a) {
      const double th = 2.0 * kPi * (a + 0.5) / kAngles;
      w += sq(cutoff(d, {rm * std::cos(th), rm * std::sin(th)}));
    }
    s += 2.0 * e[i] * w / kAngles;
  }
  return s;
}

LocalEnergyReport local_energy_inequality_check(const std::vector<Snapshot>& snapshots,
                                                double initial_energy, const Disc& d,
                                                double t1, double t2, double c) {
  if (t1 > t2) throw RangeError("t1 must not exceed t2");
  const Snapshot& s1 = find_snapshot(snapshots, t1);
  const Snapshot& s2 = find_snapshot(snapshots, t2);
  LocalEnergyReport rep;
  rep.base = weighted_gradient_sq(s1.field, d);
  rep.lhs = weighted_gradient_sq(s2.field, d);
  rep.slack = c * initial_energy * (s2.t - s1.t) / sq(d.radius);
  rep.holds = rep.lhs <= rep.base + rep.slack;
  return rep;
}

}  // namespace hmhf
