#include "hmhf/collision_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "hmhf/errors.hpp"

namespace hmhf {
namespace {

constexpr double kQuantum = 4.0 * std::numbers::pi;

bool resolves(const SphereField& u, const Disc& d, double min_cells) {
  if (const auto* c = std::get_if<CartesianField>(&u)) {
    return d.radius >= min_cells * c->grid.spacing() &&
           c->grid.inner_radius(d.center) >= d.radius;
  }
  const auto& rf = std::get<RadialField>(u);
  if (d.radius > rf.grid.r_max()) return false;
  const auto r = rf.grid.nodes();
  const auto inside = std::lower_bound(r.begin(), r.end(), d.radius) - r.begin();
  return static_cast<double>(inside) >= min_cells;
}

bool usable(const DeltaRecord& r) { return r.resolved && std::isfinite(r.d_total); }

// Everything except the "strictly in between" condition.
bool accept_pair(const DeltaSeries& s, std::size_t i, std::size_t j, const CollisionOptions& o,
                 CollisionInterval& out) {
  const auto& a = s.records[i];
  const auto& b = s.records[j];
  if (!(a.t < b.t)) return false;
  if (!(b.t - a.t <= o.epsilon * a.rho * a.rho)) return false;
  const int k = nearest_level(a.energy);
  if (!(std::abs(a.energy - kQuantum * k) <= o.quantization_tolerance)) return false;
  out.sigma = a.t;
  out.tau = b.t;
  out.sigma_index = i;
  out.tau_index = j;
  out.y = a.y;
  out.rho = a.rho;
  out.epsilon = o.epsilon;
  out.eta = o.eta;
  out.k_level = k;
  out.monotone = true;
  for (std::size_t n = i; n < j; ++n)
    if (s.records[n + 1].d_total < s.records[n].d_total) out.monotone = false;
  return true;
}

void check_thresholds(const CollisionOptions& o) {
  if (!(o.epsilon > 0.0 && o.epsilon < o.eta))
    throw ParameterError("collision thresholds need 0 < epsilon < eta");
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

const char* to_string(DeltaMode mode) {
  return mode == DeltaMode::blowup ? "blow-up" : "global";
}

DeltaSeries build_delta_series(const std::vector<Snapshot>& snapshots, const Point2& y,
                               DeltaMode mode, double t_plus, Gamma0 gamma0,
                               const DeltaOptions& opts) {
  if (snapshots.size() < 3) throw ParameterError("a delta series needs at least 3 snapshots");
  if (mode == DeltaMode::blowup && !std::isfinite(t_plus))
    throw ParameterError("blow-up mode needs a finite blow-up time estimate");
  DeltaSeries out;
  out.mode = mode;
  out.t_plus = mode == DeltaMode::blowup ? t_plus : 0.0;
  for (const auto& snap : snapshots) {
    const double span = mode == DeltaMode::blowup ? t_plus - snap.t : snap.t;
    DeltaRecord rec;
    rec.t = snap.t;
    rec.y = y;
    rec.rho = std::sqrt(std::max(span, 0.0));
    const Disc disc{y, rec.rho};
    rec.resolved = span > 0.0 && resolves(snap.field, disc, opts.min_cells);
    if (!rec.resolved) {
      rec.d_total = std::numeric_limits<double>::quiet_NaN();
      rec.lambda_max = std::numeric_limits<double>::quiet_NaN();
      rec.energy = std::numeric_limits<double>::quiet_NaN();
      out.records.push_back(rec);
      continue;
    }
    rec.energy = dirichlet_energy(snap.field, disc).value;
    try {
      const ExtractionSet seeds = extract_bubbles(snap.field, disc, opts.fit.extraction);
      const FitResult fit = fit_config(snap.field, disc, seeds, gamma0, opts.fit);
      rec.d_total = fit.report.total;
      rec.lambda_max = fit.lambda_max;
      rec.m = fit.config.size();
      if (opts.on_fit) opts.on_fit(rec, fit);
    } catch (const AdmissibilityError&) {
      rec.resolved = false;
      rec.d_total = std::numeric_limits<double>::quiet_NaN();
      rec.lambda_max = std::numeric_limits<double>::quiet_NaN();
    }
    out.records.push_back(rec);
  }
  return out;
}

std::vector<CollisionInterval> detect_collisions(const DeltaSeries& series,
                                                 const CollisionOptions& opts) {
  check_thresholds(opts);
  std::vector<CollisionInterval> found;
  // Index of the last record at or below epsilon, valid while every record
  // after it sits strictly between the thresholds.
  std::size_t low = 0;
  bool have_low = false;
  for (std::size_t n = 0; n < series.records.size(); ++n) {
    const auto& r = series.records[n];
    if (!usable(r)) {
      have_low = false;
      continue;
    }
    if (r.d_total <= opts.epsilon) {
      low = n;
      have_low = true;
    } else if (r.d_total >= opts.eta) {
      CollisionInterval c;
      if (have_low && accept_pair(series, low, n, opts, c)) found.push_back(c);
      have_low = false;
    }
  }
  return found;
}

std::vector<CollisionInterval> detect_collisions_brute_force(const DeltaSeries& series,
                                                             const CollisionOptions& opts) {
  check_thresholds(opts);
  std::vector<CollisionInterval> found;
  const auto& rs = series.records;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    for (std::size_t j = i + 1; j < rs.size(); ++j) {
      if (!usable(rs[i]) || !usable(rs[j])) continue;
      if (!(rs[i].d_total <= opts.epsilon && rs[j].d_total >= opts.eta)) continue;
      bool between = true;
      for (std::size_t k = i + 1; k < j; ++k)
        between = between && usable(rs[k]) && rs[k].d_total > opts.epsilon &&
                  rs[k].d_total < opts.eta;
      CollisionInterval c;
      if (between && accept_pair(series, i, j, opts, c)) found.push_back(c);
    }
  }
  return found;
}

DurationReport duration_law_check(const std::vector<CollisionInterval>& intervals,
                                  const DeltaSeries& series, double c0) {
  DurationReport rep;
  rep.c0 = c0;
  for (const auto& c : intervals) {
    if (c.sigma_index >= series.records.size())
      throw RangeError("collision interval does not belong to the series");
    DurationEntry e;
    e.duration = c.duration();
    e.lambda_max = series.records[c.sigma_index].lambda_max;
    e.ratio = e.lambda_max > 0.0 ? e.duration / (e.lambda_max * e.lambda_max)
                                 : std::numeric_limits<double>::infinity();
    e.below_floor = e.ratio < c0;
    if (e.below_floor) ++rep.flagged;
    rep.entries.push_back(e);
  }
  return rep;
}

int nearest_level(double energy) {
  return static_cast<int>(std::lround(std::max(0.0, energy) / kQuantum));
}

QuantizationReport quantization_check(const DeltaSeries& series, double tolerance,
                                      std::size_t bins) {
  if (bins == 0) throw ParameterError("histogram needs at least one bin");
  QuantizationReport rep;
  rep.tolerance = tolerance;
  rep.histogram.assign(bins, 0);
  for (const auto& r : series.records) {
    if (!std::isfinite(r.energy)) continue;
    QuantizationEntry e;
    e.t = r.t;
    e.k = nearest_level(r.energy);
    e.deviation = std::abs(r.energy - kQuantum * e.k) / kQuantum;
    e.within_tolerance = std::abs(r.energy - kQuantum * e.k) <= tolerance;
    const auto b = static_cast<std::size_t>(e.deviation / 0.5 * static_cast<double>(bins));
    ++rep.histogram[std::min(b, bins - 1)];
    rep.entries.push_back(e);
  }
  return rep;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ParameterError("spearman: samples differ in length");
  const std::size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double mean = 0.5 * static_cast<double>(n + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace hmhf
