// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   hmhf_acceptance [name ...]   runs only the named criteria

#include <Eigen/Geometry>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hmhf/bubble_fit.hpp"
#include "hmhf/bubble_library.hpp"
#include "hmhf/collision_analysis.hpp"
#include "hmhf/flow_solver.hpp"

using namespace hmhf;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double order(double coarse, double fine) { return std::log2(std::abs(coarse / fine)); }

Eigen::Matrix3d random_rotation(std::mt19937_64& g) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(g), n(g), n(g), n(g));
  q.normalize();
  return q.toRotationMatrix();
}

// Radial FD energy of 2 atan(r^k) over [0, 2000] for k = 1, 2, 3 (the tail
// beyond is below 1e-6 relative), plus the Cartesian FD energy of every
// library bubble on D(a, 4) against adaptive quadrature.
Outcome energy_quantization() {
  const double hs[] = {0.04, 0.02, 0.01, 0.005};
  const std::size_t ref = 2;  // h = 0.01
  bool pass = true;
  std::ostringstream out;
  for (int k = 1; k <= 3; ++k) {
    // Discretisation error is measured against the exact energy on D(0, r_max).
    const double r_max = 2000.0;
    const double rk = std::pow(r_max, 2 * k);
    const double on_disc = 4.0 * kPi * k * rk / (1.0 + rk);
    double err[4], quant = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto g = RadialGrid::uniform(k, hs[i], r_max);
      const SphereField f =
          sample_radial(g, [k](double r) { return 2.0 * std::atan(std::pow(r, k)); }, 0.0);
      const double e = dirichlet_energy(f);
      err[i] = std::abs(e - on_disc) / on_disc;
      if (i == ref) quant = std::abs(e - 4.0 * kPi * k) / (4.0 * kPi * k);
    }
    const double p = std::min({order(err[0], err[1]), order(err[1], err[2]), order(err[2], err[3])});
    pass = pass && quant <= 1e-3 && p >= 1.8;
    out << fmt("k=%d |E/4pik - 1| %.2e order %.2f; ", k, quant, p);
  }
  double worst_order = 1e9, worst_rel = 0.0;
  for (const auto& e : standard_library()) {
    const Point2 a = e.bubble.center();
    const Disc disc{a, 4.0};
    const double exact = bubble_disc_energy(e.bubble.map(), disc);
    double err[4];
    const double cart_h[] = {0.08, 0.04, 0.02, 0.01};
    for (std::size_t i = 0; i < 4; ++i) {
      const auto grid = Grid2D::centered(a, 4.5, cart_h[i]);
      const SphereField u = sample_field(grid, [&](const Point2& x) { return e.bubble(x); });
      err[i] = std::abs(dirichlet_energy(u, disc).value - exact) / exact;
    }
    worst_rel = std::max(worst_rel, err[ref]);
    worst_order = std::min({worst_order, order(err[0], err[1]), order(err[1], err[2]),
                            order(err[2], err[3])});
  }
  pass = pass && worst_rel <= 1e-3 && worst_order >= 1.8;
  out << fmt("library discs rel %.2e order %.2f", worst_rel, worst_order);
  return {pass, out.str()};
}

Outcome closed_form_disc_energy() {
  const BubbleMap b = make_equivariant_bubble(1, 1.0, {0.0, 0.0});
  const auto rg = RadialGrid::uniform(1, 0.01, 20.0);
  const SphereField radial = sample_radial(rg, [](double r) { return 2.0 * std::atan(r); }, 0.0);
  bool pass = true;
  std::ostringstream out;
  for (double R : {1.0, 2.0, 10.0}) {
    const double oracle = 4.0 * kPi * R * R / (1.0 + R * R);
    const SphereField cart =
        sample_field(Grid2D::centered({0.0, 0.0}, R + 0.5, 0.02), [&](const Point2& x) { return b(x); });
    const double ec = std::abs(dirichlet_energy(cart, {{0.0, 0.0}, R}).value / oracle - 1.0);
    const double er = std::abs(dirichlet_energy(radial, {{0.0, 0.0}, R}).value / oracle - 1.0);
    pass = pass && ec <= 1e-3 && er <= 1e-3;
    out << fmt("R=%g cartesian %.1e radial %.1e; ", R, ec, er);
  }
  return {pass, out.str()};
}

Outcome scale_center_covariance() {
  const auto lib = standard_library();
  const Gamma0 gamma0{};
  double worst_scale = 0.0, worst_center = 0.0;
  for (const char* name : {"canonical_k1", "rotated_k2"}) {
    const auto& base = std::find_if(lib.begin(), lib.end(), [&](const auto& e) { return e.name == name; })->bubble;
    const ScaleResult ref = locate(BubbleEnergyMeasure(base.map()), gamma0);
    const double lambda = ref.scale;
    const Point2 center = ref.center;
    for (double mu : {0.1, 10.0}) {
      for (double angle : {0.0, 2.0}) {
        const Point2 shift{5.0 * std::cos(angle), 5.0 * std::sin(angle)};
        const ScaleResult r =
            locate(BubbleEnergyMeasure(translate_rescale(base.map(), shift, mu)), gamma0);
        worst_scale = std::max(worst_scale, std::abs(r.scale / (mu * lambda) - 1.0));
        const Point2 expected = mu * center + shift;
        worst_center = std::max(worst_center, distance(r.center, expected) / (2.0 * lambda * mu));
      }
    }
  }
  return {worst_scale <= 1e-4 && worst_center <= 1.0,
          fmt("max |lambda'/(mu lambda) - 1| = %.2e, max center offset / (2 lambda mu) = %.2e",
              worst_scale, worst_center)};
}

Outcome exterior_decay() {
  const Gamma0 gamma0{0.01};
  double worst = 0.0;
  for (const auto& e : standard_library(gamma0))
    for (double R : {2.0, 4.0, 8.0})
      worst = std::max(worst, exterior_energy(e.bubble, R, gamma0) / (kPi / (R * R)));
  return {worst <= 1.0, fmt("max exterior energy / (pi R^-2) = %.3f", worst)};
}

Outcome additivity() {
  double dev[3];
  const double ratios[] = {10.0, 100.0, 1000.0};
  for (int i = 0; i < 3; ++i) {
    BubbleConfig c;
    c.bubbles.emplace_back(equivariant_shape(1, 1.0, {false, false}));
    c.bubbles.emplace_back(equivariant_shape(1, ratios[i], {true, true}));
    c.omega = c.bubbles[1].at_infinity();
    const double e = config_energy(c, {{0.0, 0.0}, 1e4 * ratios[i]});
    dev[i] = std::abs(e - 8.0 * kPi) / (8.0 * kPi);
  }
  return {dev[2] <= 0.02 && dev[0] > dev[1] && dev[1] > dev[2],
          fmt("deviation %.3e, %.3e, %.3e at ratios 10, 1e2, 1e3", dev[0], dev[1], dev[2])};
}

Outcome energy_identity() {
  double resid[2], rel[2];
  for (int lev = 0; lev < 2; ++lev) {
    const double h = 0.02 / (1 << lev);
    const auto g = RadialGrid::uniform(1, h, 2.0);
    const SphereField f = sample_radial(
        g, [](double r) { return 2.0 * std::atan(r) + 0.4 * std::sin(kPi * r / 2.0) * r / 2.0; }, 0.0);
    FlowConfig c;
    c.t_final = 0.2;
    c.dt_max = 1e-3 / (1 << (2 * lev));
    const FlowResult res = run_flow(f, c);
    const auto& recs = res.series.records;
    const double drop = recs.front().energy - recs.back().energy;
    resid[lev] = energy_identity_residual(res.series, 0.0, recs.back().t);
    rel[lev] = resid[lev] / drop;
  }
  return {rel[0] <= 0.01 && rel[1] <= 0.01 && resid[0] / resid[1] >= 3.0,
          fmt("residual/drop %.2e -> %.2e, reduction x%.2f under h/2, dt/4", rel[0], rel[1],
              resid[0] / resid[1])};
}

Outcome stationarity() {
  double constant[2];
  const double hs[] = {0.02, 0.01};
  for (int i = 0; i < 2; ++i) {
    const auto g = RadialGrid::uniform(1, hs[i], 5.0);
    const RadialField f = sample_radial(g, [](double r) { return 2.0 * std::atan(r); }, 0.0);
    FlowConfig c;
    c.t_final = 0.1;
    c.dt_max = 1e-3;
    const FlowResult res = run_flow(f, c);
    const auto& end = std::get<RadialField>(res.final_state.field);
    double drift = 0.0;
    for (std::size_t j = 0; j < f.phi.size(); ++j)
      drift = std::max(drift, std::abs(end.phi[j] - f.phi[j]));
    constant[i] = drift / (hs[i] * hs[i]);
  }
  const double spread = std::abs(constant[1] / constant[0] - 1.0);
  return {spread <= 0.25, fmt("drift / h^2 = %.4f at h=0.02, %.4f at h=0.01", constant[0], constant[1])};
}

Outcome blowup_scenario() {
  const auto g = RadialGrid::graded(1, 1e-4, 0.01, 1.0, 1.02);
  const RadialField f = sample_radial(g, [](double r) { return (kPi + 0.5) * r; }, 0.0);
  FlowConfig c;
  c.t_final = 1.0;
  c.dt_max = 1e-4;
  c.snapshot_interval = 0.01;
  c.record_stride = 100;
  const FlowResult res = run_flow(f, c);
  if (res.verdict.kind != VerdictKind::blowup_detected)
    return {false, std::string("verdict ") + to_string(res.verdict.kind)};
  const double e0 = dirichlet_energy(SphereField{f});
  const CollisionOptions tol;
  const DeltaSeries s = build_delta_series(res.snapshots, {0.0, 0.0}, DeltaMode::blowup,
                                           res.verdict.t_plus, Gamma0::for_flow(e0));
  double closest = std::numeric_limits<double>::infinity();
  for (const auto& r : s.records)
    if (r.resolved) closest = std::min(closest, s.t_plus - r.t);
  std::vector<double> t, d, ratio, dev;
  for (const auto& r : s.records) {
    if (!r.resolved || s.t_plus - r.t > 10.0 * closest) continue;
    t.push_back(r.t);
    d.push_back(r.d_total);
    ratio.push_back(r.lambda_max / r.rho);
    dev.push_back(std::abs(r.energy - 4.0 * kPi * nearest_level(r.energy)));
  }
  if (t.size() < 10) return {false, fmt("only %zu records in the final decade", t.size())};
  const double rd = spearman(t, d), rl = spearman(t, ratio), re = spearman(t, dev);
  const double last = dev.back();
  const int k = nearest_level(s.records.back().energy);
  const bool pass = rd < 0.0 && rl < 0.0 && re < 0.0 && last <= tol.quantization_tolerance && k >= 1;
  return {pass, fmt("T+ %.4f, %zu records over T+-t in [%.3g, %.3g]: rank corr d %.3f, "
                    "lambda_max/rho %.3f, |E-4piK| %.3f; final |E-4piK|/4pi %.4f (K=%d)",
                    s.t_plus, t.size(), closest, 10.0 * closest, rd, rl, re, last / (4.0 * kPi), k)};
}

DeltaSeries random_series(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> len(1, 200);
  DeltaSeries s;
  s.mode = u(g) < 0.5 ? DeltaMode::blowup : DeltaMode::global;
  const std::size_t n = len(g);
  double t = u(g);
  for (std::size_t i = 0; i < n; ++i) {
    DeltaRecord r;
    t += 1e-3 + 0.05 * u(g);
    r.t = t;
    r.rho = 0.5 + 3.0 * u(g);
    // Mostly threshold-heavy values so that crossings are common.
    const double pick = u(g);
    r.d_total = pick < 0.3 ? 0.05 * u(g) : pick < 0.6 ? 0.3 + u(g) : pick < 0.95 ? u(g) * 0.4 : 0.05;
    if (pick > 0.98) r.d_total = 0.3;
    r.m = static_cast<std::size_t>(u(g) * 3.0);
    r.lambda_max = 0.1 * u(g);
    const int k = static_cast<int>(u(g) * 3.0);
    r.energy = 4.0 * kPi * (k + (u(g) - 0.5) * 0.6);
    r.resolved = u(g) > 0.05;
    if (!r.resolved) r.d_total = r.lambda_max = r.energy = std::numeric_limits<double>::quiet_NaN();
    s.records.push_back(r);
  }
  return s;
}

bool same(const std::vector<CollisionInterval>& a, const std::vector<CollisionInterval>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].sigma_index != b[i].sigma_index || a[i].tau_index != b[i].tau_index ||
        a[i].sigma != b[i].sigma || a[i].tau != b[i].tau || a[i].k_level != b[i].k_level ||
        a[i].monotone != b[i].monotone || a[i].rho != b[i].rho)
      return false;
  return true;
}

Outcome detector_agreement() {
  std::mt19937_64 g(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int agree = 0;
  std::size_t intervals = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const DeltaSeries s = random_series(g);
    CollisionOptions opts;
    // Large eps * rho^2 windows in half the trials so the duration bound
    // does not prune everything.
    opts.epsilon = u(g) < 0.5 ? 0.05 : 0.2;
    opts.eta = opts.epsilon + 0.1 + 0.4 * u(g);
    const auto fast = detect_collisions(s, opts);
    const auto slow = detect_collisions_brute_force(s, opts);
    intervals += slow.size();
    agree += same(fast, slow);
  }
  return {agree == 100, fmt("%d/100 series agree, %zu intervals in total", agree, intervals)};
}

Outcome planted_recovery() {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int single = 0;
  for (int trial = 0; trial < 100; ++trial) {
    BubbleShape s;
    s.scale = 0.2 + 0.4 * u(g);
    s.center = {u(g) - 0.5, u(g) - 0.5};
    s.rotation = random_rotation(g);
    s.reflected = u(g) < 0.5;
    const BubbleMap b(s);
    const SphereField field =
        sample_field(Grid2D::centered({0.0, 0.0}, 3.0, 0.05), [&](const Point2& x) { return b(x); });
    const Disc d{{0.0, 0.0}, 2.5};
    const FitResult fit = fit_config(field, d, extract_bubbles(field, d), Gamma0{});
    if (fit.config.size() != 1) continue;
    const BubbleShape& got = *fit.config.bubbles[0].shape();
    if (distance(got.center, s.center) <= 0.05 * s.scale && std::abs(got.scale / s.scale - 1.0) <= 0.05)
      ++single;
  }
  int towers = 0;
  double min_quotient = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    const double l1 = 1e-3 * (1.0 + 4.0 * u(g));
    const double l2 = l1 * (100.0 + 400.0 * u(g));
    const double sign = u(g) < 0.5 ? 1.0 : -1.0;
    min_quotient = std::min(min_quotient, separation_quotient({}, l1, {}, l2));
    const auto grid = RadialGrid::graded(1, l1 / 30.0, 3.0 * l1, std::max(5.0, 20.0 * l2), 1.02);
    const SphereField field = sample_radial(
        grid, [&](double r) { return 2.0 * std::atan(r / l1) + sign * 2.0 * std::atan(r / l2); }, 0.0);
    const Disc d{{0.0, 0.0}, std::max(2.5, 10.0 * l2)};
    const FitResult fit = fit_config(field, d, extract_bubbles(field, d), Gamma0{});
    towers += fit.config.size() == 2;
  }
  return {single >= 95 && towers >= 95,
          fmt("single bubble %d/100, two bubbles %d/100 (separation quotient >= %.0f)", single,
              towers, min_quotient)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"energy-quantization", energy_quantization},
      {"closed-form-disc-energy", closed_form_disc_energy},
      {"scale-center-covariance", scale_center_covariance},
      {"exterior-decay", exterior_decay},
      {"multi-bubble-additivity", additivity},
      {"energy-identity", energy_identity},
      {"stationarity", stationarity},
      {"blow-up-scenario", blowup_scenario},
      {"detector-agreement", detector_agreement},
      {"planted-recovery", planted_recovery},
  };
  std::vector<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
