#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <boost/math/tools/minima.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "fit_internal.hpp"
#include "hmhf/bubble_fit.hpp"
#include "hmhf/errors.hpp"

namespace hmhf {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// One fitted bubble before it becomes a BubbleMap.
struct Seed {
  BubbleShape shape;
};

BubbleConfig build(const std::vector<Seed>& seeds, Gamma0 gamma0) {
  BubbleConfig c;
  for (const auto& s : seeds) c.bubbles.emplace_back(s.shape, gamma0);
  return c;
}

Vec3 sphere_chart(Complex w) {
  const double n = std::norm(w);
  if (!std::isfinite(n)) return {0.0, 0.0, 1.0};
  return {2.0 * w.real() / (n + 1.0), 2.0 * w.imag() / (n + 1.0), (n - 1.0) / (n + 1.0)};
}

Eigen::Vector3d to_eigen(const Vec3& v) { return {v.x, v.y, v.z}; }

// ---------------------------------------------------------------------------
// Nelder-Mead through GSL.

struct NmResult {
  std::vector<double> x;
  double value = kInf;
  bool converged = false;
};

template <class F>
NmResult nelder_mead(F& f, std::vector<double> x0, double step, double tol,
                     std::size_t max_iter) {
  const std::size_t n = x0.size();
  struct Ctx {
    F* f;
    std::size_t n;
  } ctx{&f, n};
  gsl_multimin_function fn;
  fn.n = n;
  fn.params = &ctx;
  fn.f = [](const gsl_vector* v, void* p) -> double {
    auto* c = static_cast<Ctx*>(p);
    std::vector<double> x(c->n);
    for (std::size_t i = 0; i < c->n; ++i) x[i] = gsl_vector_get(v, i);
    const double y = (*c->f)(x);
    return std::isfinite(y) ? y : 1e300;
  };
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> ss(gsl_vector_alloc(n), gsl_vector_free);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x.get(), i, x0[i]);
  gsl_vector_set_all(ss.get(), step);
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n),
      gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), ss.get());
  NmResult out;
  for (std::size_t it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), tol) == GSL_SUCCESS) {
      out.converged = true;
      break;
    }
  }
  out.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.x[i] = gsl_vector_get(s->x, i);
  out.value = s->fval;
  return out;
}

// ---------------------------------------------------------------------------
// Equivariant fits: orientation by enumeration, scales by Brent in log lambda.

bool fit_radial(const SphereField& u, const Disc& d, const ExtractionSet& seeds, Gamma0 gamma0,
                const FitOptions& opts, std::vector<Seed>& out) {
  const auto& rf = std::get<RadialField>(u);
  const int k = rf.grid.degree();
  const double eps0 = opts.extraction.epsilon0;
  std::vector<double> scales;
  for (const auto& e : seeds.entries) {
    if (std::lround(e.energy / (4.0 * kPi * k)) < 1) continue;
    scales.push_back(e.scale * std::pow((4.0 * kPi * k - eps0) / eps0, 1.0 / (2.0 * k)));
  }
  const std::size_t m = scales.size();
  out.clear();
  if (m == 0) return true;

  auto seeds_for = [&](const std::vector<double>& lambda, std::size_t code) {
    std::vector<Seed> s(m);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t bits = (code >> (2 * j)) & 3u;
      s[j].shape = equivariant_shape(k, lambda[j], {(bits & 1u) != 0, (bits & 2u) != 0});
    }
    return s;
  };
  auto objective = [&](const std::vector<Seed>& s) {
    return detail::mismatch_energy(u, build(s, gamma0), d);
  };

  std::size_t best_code = 0;
  double best = kInf;
  const std::size_t combos = std::size_t{1} << (2 * std::min<std::size_t>(m, 5));
  for (std::size_t code = 0; code < combos; ++code) {
    const double v = objective(seeds_for(scales, code));
    if (v < best) {
      best = v;
      best_code = code;
    }
  }
  std::vector<double> lambda = scales;
  for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
    for (std::size_t j = 0; j < m; ++j) {
      const double l0 = std::log(lambda[j]);
      auto f = [&](double s) {
        auto trial = lambda;
        trial[j] = std::exp(s);
        return objective(seeds_for(trial, best_code));
      };
      boost::uintmax_t iters = 200;
      const auto r = boost::math::tools::brent_find_minima(f, l0 - std::log(16.0),
                                                           l0 + std::log(16.0), 40, iters);
      if (r.second <= best) {
        best = r.second;
        lambda[j] = std::exp(r.first);
      }
    }
  }
  out = seeds_for(lambda, best_code);
  return true;
}

// ---------------------------------------------------------------------------
// Cartesian fits: orientation by a Kabsch fit on the core, then Nelder-Mead in
// (center, log scale, rotation) one bubble at a time.

Seed initial_cartesian(const detail::Samples& samples, const Concentration& e, int k,
                       double lambda) {
  Seed best;
  best.shape.degree = k;
  best.shape.scale = lambda;
  best.shape.center = e.center;
  double best_res = kInf;
  for (bool reflected : {false, true}) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    std::size_t used = 0;
    std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> pairs;
    for (std::size_t n = 0; n < samples.points.size(); ++n) {
      const Point2& p = samples.points[n];
      if (distance(p, e.center) > 2.0 * lambda) continue;
      const Complex w = std::pow(Complex{p.x - e.center.x, p.y - e.center.y} / lambda, k);
      const Eigen::Vector3d s = to_eigen(sphere_chart(w));
      Eigen::Vector3d t = to_eigen(samples.values[n]);
      if (reflected) t.y() = -t.y();
      h += s * t.transpose();
      pairs.emplace_back(s, t);
      ++used;
    }
    Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
    if (used >= 3) {
      Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::Matrix3d corr = Eigen::Matrix3d::Identity();
      corr(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
      rot = svd.matrixV() * corr * svd.matrixU().transpose();
    }
    double res = 0.0;
    for (const auto& [s, t] : pairs) res += (rot * s - t).squaredNorm();
    if (res < best_res) {
      best_res = res;
      best.shape.rotation = rot;
      best.shape.reflected = reflected;
    }
  }
  return best;
}

bool fit_cartesian(const SphereField& u, const Disc& d, const ExtractionSet& seeds,
                   Gamma0 gamma0, const FitOptions& opts, std::vector<Seed>& out) {
  const detail::Samples samples = detail::field_samples(u);
  const double eps0 = opts.extraction.epsilon0;
  out.clear();
  for (const auto& e : seeds.entries) {
    const long k = std::min<long>(std::lround(e.energy / (4.0 * kPi)), opts.max_degree);
    if (k < 1) continue;
    const double lambda =
        e.scale * std::pow((4.0 * kPi * k - eps0) / eps0, 1.0 / (2.0 * k));
    out.push_back(initial_cartesian(samples, e, static_cast<int>(k), lambda));
  }
  if (out.empty()) return true;

  bool converged = true;
  double current = detail::mismatch_energy(u, build(out, gamma0), d);
  for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
    const double start = current;
    for (std::size_t j = 0; j < out.size(); ++j) {
      const BubbleShape base = out[j].shape;
      const double l0 = base.scale;
      auto shape_at = [&](const std::vector<double>& x) {
        BubbleShape s = base;
        s.center = {base.center.x + x[0] * l0, base.center.y + x[1] * l0};
        s.scale = l0 * std::exp(x[2]);
        const Eigen::Vector3d delta(x[3], x[4], x[5]);
        const double angle = delta.norm();
        if (angle > 0.0)
          s.rotation = base.rotation * Eigen::AngleAxisd(angle, delta / angle).toRotationMatrix();
        return s;
      };
      auto f = [&](const std::vector<double>& x) {
        BubbleShape s = shape_at(x);
        if (distance(s.center, d.center) > d.radius || s.scale > 10.0 * d.radius) return 1e300;
        std::vector<Seed> trial = out;
        trial[j].shape = s;
        return detail::mismatch_energy(u, build(trial, gamma0), d);
      };
      const NmResult r = nelder_mead(f, std::vector<double>(6, 0.0), 0.1,
                                     opts.simplex_tolerance, opts.max_evaluations);
      if (r.value <= current) {
        out[j].shape = shape_at(r.x);
        current = r.value;
      }
      converged = converged && r.converged;
    }
    if (start - current <= 1e-10 * std::max(1.0, start)) break;
  }
  return converged;
}

// ---------------------------------------------------------------------------
// Dyadic radii.

struct RadiiChoice {
  BubbleConfig config;
  AdmissibleRadii radii;
  double total = kInf;
};

std::optional<RadiiChoice> search_radii(const SphereField& u, BubbleConfig config,
                                        const Disc& d, Gamma0 gamma0,
                                        const detail::Samples& samples) {
  const std::size_t m = config.size();
  const double rho = d.radius;
  std::vector<double> lambda(m);
  std::vector<Point2> a(m);
  for (std::size_t j = 0; j < m; ++j) {
    const ScaleResult s = bubble_scale(config.bubbles[j], gamma0);
    lambda[j] = s.scale;
    a[j] = s.center;
  }
  const double mismatch = m == 0 ? 0.0 : detail::mismatch_energy(u, config, d);

  const std::size_t ns = samples.points.size();
  std::vector<double> dist_y(ns);
  for (std::size_t n = 0; n < ns; ++n) dist_y[n] = distance(samples.points[n], d.center);
  // Per bubble: distances and |u - omega_j| on samples inside D(y, rho).
  std::vector<std::vector<std::size_t>> near(m);
  std::vector<std::vector<double>> gap(m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t n = 0; n < ns; ++n)
      if (dist_y[n] < rho) {
        near[j].push_back(n);
        gap[j].push_back(norm(samples.values[n] - config.bubbles[j](samples.points[n])));
      }

  std::optional<RadiiChoice> best;
  for (int mn = 0; mn <= 10; ++mn) {
    const double nu = rho * std::ldexp(1.0, mn);
    if (!detail::contains_disc(u, {d.center, nu})) break;
    for (int mx = 0; mx <= 10; ++mx) {
      const double xi = rho * std::ldexp(1.0, -mx);
      bool ok = true;
      for (std::size_t j = 0; j < m; ++j) ok = ok && distance(a[j], d.center) < xi;
      if (!ok) break;

      Vec3 mean{};
      for (std::size_t n = 0; n < ns; ++n)
        if (dist_y[n] >= xi && dist_y[n] < nu) mean += samples.weights[n] * samples.values[n];
      if (samples.radial) mean.x = mean.y = 0.0;
      Vec3 omega = norm(mean) > 1e-300 ? (1.0 / norm(mean)) * mean : Vec3{0.0, 0.0, 1.0};
      double neck_sup = 0.0;
      for (std::size_t n = 0; n < ns; ++n)
        if (dist_y[n] >= xi && dist_y[n] < nu)
          neck_sup = std::max(neck_sup, norm(samples.values[n] - omega));
      const double neck_energy = std::max(0.0, annulus_energy(u, d.center, xi, nu));
      double total = mismatch + neck_sup + neck_energy + xi / rho + rho / nu;

      AdmissibleRadii radii{nu, xi, std::vector<double>(m), std::vector<double>(m)};
      for (std::size_t j = 0; j < m; ++j) {
        const double cap = xi - distance(a[j], d.center);
        double best_j = kInf;
        for (int p = 0; p <= 10; ++p) {
          const double nu_j = cap * std::ldexp(1.0, -p);
          for (int q = 1; q <= 8; ++q) {
            const double xi_j = lambda[j] * std::ldexp(1.0, -q);
            double v = lambda[j] / cap + lambda[j] / nu_j + xi_j / lambda[j];
            std::vector<std::size_t> inner;
            for (std::size_t k = 0; k < m; ++k)
              if (k != j && distance(a[k], a[j]) + xi_j < nu_j) {
                inner.push_back(k);
                v += xi_j / (nu_j - distance(a[k], a[j]));
              }
            if (v >= best_j) continue;
            double sup = 0.0;
            for (std::size_t t = 0; t < near[j].size(); ++t) {
              const Point2& pt = samples.points[near[j][t]];
              if (!(distance(pt, a[j]) < nu_j)) continue;
              bool excluded = false;
              for (std::size_t k : inner) excluded = excluded || distance(pt, a[k]) < xi_j;
              if (!excluded) sup = std::max(sup, gap[j][t]);
            }
            v += sup;
            if (v < best_j) {
              best_j = v;
              radii.nu_j[j] = nu_j;
              radii.xi_j[j] = xi_j;
            }
          }
        }
        total += best_j;
      }
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k)
          if (j != k)
            total += 1.0 / (lambda[j] / lambda[k] + lambda[k] / lambda[j] +
                            distance(a[j], a[k]) / lambda[j]);
      if (!best || total < best->total) {
        config.omega = omega;
        best = RadiiChoice{config, radii, total};
      }
    }
  }
  return best;
}

}  // namespace

BubbleShape equivariant_shape(int k, double lambda, EquivariantOrientation o) {
  if (k < 1) throw ParameterError("equivariant_shape: k must be >= 1");
  if (!(lambda > 0.0)) throw ParameterError("equivariant_shape: lambda must be > 0");
  BubbleShape s;
  s.degree = k;
  s.scale = lambda;
  if (!o.base_pi && !o.descending) {
    s.rotation = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
    s.reflected = true;
  } else if (o.base_pi && o.descending) {
    s.rotation = Eigen::Matrix3d::Identity();
  } else if (o.base_pi) {
    s.rotation = Eigen::Vector3d(-1.0, -1.0, 1.0).asDiagonal();
  } else {
    s.rotation = Eigen::Vector3d(-1.0, 1.0, -1.0).asDiagonal();
    s.reflected = true;
  }
  return s;
}

FitResult fit_config(const SphereField& u, const Disc& d, const ExtractionSet& seeds,
                     Gamma0 gamma0, const FitOptions& opts) {
  if (!(d.radius > 0.0)) throw ParameterError("fit disc must have positive radius");
  if (!detail::contains_disc(u, d))
    throw AdmissibilityError("fit disc D(y, rho) is not contained in the domain of u");
  const detail::Samples samples = detail::field_samples(u);

  std::vector<Seed> fitted;
  bool converged = std::holds_alternative<RadialField>(u)
                       ? fit_radial(u, d, seeds, gamma0, opts, fitted)
                       : fit_cartesian(u, d, seeds, gamma0, opts, fitted);
  std::optional<RadiiChoice> best;
  if (!fitted.empty()) best = search_radii(u, build(fitted, gamma0), d, gamma0, samples);
  if (!best) {
    best = search_radii(u, BubbleConfig{}, d, gamma0, samples);
    converged = true;
  }
  if (!best) throw AdmissibilityError("no admissible radii for the fit disc");

  FitResult r;
  r.config = best->config;
  r.radii = best->radii;
  r.report = distance_d(u, r.config, d, r.radii, gamma0);
  r.converged = converged;
  for (const auto& b : r.config.bubbles)
    r.lambda_max = std::max(r.lambda_max, bubble_scale(b, gamma0).scale);
  return r;
}

}  // namespace hmhf
