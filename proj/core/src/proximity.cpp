#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fit_internal.hpp"
#include "hmhf/bubble_fit.hpp"
#include "hmhf/errors.hpp"

namespace hmhf {
namespace {

constexpr double kPi = std::numbers::pi;

double sq(double x) { return x * x; }

[[noreturn]] void inadmissible(const std::string& what) { throw AdmissibilityError(what); }

}  // namespace

namespace detail {

Samples field_samples(const SphereField& u) {
  Samples s;
  if (const auto* c = std::get_if<CartesianField>(&u)) {
    const Grid2D& g = c->grid;
    s.points.reserve(g.node_count());
    for (std::size_t j = 0; j < g.nodes_y(); ++j)
      for (std::size_t i = 0; i < g.nodes_x(); ++i) s.points.push_back(g.node(i, j));
    s.values = c->values;
    s.weights.assign(s.points.size(), 1.0);
    return s;
  }
  const auto& rf = std::get<RadialField>(u);
  const int k = rf.grid.degree();
  const auto r = rf.grid.nodes();
  s.radial = true;
  s.points.push_back({0.0, 0.0});
  s.values.push_back(equivariant_value(rf.phi_origin, k, 0.0));
  s.weights.push_back(0.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    s.points.push_back({r[i], 0.0});
    s.values.push_back(equivariant_value(rf.phi[i], k, 0.0));
    const double lo = i == 0 ? 0.0 : r[i - 1];
    const double hi = i + 1 < r.size() ? r[i + 1] : r[i];
    s.weights.push_back(r[i] * 0.5 * (hi - lo));
  }
  return s;
}

double profile_scale(const BubbleMap& b) {
  if (b.shape()) return b.shape()->scale;
  const int k = std::max(1, b.degree());
  const double e = 4.0 * kPi * k;
  return b.scale() * std::pow(b.gamma0() / (e - b.gamma0()), 1.0 / (2.0 * k));
}

void check_equivariant(const BubbleConfig& c, const RadialField& f) {
  const int k = f.grid.degree();
  const double th = 0.7;
  for (double frac : {0.0, 0.001, 0.01, 0.1, 0.5, 1.0}) {
    const double r = frac * f.grid.r_max();
    const Vec3 q0 = evaluate_config(c, {r, 0.0});
    const Vec3 q1 = evaluate_config(c, {r * std::cos(th), r * std::sin(th)});
    const Vec3 expect{q0.x * std::cos(k * th), q0.x * std::sin(k * th), q0.z};
    const double tol = 1e-8 * (1.0 + norm(q0));
    if (std::abs(q0.y) > tol || norm(q1 - expect) > tol ||
        (r == 0.0 && std::abs(q0.x) > tol))
      throw ParameterError("configuration is not k-equivariant about the origin");
  }
}

bool contains_disc(const SphereField& u, const Disc& d) {
  if (const auto* c = std::get_if<CartesianField>(&u))
    return c->grid.inner_radius(d.center) >= d.radius * (1.0 - 1e-12);
  const auto& rf = std::get<RadialField>(u);
  return std::hypot(d.center.x, d.center.y) <= 1e-12 &&
         d.radius <= rf.grid.r_max() * (1.0 + 1e-12);
}

double mismatch_energy(const SphereField& u, const BubbleConfig& c, const Disc& d) {
  if (const auto* rf = std::get_if<RadialField>(&u)) {
    if (std::hypot(d.center.x, d.center.y) > 1e-12)
      throw ParameterError("equivariant fields only support discs about the origin");
    const auto r = rf->grid.nodes();
    std::vector<double> f(r.size()), g(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Vec3 q = evaluate_config(c, {r[i], 0.0});
      f[i] = std::sin(rf->phi[i]) - q.x;
      g[i] = std::cos(rf->phi[i]) - q.z;
    }
    const Vec3 q0 = evaluate_config(c, {0.0, 0.0});
    return equivariant_vector_energy(rf->grid, f, g, 0.0, std::cos(rf->phi_origin) - q0.z,
                                     d.radius);
  }
  const auto& cf = std::get<CartesianField>(u);
  const Grid2D& g = cf.grid;
  const double h = g.spacing();
  // Sub-grid of the cells meeting the disc's bounding box.
  auto clamp_index = [](double v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n)));
  };
  const std::size_t i0 = clamp_index(std::floor((d.center.x - d.radius - g.origin().x) / h), g.nx());
  const std::size_t i1 = clamp_index(std::ceil((d.center.x + d.radius - g.origin().x) / h), g.nx());
  const std::size_t j0 = clamp_index(std::floor((d.center.y - d.radius - g.origin().y) / h), g.ny());
  const std::size_t j1 = clamp_index(std::ceil((d.center.y + d.radius - g.origin().y) / h), g.ny());
  if (i1 <= i0 || j1 <= j0) return 0.0;
  const Grid2D sub(g.node(i0, j0), h, i1 - i0, j1 - j0);
  std::vector<Vec3> diff(sub.node_count());
  for (std::size_t j = 0; j < sub.nodes_y(); ++j)
    for (std::size_t i = 0; i < sub.nodes_x(); ++i)
      diff[sub.index(i, j)] = cf.at(i0 + i, j0 + j) - evaluate_config(c, sub.node(i, j));
  const auto cells = cell_energies(sub, diff);
  return disc_sum(sub, cells, d);
}

}  // namespace detail

Vec3 evaluate_config(const BubbleConfig& c, const Point2& x) {
  Vec3 v = c.omega;
  for (const auto& b : c.bubbles) v += b(x) - b.at_infinity();
  return v;
}

std::array<Vec3, 2> config_gradient(const BubbleConfig& c, const Point2& x) {
  std::array<Vec3, 2> g{};
  for (const auto& b : c.bubbles) {
    const auto d = b.map().gradient(Complex{x.x, x.y});
    g[0] += d[0];
    g[1] += d[1];
  }
  return g;
}

double config_energy(const BubbleConfig& c, const Disc& disc) {
  if (c.bubbles.empty() || disc.radius <= 0.0) return 0.0;
  const std::size_t m = c.bubbles.size();
  std::vector<Point2> centers(m);
  std::vector<double> scales(m);
  for (std::size_t j = 0; j < m; ++j) {
    centers[j] = c.bubbles[j].center();
    scales[j] = detail::profile_scale(c.bubbles[j]);
  }
  auto weight = [&](std::size_t j, const Point2& x) {
    const double s2 = sq(scales[j]);
    const double q = 1.0 + (sq(x.x - centers[j].x) + sq(x.y - centers[j].y)) / s2;
    return 1.0 / (s2 * q * q);
  };
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    auto density = [&](const Point2& x) {
      const auto g = config_gradient(c, x);
      const double e = 0.5 * (norm_sq(g[0]) + norm_sq(g[1]));
      if (m == 1) return e;
      double sum = 0.0;
      for (std::size_t k = 0; k < m; ++k) sum += weight(k, x);
      return sum > 0.0 ? e * weight(j, x) / sum : 0.0;
    };
    total += polar_disc_integral(density, disc, centers[j]);
  }
  return total;
}

void ProximityReport::sum() {
  total = energy_mismatch + bubble_sup + neck_sup + neck_energy + radii_ratio + separation +
          containment + nested;
}

void check_admissible(const BubbleConfig& c, const Disc& d, const AdmissibleRadii& radii,
                      Gamma0 gamma0) {
  const std::size_t m = c.size();
  if (radii.nu_j.size() != m || radii.xi_j.size() != m)
    inadmissible("radii vectors must have one entry per bubble");
  if (!(radii.xi > 0.0)) inadmissible("xi must be positive");
  if (!(radii.xi <= d.radius)) inadmissible("xi <= rho violated");
  if (!(d.radius <= radii.nu)) inadmissible("rho <= nu violated");
  for (std::size_t j = 0; j < m; ++j) {
    const ScaleResult s = bubble_scale(c.bubbles[j], gamma0);
    const double dist = distance(s.center, d.center);
    std::ostringstream who;
    who << " for bubble " << j;
    if (!(dist < radii.xi)) inadmissible("center a_j in D(y, xi) violated" + who.str());
    if (!(radii.nu_j[j] > 0.0)) inadmissible("nu_j must be positive" + who.str());
    if (!(dist + radii.nu_j[j] <= radii.xi * (1.0 + 1e-12)))
      inadmissible("D(a_j, nu_j) inside D(y, xi) violated" + who.str());
    if (!(radii.xi_j[j] > 0.0)) inadmissible("xi_j must be positive" + who.str());
    if (!(radii.xi_j[j] < s.scale)) inadmissible("xi_j < lambda_j violated" + who.str());
  }
}

ProximityReport distance_d(const SphereField& u, const BubbleConfig& c, const Disc& d,
                           const AdmissibleRadii& radii, Gamma0 gamma0) {
  check_admissible(c, d, radii, gamma0);
  if (!detail::contains_disc(u, {d.center, radii.nu}))
    inadmissible("D(y, nu) is not contained in the domain of u");
  if (const auto* rf = std::get_if<RadialField>(&u)) detail::check_equivariant(c, *rf);

  const std::size_t m = c.size();
  std::vector<double> lambda(m);
  std::vector<Point2> a(m);
  for (std::size_t j = 0; j < m; ++j) {
    const ScaleResult s = bubble_scale(c.bubbles[j], gamma0);
    lambda[j] = s.scale;
    a[j] = s.center;
  }

  ProximityReport rep;
  rep.energy_mismatch = detail::mismatch_energy(u, c, d);

  const detail::Samples samples = detail::field_samples(u);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<std::size_t> inner;  // I_j
    for (std::size_t k = 0; k < m; ++k)
      if (k != j && distance(a[k], a[j]) + radii.xi_j[j] < radii.nu_j[j]) inner.push_back(k);
    double sup = 0.0;
    for (std::size_t n = 0; n < samples.points.size(); ++n) {
      const Point2& p = samples.points[n];
      if (!(distance(p, a[j]) < radii.nu_j[j])) continue;
      bool excluded = false;
      for (std::size_t k : inner)
        if (distance(p, a[k]) < radii.xi_j[j]) excluded = true;
      if (excluded) continue;
      sup = std::max(sup, norm(samples.values[n] - c.bubbles[j](p)));
    }
    rep.bubble_sup += sup;
    for (std::size_t k : inner)
      rep.nested += radii.xi_j[j] / (radii.nu_j[j] - distance(a[k], a[j]));
  }

  for (std::size_t n = 0; n < samples.points.size(); ++n) {
    const double r = distance(samples.points[n], d.center);
    if (r >= radii.xi && r < radii.nu)
      rep.neck_sup = std::max(rep.neck_sup, norm(samples.values[n] - c.omega));
  }
  rep.neck_energy = std::max(0.0, annulus_energy(u, d.center, radii.xi, radii.nu));
  rep.radii_ratio = radii.xi / d.radius + d.radius / radii.nu;

  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < m; ++k)
      if (j != k)
        rep.separation +=
            1.0 / (lambda[j] / lambda[k] + lambda[k] / lambda[j] + distance(a[j], a[k]) / lambda[j]);
  for (std::size_t j = 0; j < m; ++j)
    rep.containment += lambda[j] / (radii.xi - distance(a[j], d.center)) +
                       lambda[j] / radii.nu_j[j] + radii.xi_j[j] / lambda[j];
  rep.sum();
  return rep;
}

}  // namespace hmhf
