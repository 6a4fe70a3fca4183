#include "hmhf/sphere_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hmhf/errors.hpp"

namespace hmhf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxGrading = 1.2;

double sq(double v) { return v * v; }

}  // namespace

// ---------------------------------------------------------------------------
// Grids

Grid2D::Grid2D(Point2 origin, double h, std::size_t nx, std::size_t ny)
    : origin_(origin), h_(h), nx_(nx), ny_(ny) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw ParameterError("Grid2D: spacing must be positive");
  if (nx < 3 || ny < 3)
    throw ParameterError("Grid2D: need at least 3 cells per direction");
}

Grid2D Grid2D::centered(Point2 center, double half_width, double h) {
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * half_width / h - 1e-9));
  const double half = 0.5 * h * static_cast<double>(n);
  return Grid2D({center.x - half, center.y - half}, h, n, n);
}

double Grid2D::inner_radius(const Point2& p) const {
  const double r = std::min({p.x - origin_.x, x_max() - p.x, p.y - origin_.y,
                             y_max() - p.y});
  return std::max(r, 0.0);
}

RadialGrid::RadialGrid(std::vector<double> nodes, int degree)
    : nodes_(std::move(nodes)), degree_(degree) {
  if (degree_ < 1) throw ParameterError("RadialGrid: degree must be >= 1");
  if (nodes_.size() < 3) throw ParameterError("RadialGrid: need >= 3 nodes");
  if (!(nodes_.front() > 0.0))
    throw ParameterError("RadialGrid: first node must be positive");
  double prev_gap = nodes_.front();
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    const double gap = nodes_[i] - nodes_[i - 1];
    if (!(gap > 0.0))
      throw ParameterError("RadialGrid: nodes must be strictly increasing");
    const double ratio = gap / prev_gap;
    if (ratio > kMaxGrading * (1 + 1e-9) || ratio < 1.0 / (kMaxGrading * (1 + 1e-9))) {
      std::ostringstream msg;
      msg << "RadialGrid: spacing ratio " << ratio << " at node " << i
          << " exceeds " << kMaxGrading;
      throw ParameterError(msg.str());
    }
    prev_gap = gap;
  }
}

RadialGrid RadialGrid::uniform(int degree, double h, double r_max) {
  if (!(h > 0.0) || !(r_max > 2.0 * h))
    throw ParameterError("RadialGrid::uniform: need 0 < 3h <= r_max");
  const auto n = static_cast<std::size_t>(std::llround(r_max / h));
  const double step = r_max / static_cast<double>(n);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = step * static_cast<double>(i + 1);
  r.back() = r_max;
  return RadialGrid(std::move(r), degree);
}

RadialGrid RadialGrid::graded(int degree, double h_core, double r_core,
                              double r_max, double ratio) {
  if (!(ratio >= 1.0) || ratio > kMaxGrading)
    throw ParameterError("RadialGrid::graded: ratio must lie in [1, 1.2]");
  if (!(h_core > 0.0) || !(r_core >= h_core) || !(r_max > r_core))
    throw ParameterError("RadialGrid::graded: need 0 < h_core <= r_core < r_max");
  std::vector<double> r;
  double x = h_core;
  while (x <= r_core * (1 + 1e-12)) {
    r.push_back(x);
    x += h_core;
  }
  const double core_end = r.back();
  double gap = h_core;
  std::vector<double> tail;
  double pos = core_end;
  while (true) {
    gap *= ratio;
    if (pos + gap > r_max) break;
    pos += gap;
    tail.push_back(pos);
  }
  if (tail.empty()) {
    r.push_back(r_max);
  } else {
    // Stretch the graded tail so that it ends exactly at r_max.
    const double stretch = (r_max - core_end) / (tail.back() - core_end);
    for (double t : tail) r.push_back(core_end + stretch * (t - core_end));
    r.back() = r_max;
  }
  return RadialGrid(std::move(r), degree);
}

double RadialGrid::min_spacing() const {
  double m = nodes_.front();
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    m = std::min(m, nodes_[i] - nodes_[i - 1]);
  return m;
}

// ---------------------------------------------------------------------------
// Fields

CartesianField::CartesianField(Grid2D g, std::vector<Vec3> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.node_count())
    throw ParameterError("CartesianField: value count does not match grid");
}

RadialField::RadialField(RadialGrid g, std::vector<double> p,
                         double origin_value)
    : grid(std::move(g)), phi(std::move(p)), phi_origin(origin_value) {
  if (phi.size() != grid.size())
    throw ParameterError("RadialField: value count does not match grid");
  if (!std::isfinite(phi_origin) ||
      !std::all_of(phi.begin(), phi.end(), [](double v) { return std::isfinite(v); }))
    throw ParameterError("RadialField: non-finite polar angle");
}

double RadialField::phi_at(double r) const {
  const auto nodes = grid.nodes();
  if (r <= 0.0) return phi_origin;
  if (r >= nodes.back()) return phi.back();
  if (r < nodes.front()) {
    const double s = r / nodes.front();
    return (1.0 - s) * phi_origin + s * phi.front();
  }
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
  const auto hi = static_cast<std::size_t>(it - nodes.begin());
  const std::size_t lo = hi - 1;
  const double s = (r - nodes[lo]) / (nodes[hi] - nodes[lo]);
  return (1.0 - s) * phi[lo] + s * phi[hi];
}

Vec3 RadialField::value_at(const Point2& x) const {
  const double r = std::hypot(x.x, x.y);
  return equivariant_value(phi_at(r), grid.degree(), std::atan2(x.y, x.x));
}

Vec3 equivariant_value(double phi, int degree, double theta) {
  const double s = std::sin(phi);
  const double kt = degree * theta;
  return {s * std::cos(kt), s * std::sin(kt), std::cos(phi)};
}

CartesianField sample_field(const Grid2D& grid,
                            const std::function<Vec3(const Point2&)>& f) {
  std::vector<Vec3> v(grid.node_count());
  for (std::size_t j = 0; j < grid.nodes_y(); ++j)
    for (std::size_t i = 0; i < grid.nodes_x(); ++i)
      v[grid.index(i, j)] = f(grid.node(i, j));
  return CartesianField(grid, std::move(v));
}

RadialField sample_radial(const RadialGrid& grid,
                          const std::function<double(double)>& phi,
                          double phi_origin) {
  std::vector<double> p(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) p[i] = phi(grid[i]);
  return RadialField(grid, std::move(p), phi_origin);
}

CartesianField render(const RadialField& field, const Grid2D& grid) {
  return sample_field(grid, [&](const Point2& x) { return field.value_at(x); });
}

// ---------------------------------------------------------------------------
// Constraint helpers

Vec3 project_tangent(const Vec3& u, const Vec3& v) {
  if (std::abs(norm(u) - 1.0) > 1e-10)
    throw ConstraintViolation("project_tangent: base point is not on the unit sphere");
  return v - dot(u, v) * u;
}

CartesianField renormalize(CartesianField f) {
  for (auto& v : f.values) {
    const double n = norm(v);
    if (!(n >= kDegenerateThreshold))
      throw DegenerateField("renormalize: value below degeneracy threshold");
    v *= 1.0 / n;
  }
  return f;
}

RadialField renormalize(RadialField f) {
  // Polar-angle storage is always on the sphere.
  return f;
}

SphereField renormalize(SphereField f) {
  return std::visit([](auto&& g) -> SphereField { return renormalize(std::move(g)); },
                    std::move(f));
}

// ---------------------------------------------------------------------------
// Energy

std::vector<double> cell_energies(const Grid2D& grid,
                                  std::span<const Vec3> values) {
  if (values.size() != grid.node_count())
    throw ParameterError("cell_energies: value count does not match grid");
  std::vector<double> e(grid.cell_count());
  const std::size_t nx = grid.nx();
  const std::size_t stride = grid.nodes_x();
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    const Vec3* row0 = values.data() + j * stride;
    const Vec3* row1 = row0 + stride;
    for (std::size_t i = 0; i < nx; ++i) {
      const Vec3& u00 = row0[i];
      const Vec3& u10 = row0[i + 1];
      const Vec3& u01 = row1[i];
      const Vec3& u11 = row1[i + 1];
      e[j * nx + i] = 0.25 * (norm_sq(u10 - u00) + norm_sq(u11 - u01) +
                              norm_sq(u01 - u00) + norm_sq(u11 - u10));
    }
  }
  return e;
}

double disc_sum(const Grid2D& grid, std::span<const double> cells,
                const Disc& region) {
  const double h = grid.spacing();
  const Point2 o = grid.origin();
  const double r = region.radius;
  if (r <= 0.0) return 0.0;
  auto clamp_index = [](double v, std::size_t n) -> std::size_t {
    if (v <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(v), n);
  };
  const std::size_t i0 = clamp_index(std::floor((region.center.x - r - o.x) / h), grid.nx());
  const std::size_t i1 = clamp_index(std::ceil((region.center.x + r - o.x) / h), grid.nx());
  const std::size_t j0 = clamp_index(std::floor((region.center.y - r - o.y) / h), grid.ny());
  const std::size_t j1 = clamp_index(std::ceil((region.center.y + r - o.y) / h), grid.ny());
  const double inv_area = 1.0 / (h * h);
  double total = 0.0;
  for (std::size_t j = j0; j < j1; ++j) {
    const double y0 = o.y + h * static_cast<double>(j);
    for (std::size_t i = i0; i < i1; ++i) {
      const double x0 = o.x + h * static_cast<double>(i);
      const double frac = disc_rect_overlap(region, x0, x0 + h, y0, y0 + h) * inv_area;
      if (frac > 0.0) total += frac * cells[j * grid.nx() + i];
    }
  }
  return total;
}

namespace {

// Energy of an equivariant-type profile on [a, b] given kinetic increments
// and node potentials p = k^2 (f^2 or sin^2 phi) / r (zero at the origin).
double segment_energy(double a, double b, double kinetic_sq, double pa,
                      double pb) {
  const double len = b - a;
  return kPi * (0.5 * (a + b) * kinetic_sq / len + 0.5 * len * (pa + pb));
}


}  // namespace

std::vector<double> segment_energies(const RadialField& f) {
  const auto r = f.grid.nodes();
  const double k2 = sq(f.grid.degree());
  std::vector<double> e(r.size());
  double prev_r = 0.0;
  double prev_phi = f.phi_origin;
  double prev_pot = 0.0;
  for (std::size_t s = 0; s < r.size(); ++s) {
    const double pot = k2 * sq(std::sin(f.phi[s])) / r[s];
    e[s] = segment_energy(prev_r, r[s], sq(f.phi[s] - prev_phi), prev_pot, pot);
    prev_r = r[s];
    prev_phi = f.phi[s];
    prev_pot = pot;
  }
  return e;
}

double radial_disc_energy(const RadialField& f, double radius) {
  if (radius <= 0.0) return 0.0;
  const auto r = f.grid.nodes();
  const double k2 = sq(f.grid.degree());
  double total = 0.0;
  double prev_r = 0.0;
  double prev_phi = f.phi_origin;
  double prev_pot = 0.0;
  for (std::size_t s = 0; s < r.size(); ++s) {
    if (radius >= r[s]) {
      const double pot = k2 * sq(std::sin(f.phi[s])) / r[s];
      total += segment_energy(prev_r, r[s], sq(f.phi[s] - prev_phi), prev_pot, pot);
      prev_r = r[s];
      prev_phi = f.phi[s];
      prev_pot = pot;
      continue;
    }
    if (radius <= prev_r) return total;
    const double t = (radius - prev_r) / (r[s] - prev_r);
    const double phi_end = (1.0 - t) * prev_phi + t * f.phi[s];
    const double pot = k2 * sq(std::sin(phi_end)) / radius;
    total += segment_energy(prev_r, radius, sq(phi_end - prev_phi), prev_pot, pot);
    return total;
  }
  return total;
}

double equivariant_vector_energy(const RadialGrid& grid,
                                 std::span<const double> f,
                                 std::span<const double> g, double f0,
                                 double g0, double radius) {
  if (f.size() != grid.size() || g.size() != grid.size())
    throw ParameterError("equivariant_vector_energy: size mismatch");
  if (radius <= 0.0) return 0.0;
  (void)f0;  // f must vanish at the origin for finite energy.
  const auto r = grid.nodes();
  const double k2 = sq(grid.degree());
  double total = 0.0;
  double prev_r = 0.0;
  double prev_f = 0.0;
  double prev_g = g0;
  double prev_pot = 0.0;
  for (std::size_t s = 0; s < r.size(); ++s) {
    double end_r = r[s];
    double end_f = f[s];
    double end_g = g[s];
    const bool partial = radius < r[s];
    if (partial) {
      if (radius <= prev_r) break;
      const double t = (radius - prev_r) / (r[s] - prev_r);
      end_r = radius;
      end_f = (1.0 - t) * prev_f + t * f[s];
      end_g = (1.0 - t) * prev_g + t * g[s];
    }
    const double pot = k2 * sq(end_f) / end_r;
    total += segment_energy(prev_r, end_r, sq(end_f - prev_f) + sq(end_g - prev_g),
                            prev_pot, pot);
    if (partial) break;
    prev_r = end_r;
    prev_f = end_f;
    prev_g = end_g;
    prev_pot = pot;
  }
  return total;
}

double dirichlet_energy(const SphereField& f) {
  if (const auto* c = std::get_if<CartesianField>(&f)) {
    const auto e = cell_energies(c->grid, c->values);
    double total = 0.0;
    for (double v : e) total += v;
    return total;
  }
  const auto& rf = std::get<RadialField>(f);
  const auto e = segment_energies(rf);
  double total = 0.0;
  for (double v : e) total += v;
  return total;
}

RegionEnergy dirichlet_energy(const SphereField& f, const Disc& region) {
  if (const auto* c = std::get_if<CartesianField>(&f)) {
    const Grid2D& g = c->grid;
    const double area = disc_rect_overlap(region, g.origin().x, g.x_max(),
                                          g.origin().y, g.y_max());
    if (area <= 0.0) return {0.0, false};
    const auto e = cell_energies(g, c->values);
    return {disc_sum(g, e, region), true};
  }
  const auto& rf = std::get<RadialField>(f);
  if (std::hypot(region.center.x, region.center.y) > 1e-12)
    throw ParameterError("dirichlet_energy: equivariant fields support only origin-centred discs");
  if (region.radius <= 0.0) return {0.0, false};
  return {radial_disc_energy(rf, region.radius), true};
}

double annulus_energy(const SphereField& f, const Point2& c, double inner,
                      double outer) {
  if (outer <= inner) return 0.0;
  return dirichlet_energy(f, Disc{c, outer}).value -
         dirichlet_energy(f, Disc{c, inner}).value;
}

// ---------------------------------------------------------------------------
// Tension and gradients

void check_resolved(const SphereField& f) {
  if (const auto* c = std::get_if<CartesianField>(&f)) {
    const Grid2D& g = c->grid;
    for (std::size_t j = 0; j < g.nodes_y(); ++j) {
      for (std::size_t i = 0; i < g.nodes_x(); ++i) {
        const Vec3& u = c->at(i, j);
        if ((i + 1 < g.nodes_x() && dot(u, c->at(i + 1, j)) < 0.0) ||
            (j + 1 < g.nodes_y() && dot(u, c->at(i, j + 1)) < 0.0)) {
          std::ostringstream msg;
          msg << "field under-resolved near node (" << i << ", " << j << ")";
          throw ResolutionError(msg.str());
        }
      }
    }
    return;
  }
  const auto& rf = std::get<RadialField>(f);
  double prev = rf.phi_origin;
  for (std::size_t i = 0; i < rf.phi.size(); ++i) {
    if (std::abs(rf.phi[i] - prev) > 0.5 * kPi) {
      std::ostringstream msg;
      msg << "radial field under-resolved near r = " << rf.grid[i];
      throw ResolutionError(msg.str());
    }
    prev = rf.phi[i];
  }
}

std::vector<Vec3> tension(const CartesianField& f) {
  const Grid2D& g = f.grid;
  const double inv_h2 = 1.0 / sq(g.spacing());
  std::vector<Vec3> t(g.node_count());
  const std::size_t stride = g.nodes_x();
  for (std::size_t j = 1; j + 1 < g.nodes_y(); ++j) {
    for (std::size_t i = 1; i + 1 < g.nodes_x(); ++i) {
      const std::size_t n = g.index(i, j);
      const Vec3& u = f.values[n];
      const Vec3 lap = (f.values[n - 1] + f.values[n + 1] + f.values[n - stride] +
                        f.values[n + stride] - 4.0 * u) * inv_h2;
      t[n] = lap - dot(u, lap) * u;
    }
  }
  return t;
}

std::vector<double> tension(const RadialField& f) {
  const auto r = f.grid.nodes();
  const std::size_t n = r.size();
  const double k2 = sq(f.grid.degree());
  std::vector<double> t(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double rm = i == 0 ? 0.0 : r[i - 1];
    const double pm = i == 0 ? f.phi_origin : f.phi[i - 1];
    const double hm = r[i] - rm;
    const double hp = r[i + 1] - r[i];
    const double flux_p = 0.5 * (r[i] + r[i + 1]) * (f.phi[i + 1] - f.phi[i]) / hp;
    const double flux_m = 0.5 * (r[i] + rm) * (f.phi[i] - pm) / hm;
    const double w = 0.5 * (hm + hp);
    t[i] = (flux_p - flux_m) / (w * r[i]) - k2 * std::sin(2.0 * f.phi[i]) / (2.0 * sq(r[i]));
  }
  return t;
}

double tension_l2_sq(const SphereField& f) {
  if (const auto* c = std::get_if<CartesianField>(&f)) {
    const auto t = tension(*c);
    double s = 0.0;
    for (const auto& v : t) s += norm_sq(v);
    return s * sq(c->grid.spacing());
  }
  const auto& rf = std::get<RadialField>(f);
  const auto t = tension(rf);
  const auto r = rf.grid.nodes();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double rm = i == 0 ? 0.0 : r[i - 1];
    const double w = 0.5 * (r[i + 1] - rm);
    s += w * r[i] * sq(t[i]);
  }
  return 2.0 * kPi * s;
}

GradientPeak max_gradient(const SphereField& f) {
  GradientPeak peak;
  if (const auto* c = std::get_if<CartesianField>(&f)) {
    const Grid2D& g = c->grid;
    const auto e = cell_energies(g, c->values);
    std::size_t best = 0;
    for (std::size_t n = 1; n < e.size(); ++n)
      if (e[n] > e[best]) best = n;
    peak.value = std::sqrt(2.0 * e[best]) / g.spacing();
    peak.location = g.cell_center(best % g.nx(), best / g.nx());
    return peak;
  }
  const auto& rf = std::get<RadialField>(f);
  const auto r = rf.grid.nodes();
  const double k2 = sq(rf.grid.degree());
  double prev_r = 0.0;
  double prev_phi = rf.phi_origin;
  for (std::size_t s = 0; s < r.size(); ++s) {
    const double len = r[s] - prev_r;
    const double rm = 0.5 * (r[s] + prev_r);
    const double pmid = 0.5 * (rf.phi[s] + prev_phi);
    const double g2 = sq((rf.phi[s] - prev_phi) / len) + k2 * sq(std::sin(pmid) / rm);
    if (g2 > sq(peak.value)) {
      peak.value = std::sqrt(g2);
      peak.location = {rm, 0.0};
    }
    prev_r = r[s];
    prev_phi = rf.phi[s];
  }
  return peak;
}

double grid_spacing(const SphereField& f) {
  if (const auto* c = std::get_if<CartesianField>(&f)) return c->grid.spacing();
  return std::get<RadialField>(f).grid.min_spacing();
}

}  // namespace hmhf

namespace hmhf {

CellEnergyTable::CellEnergyTable(Grid2D grid, std::vector<double> cells)
    : grid_(std::move(grid)), cells_(std::move(cells)) {
  if (cells_.size() != grid_.cell_count())
    throw ParameterError("CellEnergyTable: cell count does not match grid");
  const std::size_t nx = grid_.nx();
  prefix_.assign(grid_.ny() * (nx + 1), 0.0);
  for (std::size_t j = 0; j < grid_.ny(); ++j) {
    double acc = 0.0;
    double* row = prefix_.data() + j * (nx + 1);
    for (std::size_t i = 0; i < nx; ++i) {
      acc += cells_[j * nx + i];
      row[i + 1] = acc;
    }
    total_ += acc;
  }
}

double CellEnergyTable::row_range(std::size_t j, std::size_t i0,
                                  std::size_t i1) const {
  const double* row = prefix_.data() + j * (grid_.nx() + 1);
  return row[i1] - row[i0];
}

double CellEnergyTable::disc(const Disc& region) const {
  const double r = region.radius;
  if (r <= 0.0) return 0.0;
  const double h = grid_.spacing();
  const Point2 o = grid_.origin();
  const std::size_t nx = grid_.nx();
  const std::size_t ny = grid_.ny();
  const double cx = region.center.x;
  const double cy = region.center.y;
  const double fj0 = std::floor((cy - r - o.y) / h);
  const double fj1 = std::ceil((cy + r - o.y) / h);
  if (fj1 <= 0.0 || fj0 >= static_cast<double>(ny)) return 0.0;
  const auto j0 = static_cast<std::size_t>(std::max(fj0, 0.0));
  const auto j1 = static_cast<std::size_t>(std::min(fj1, static_cast<double>(ny)));
  const double inv_area = 1.0 / (h * h);
  auto to_index = [nx](double v) {
    if (v <= 0.0) return std::size_t{0};
    return std::min(static_cast<std::size_t>(v), nx);
  };
  double total = 0.0;
  for (std::size_t j = j0; j < j1; ++j) {
    const double y0 = o.y + h * static_cast<double>(j);
    const double y1 = y0 + h;
    const double dmin = (cy >= y0 && cy <= y1) ? 0.0 : std::min(std::abs(y0 - cy), std::abs(y1 - cy));
    const double dmax = std::max(std::abs(y0 - cy), std::abs(y1 - cy));
    if (dmin >= r) continue;
    const double w_out = std::sqrt(r * r - dmin * dmin);
    const double w_in = dmax < r ? std::sqrt(r * r - dmax * dmax) : 0.0;
    // Cells fully covered: [x0, x0 + h] within [cx - w_in, cx + w_in].
    std::size_t in0 = to_index(std::ceil((cx - w_in - o.x) / h));
    std::size_t in1 = to_index(std::floor((cx + w_in - o.x) / h));
    if (in1 < in0) in1 = in0;
    const std::size_t out0 = to_index(std::floor((cx - w_out - o.x) / h));
    const std::size_t out1 = to_index(std::ceil((cx + w_out - o.x) / h));
    if (in1 > in0) total += row_range(j, in0, in1);
    auto partial = [&](std::size_t i) {
      const double x0 = o.x + h * static_cast<double>(i);
      const double frac = disc_rect_overlap(region, x0, x0 + h, y0, y1) * inv_area;
      total += frac * cells_[j * nx + i];
    };
    if (in1 > in0) {
      for (std::size_t i = out0; i < in0; ++i) partial(i);
      for (std::size_t i = in1; i < out1; ++i) partial(i);
    } else {
      for (std::size_t i = out0; i < out1; ++i) partial(i);
    }
  }
  return total;
}

std::vector<double> CellEnergyTable::column_sums() const {
  std::vector<double> s(grid_.nx(), 0.0);
  for (std::size_t j = 0; j < grid_.ny(); ++j)
    for (std::size_t i = 0; i < grid_.nx(); ++i) s[i] += cells_[j * grid_.nx() + i];
  return s;
}

std::vector<double> CellEnergyTable::row_sums() const {
  std::vector<double> s(grid_.ny(), 0.0);
  for (std::size_t j = 0; j < grid_.ny(); ++j) s[j] = row_range(j, 0, grid_.nx());
  return s;
}

}  // namespace hmhf
