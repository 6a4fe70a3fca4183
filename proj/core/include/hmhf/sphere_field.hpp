#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "hmhf/geometry.hpp"

namespace hmhf {

inline constexpr double kUnitTolerance = 1e-12;
inline constexpr double kDegenerateThreshold = 1e-8;

/// Uniform Cartesian grid with (nx + 1) x (ny + 1) nodes; node (i, j) sits at
/// origin + h * (i, j). Values are stored row-major: index = j * (nx + 1) + i.
class Grid2D {
 public:
  Grid2D(Point2 origin, double h, std::size_t nx, std::size_t ny);

  /// Square grid centred on `center` with half-width at least `half_width`.
  static Grid2D centered(Point2 center, double half_width, double h);

  const Point2& origin() const { return origin_; }
  double spacing() const { return h_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t nodes_x() const { return nx_ + 1; }
  std::size_t nodes_y() const { return ny_ + 1; }
  std::size_t node_count() const { return nodes_x() * nodes_y(); }
  std::size_t cell_count() const { return nx_ * ny_; }
  std::size_t index(std::size_t i, std::size_t j) const {
    return j * nodes_x() + i;
  }
  Point2 node(std::size_t i, std::size_t j) const {
    return {origin_.x + h_ * static_cast<double>(i),
            origin_.y + h_ * static_cast<double>(j)};
  }
  Point2 cell_center(std::size_t i, std::size_t j) const {
    return {origin_.x + h_ * (static_cast<double>(i) + 0.5),
            origin_.y + h_ * (static_cast<double>(j) + 0.5)};
  }
  double x_max() const { return origin_.x + h_ * static_cast<double>(nx_); }
  double y_max() const { return origin_.y + h_ * static_cast<double>(ny_); }

  /// Radius of the largest disc about p that stays inside the rectangle.
  double inner_radius(const Point2& p) const;

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  Point2 origin_;
  double h_;
  std::size_t nx_;
  std::size_t ny_;
};

/// Positive, strictly increasing radii for k-equivariant fields. The origin is
/// not a node; it carries the ghost value of the field instead.
class RadialGrid {
 public:
  RadialGrid(std::vector<double> nodes, int degree);

  /// r_i = (i + 1) h up to r_max.
  static RadialGrid uniform(int degree, double h, double r_max);
  /// Uniform spacing h_core out to r_core, then spacing growing by `ratio`
  /// per node until r_max is reached (the last node is exactly r_max).
  static RadialGrid graded(int degree, double h_core, double r_core,
                           double r_max, double ratio);

  std::span<const double> nodes() const { return nodes_; }
  double operator[](std::size_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }
  int degree() const { return degree_; }
  double r_max() const { return nodes_.back(); }
  /// Smallest spacing, counting the segment [0, r_0].
  double min_spacing() const;

  friend bool operator==(const RadialGrid&, const RadialGrid&) = default;

 private:
  std::vector<double> nodes_;
  int degree_;
};

/// Sphere-valued map sampled on a Grid2D.
struct CartesianField {
  Grid2D grid;
  std::vector<Vec3> values;

  CartesianField(Grid2D g, std::vector<Vec3> v);

  const Vec3& at(std::size_t i, std::size_t j) const {
    return values[grid.index(i, j)];
  }
  Vec3& at(std::size_t i, std::size_t j) { return values[grid.index(i, j)]; }
};

/// k-equivariant map u(r, theta) = (sin phi cos k theta, sin phi sin k theta,
/// cos phi) stored through its polar angle phi(r). `phi_origin` is the value at
/// r = 0 (0 or pi); the last node is the Dirichlet outer value.
struct RadialField {
  RadialGrid grid;
  std::vector<double> phi;
  double phi_origin = 0.0;

  RadialField(RadialGrid g, std::vector<double> p, double origin_value);

  /// Polar angle at radius r by linear interpolation (constant beyond r_max).
  double phi_at(double r) const;
  Vec3 value_at(const Point2& x) const;
};

using SphereField = std::variant<CartesianField, RadialField>;

/// Equivariant map value for polar angle phi at azimuth theta.
Vec3 equivariant_value(double phi, int degree, double theta);

CartesianField sample_field(const Grid2D& grid,
                            const std::function<Vec3(const Point2&)>& f);
RadialField sample_radial(const RadialGrid& grid,
                          const std::function<double(double)>& phi,
                          double phi_origin);
/// Renders an equivariant field (centred at the origin) onto a Cartesian grid.
CartesianField render(const RadialField& field, const Grid2D& grid);

// ---------------------------------------------------------------------------
// Pointwise constraint helpers.

/// v - (u.v) u. Throws ConstraintViolation unless |u| = 1.
Vec3 project_tangent(const Vec3& u, const Vec3& v);

/// Rescales every value to unit length. Throws DegenerateField if any value
/// is shorter than kDegenerateThreshold.
CartesianField renormalize(CartesianField f);
RadialField renormalize(RadialField f);
SphereField renormalize(SphereField f);

// ---------------------------------------------------------------------------
// Energy.

struct RegionEnergy {
  double value = 0.0;
  /// False when the region does not meet the grid (value is then zero).
  bool intersects = true;
};

/// Half the integral of |grad u|^2 over the whole grid.
double dirichlet_energy(const SphereField& f);
/// Same, restricted to a disc. Cells cut by the boundary count by area.
RegionEnergy dirichlet_energy(const SphereField& f, const Disc& region);
/// Energy in D(c, outer) minus energy in D(c, inner).
double annulus_energy(const SphereField& f, const Point2& c, double inner,
                      double outer);

/// Per-cell energies of an arbitrary R^3-valued grid function (not
/// necessarily sphere-valued); cell (i, j) is stored at j * nx + i.
std::vector<double> cell_energies(const Grid2D& grid,
                                  std::span<const Vec3> values);
/// Sums cell energies over a disc using area-fraction weights.
double disc_sum(const Grid2D& grid, std::span<const double> cells,
                const Disc& region);

/// Per-segment energies of an equivariant field; segment 0 is [0, r_0] and
/// segment s is [r_{s-1}, r_s]. Sums to the field's Dirichlet energy.
std::vector<double> segment_energies(const RadialField& f);
/// Energy of an equivariant field inside D(0, R), continuous in R.
double radial_disc_energy(const RadialField& f, double radius);

/// Energy of a k-equivariant R^3 field (f(r) cos k th, f(r) sin k th, g(r))
/// restricted to D(0, radius); f, g given at the nodes of `grid` with origin
/// values f0, g0. Used for mismatch energies between equivariant maps.
double equivariant_vector_energy(const RadialGrid& grid,
                                 std::span<const double> f,
                                 std::span<const double> g, double f0,
                                 double g0, double radius);

// ---------------------------------------------------------------------------
// Tension and gradients.

/// Throws ResolutionError when neighbouring values turn by more than pi/2.
void check_resolved(const SphereField& f);

/// Discrete tension Delta u + u |grad u|^2 at every node (zero on the
/// boundary). The gradient term uses -u . Delta_h u, so the result is the
/// tangential part of the five-point Laplacian.
std::vector<Vec3> tension(const CartesianField& f);
/// Radial residual phi_rr + phi_r / r - k^2 sin(2 phi) / (2 r^2); zero at the
/// pinned outer node.
std::vector<double> tension(const RadialField& f);
/// Squared L2 norm of the tension.
double tension_l2_sq(const SphereField& f);

struct GradientPeak {
  double value = 0.0;
  Point2 location;
};
/// Largest |grad u| on the grid and where it occurs.
GradientPeak max_gradient(const SphereField& f);

/// Smallest spacing of the underlying grid.
double grid_spacing(const SphereField& f);

/// Cell energies with per-row prefix sums, so that disc integrals cost
/// O(radius / h) instead of O(radius^2 / h^2).
class CellEnergyTable {
 public:
  CellEnergyTable(Grid2D grid, std::vector<double> cells);

  const Grid2D& grid() const { return grid_; }
  std::span<const double> cells() const { return cells_; }
  double total() const { return total_; }
  /// Area-weighted energy inside the disc; identical to disc_sum.
  double disc(const Disc& region) const;
  /// Energy per grid column (x-marginal) and per grid row (y-marginal).
  std::vector<double> column_sums() const;
  std::vector<double> row_sums() const;

 private:
  double row_range(std::size_t j, std::size_t i0, std::size_t i1) const;

  Grid2D grid_;
  std::vector<double> cells_;
  std::vector<double> prefix_;  // per row: nx + 1 partial sums
  double total_ = 0.0;
};

}  // namespace hmhf
