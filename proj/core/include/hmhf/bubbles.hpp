#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hmhf/geometry.hpp"
#include "hmhf/rational_map.hpp"
#include "hmhf/sphere_field.hpp"

namespace hmhf {

/// Energy threshold of the scale functional; lies in (0, 2 pi).
class Gamma0 {
 public:
  explicit Gamma0(double value = 0.01);

  double value() const { return value_; }

  /// Largest admissible value for a flow with initial energy e0:
  /// min(1/100, 1/(100 e0)).
  static double flow_bound(double initial_energy);
  static Gamma0 for_flow(double initial_energy);
  /// Throws ConfigError when value exceeds flow_bound(initial_energy).
  static void check_flow(double value, double initial_energy);

 private:
  double value_;
};

/// Explicit family w(z) = M(((z - a) / lambda)^k) where M is the Moebius
/// transformation of a target rotation; `reflected` conjugates the result.
struct BubbleShape {
  int degree = 1;
  double scale = 1.0;  // lambda in the formula above
  Point2 center;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  bool reflected = false;
};

RationalMap shape_map(const BubbleShape& shape);

/// lambda_p * (4 pi k / gamma0 - 1)^(1 / 2k): the scale functional of a
/// family bubble with profile scale lambda_p.
double family_scale(int degree, double profile_scale, double gamma0);

/// Nonconstant harmonic map R^2 -> S^2 with its scale and center for gamma0.
class BubbleMap {
 public:
  /// Scale and center are computed numerically.
  explicit BubbleMap(RationalMap map, Gamma0 gamma0 = Gamma0{});
  /// Scale and center from the closed form of the family.
  explicit BubbleMap(const BubbleShape& shape, Gamma0 gamma0 = Gamma0{});
  /// Trusts the supplied scale and center (used when reading files).
  static BubbleMap with_cache(RationalMap map, double scale, Point2 center,
                              double gamma0,
                              std::optional<BubbleShape> shape = std::nullopt);

  const RationalMap& map() const { return map_; }
  int degree() const { return map_.degree(); }
  double scale() const { return scale_; }
  Point2 center() const { return center_; }
  double gamma0() const { return gamma0_; }
  const std::optional<BubbleShape>& shape() const { return shape_; }

  Vec3 operator()(const Point2& x) const;
  Vec3 at_infinity() const { return map_.value_at_infinity(); }

 private:
  BubbleMap(RationalMap map, double scale, Point2 center, double gamma0,
            std::optional<BubbleShape> shape);

  RationalMap map_;
  double scale_;
  Point2 center_;
  double gamma0_;
  std::optional<BubbleShape> shape_;
};

BubbleMap make_bubble(const BubbleShape& shape, Gamma0 gamma0 = Gamma0{});
/// Bubble with profile phi(r) = 2 arctan((r / lambda)^k) about a: the value
/// is (0, 0, 1) at a and (0, 0, -1) at infinity.
BubbleMap make_equivariant_bubble(int k, double lambda, Point2 a,
                                  Gamma0 gamma0 = Gamma0{});
Vec3 evaluate_bubble(const BubbleMap& b, const Point2& x);

// ---------------------------------------------------------------------------
// Scale and center.

/// Starting data for the center search.
struct SearchSeeds {
  Point2 anchor;
  std::vector<double> qx;  // energy-weighted quantiles of x
  std::vector<double> qy;
  double typical_radius = 1.0;
  /// False when only discs centred at the anchor are meaningful.
  bool movable = true;
};

/// Anything that can report the energy it holds inside a disc.
class EnergyMeasure {
 public:
  virtual ~EnergyMeasure() = default;
  virtual double total() const = 0;
  virtual double in_disc(const Disc& disc) const = 0;
  virtual SearchSeeds seeds(int quantiles) const = 0;
};

class BubbleEnergyMeasure final : public EnergyMeasure {
 public:
  explicit BubbleEnergyMeasure(RationalMap map);
  double total() const override;
  double in_disc(const Disc& disc) const override;
  SearchSeeds seeds(int quantiles) const override;

 private:
  RationalMap map_;
  std::vector<Complex> critical_;
  Point2 centroid_;
};

/// Wraps a grid field. Radial fields only support discs about the origin.
class FieldEnergyMeasure final : public EnergyMeasure {
 public:
  explicit FieldEnergyMeasure(const SphereField& field);
  explicit FieldEnergyMeasure(CellEnergyTable table);
  double total() const override { return total_; }
  double in_disc(const Disc& disc) const override;
  SearchSeeds seeds(int quantiles) const override;

 private:
  std::optional<CellEnergyTable> table_;
  std::optional<RadialField> radial_;
  double total_ = 0.0;
};

struct ScaleOptions {
  double rtol = 1e-4;
  int quantiles = 9;
  int levels = 3;
  int refine = 4;
  /// When set, the initial candidate grid is jittered reproducibly.
  std::optional<std::uint64_t> seed;
};

struct ScaleResult {
  double scale = 0.0;
  Point2 center;
  /// Energy in D(center, scale * (1 + 1e-4)).
  double captured = 0.0;
};

/// Smallest radius (to rtol) of a disc holding at least total - gamma0, and a
/// maximizing center at radius * (1 + 1e-4). Throws NoScaleError when the
/// measure carries no more than gamma0.
ScaleResult locate(const EnergyMeasure& m, Gamma0 gamma0,
                   const ScaleOptions& opts = {});
/// Smallest radius (to rtol) of a disc holding at least `target`.
ScaleResult smallest_disc(const EnergyMeasure& m, double target,
                          const ScaleOptions& opts = {});
/// Scale and center of a bubble for gamma0: cached when gamma0 matches,
/// closed form for family shapes, numeric otherwise.
ScaleResult bubble_scale(const BubbleMap& b, Gamma0 gamma0);

double compute_scale(const BubbleMap& b, Gamma0 gamma0,
                     const ScaleOptions& opts = {});
Point2 compute_center(const BubbleMap& b, Gamma0 gamma0,
                      const ScaleOptions& opts = {});
double compute_scale(const SphereField& f, Gamma0 gamma0,
                     const ScaleOptions& opts = {});
Point2 compute_center(const SphereField& f, Gamma0 gamma0,
                      const ScaleOptions& opts = {});

/// E(b; R^2 \ D(a, R lambda)) with lambda, a taken for gamma0. R >= 2.
double exterior_energy(const BubbleMap& b, double R, Gamma0 gamma0);

/// Energy of the map inside a disc by adaptive quadrature in polar
/// coordinates about `pole` (default: the mean of the zeros of P and Q).
double bubble_disc_energy(const RationalMap& map, const Disc& disc);
double bubble_disc_energy(const RationalMap& map, const Disc& disc, Point2 pole);

/// Integral of a nonnegative density over a disc, adaptive in the angle and
/// (logarithmically, when the pole is inside) in the distance from `pole`.
double polar_disc_integral(const std::function<double(const Point2&)>& density,
                           const Disc& disc, Point2 pole);

}  // namespace hmhf
