#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Core>

#include "hmhf/geometry.hpp"

namespace hmhf {

using Complex = std::complex<double>;

/// w(z) = P(z) / Q(z) composed with inverse stereographic projection
///
///   S(w) = (2 Re w, 2 Im w, |w|^2 - 1) / (|w|^2 + 1),
///
/// so w = 0 is the south pole (0, 0, -1) and w = infinity the north pole.
/// With `reflected` set the map is z -> S(conj(w(z))), i.e. the target is
/// mirrored in the xz-plane (orientation reversal).
///
/// Coefficients are stored in ascending order of powers.
class RationalMap {
 public:
  RationalMap(std::vector<Complex> numerator, std::vector<Complex> denominator,
              bool reflected = false);

  const std::vector<Complex>& numerator() const { return p_; }
  const std::vector<Complex>& denominator() const { return q_; }
  bool reflected() const { return reflected_; }
  /// max(deg P, deg Q).
  int degree() const;

  Vec3 value(Complex z) const;
  Vec3 value_at_infinity() const;
  /// Partial derivatives (d/dx, d/dy) of the sphere-valued map.
  std::array<Vec3, 2> gradient(Complex z) const;
  /// Half of |grad u|^2, i.e. 4 |w'|^2 / (1 + |w|^2)^2.
  double energy_density(Complex z) const;

  /// Zeros of P and Q together.
  std::vector<Complex> critical_points() const;

  friend bool operator==(const RationalMap&, const RationalMap&) = default;

 private:
  std::vector<Complex> p_;
  std::vector<Complex> q_;
  std::vector<Complex> dp_;
  std::vector<Complex> dq_;
  bool reflected_;
};

/// Resultant of P and Q after an affine change of variable that centres and
/// normalises their joint root set, and after scaling both to unit max norm.
double normalized_resultant(const std::vector<Complex>& p,
                            const std::vector<Complex>& q);

/// z -> map((z - b) / mu): the map translated by b and rescaled by mu.
RationalMap translate_rescale(const RationalMap& map, Point2 b, double mu);

/// Roots of a polynomial given by ascending coefficients.
std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs);

using Mobius = Eigen::Matrix2cd;

/// The Moebius transformation M with S(M w) = R S(w) for a rotation R.
Mobius mobius_from_rotation(const Eigen::Matrix3d& rotation);

/// Sphere point -> homogeneous coordinates (a : b) with w = a / b.
std::array<Complex, 2> stereographic_homogeneous(const Vec3& x);

}  // namespace hmhf
