#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <cmath>

#include "hmhf/errors.hpp"
#include "hmhf/rational_map.hpp"

using namespace hmhf;

namespace {

RationalMap identity_map() { return RationalMap({{0, 0}, {1, 0}}, {{1, 0}}); }

void expect_near(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

}  // namespace

TEST(RationalMap, ZeroIsSouthPole) {
  expect_near(identity_map().value({0, 0}), {0, 0, -1}, 1e-15);
}

TEST(RationalMap, InfinityIsNorthPole) {
  expect_near(identity_map().value_at_infinity(), {0, 0, 1}, 1e-15);
  expect_near(identity_map().value({1e9, 0}), {0, 0, 1}, 1e-8);
}

TEST(RationalMap, OneMapsToEquator) {
  const Vec3 v = identity_map().value({1, 0});
  expect_near(v, {1, 0, 0}, 1e-15);
  EXPECT_NEAR(norm(v), 1.0, 1e-15);
}

TEST(RationalMap, ReflectionConjugates) {
  const RationalMap m({{0, 0}, {1, 0}}, {{1, 0}}, true);
  const Vec3 v = m.value({0, 1});
  expect_near(v, {0, -1, 0}, 1e-15);
}

TEST(RationalMap, Degree) {
  const RationalMap m({{1, 0}, {0, 0}, {2, 1}}, {{0, 1}, {1, 0}});
  EXPECT_EQ(m.degree(), 2);
}

TEST(RationalMap, RejectsDegenerateMaps) {
  EXPECT_THROW(RationalMap({{2, 0}}, {{1, 0}}), ParameterError);
  // (z - 1) / (z - 1)^2 shares a root.
  EXPECT_THROW(RationalMap({{-1, 0}, {1, 0}}, {{1, 0}, {-2, 0}, {1, 0}}), ParameterError);
}

TEST(RationalMap, EnergyDensityOfIdentity) {
  // 4 |w'|^2 / (1 + |w|^2)^2 with w = z.
  const RationalMap m = identity_map();
  for (double r : {0.0, 0.5, 2.0}) EXPECT_NEAR(m.energy_density({r, 0}), 4.0 / std::pow(1 + r * r, 2), 1e-14);
}

TEST(RationalMap, GradientMatchesFiniteDifference) {
  const RationalMap m({{0.3, -0.1}, {0, 0}, {1, 0.5}}, {{1, 0}, {0.2, 0}});
  const Complex z{0.4, -0.7};
  const auto g = m.gradient(z);
  const double h = 1e-6;
  const Vec3 dx = (1 / (2 * h)) * (m.value(z + Complex{h, 0}) - m.value(z - Complex{h, 0}));
  const Vec3 dy = (1 / (2 * h)) * (m.value(z + Complex{0, h}) - m.value(z - Complex{0, h}));
  expect_near(g[0], dx, 1e-7);
  expect_near(g[1], dy, 1e-7);
  EXPECT_NEAR(m.energy_density(z), 0.5 * (norm_sq(g[0]) + norm_sq(g[1])), 1e-9);
}

TEST(RationalMap, TranslateRescale) {
  const RationalMap m({{0.5, 0}, {1, 0}}, {{1, 0}, {0, 1}});
  const RationalMap t = translate_rescale(m, {1, -2}, 3.0);
  const Complex z{0.7, 0.2};
  expect_near(t.value(z), m.value((z - Complex{1, -2}) / 3.0), 1e-13);
  EXPECT_THROW(translate_rescale(m, {0, 0}, 0.0), ParameterError);
}

TEST(PolynomialRoots, Quadratic) {
  auto r = polynomial_roots({{2, 0}, {-3, 0}, {1, 0}});
  ASSERT_EQ(r.size(), 2u);
  std::sort(r.begin(), r.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
  EXPECT_NEAR(std::abs(r[0] - Complex{1, 0}), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r[1] - Complex{2, 0}), 0.0, 1e-12);
}

TEST(Mobius, RealisesRotation) {
  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.9, Eigen::Vector3d(1, -2, 0.5).normalized()).toRotationMatrix();
  const Mobius M = mobius_from_rotation(R);
  const RationalMap base = identity_map();
  for (Complex w : {Complex{0.3, 0.1}, Complex{-2, 1}, Complex{0, 0}}) {
    const Complex mw = (M(0, 0) * w + M(0, 1)) / (M(1, 0) * w + M(1, 1));
    const Vec3 s = base.value(w);
    const Eigen::Vector3d rs = R * Eigen::Vector3d(s.x, s.y, s.z);
    expect_near(base.value(mw), {rs.x(), rs.y(), rs.z()}, 1e-12);
  }
}

TEST(StereographicHomogeneous, InvertsChart) {
  const RationalMap m = identity_map();
  for (Complex w : {Complex{0.3, 0.1}, Complex{-2, 1}}) {
    const auto ab = stereographic_homogeneous(m.value(w));
    EXPECT_NEAR(std::abs(ab[0] / ab[1] - w), 0.0, 1e-12);
  }
}
