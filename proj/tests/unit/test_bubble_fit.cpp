#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hmhf/bubble_fit.hpp"
#include "hmhf/errors.hpp"

using namespace hmhf;

namespace {

constexpr double kPi = std::numbers::pi;

SphereField radial_profile(double h_core, double r_core, double r_max, std::function<double(double)> phi) {
  return sample_radial(RadialGrid::graded(1, h_core, r_core, r_max, 1.02), std::move(phi), 0.0);
}

// E(v; D(0, rho)) for v the difference of two degree-1 equivariant maps with
// profiles p1, p2, by composite Simpson on a fine radial grid.
double equivariant_difference_energy(double l1, double l2, double rho) {
  const auto phi = [](double l, double r) { return 2 * std::atan(r / l); };
  const auto dphi = [](double l, double r) { return 2 * l / (l * l + r * r); };
  const auto density = [&](double r) {
    if (r == 0.0) return 0.0;
    const double a = phi(l1, r), b = phi(l2, r), da = dphi(l1, r), db = dphi(l2, r);
    const double radial = da * da + db * db - 2 * da * db * std::cos(a - b);
    const double angular = std::pow(std::sin(a) - std::sin(b), 2) / (r * r);
    return 0.5 * 2 * kPi * r * (radial + angular);
  };
  const int n = 200000;
  const double h = rho / n;
  double s = density(0) + density(rho);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * density(i * h);
  return s * h / 3;
}

}  // namespace

TEST(EvaluateConfig, EmptyConfigIsOmega) {
  BubbleConfig c;
  c.omega = {0, 1, 0};
  EXPECT_EQ(evaluate_config(c, {3, 4}), (Vec3{0, 1, 0}));
  EXPECT_EQ(config_energy(c, {{0, 0}, 10}), 0.0);
}

TEST(EvaluateConfig, SingleBubble) {
  BubbleConfig c;
  c.bubbles.push_back(make_equivariant_bubble(1, 1.0, {0, 0}));
  c.omega = -c.bubbles[0].at_infinity();
  // omega + omega_1(0) - omega_1(inf) = (0,0,1) + (0,0,1) - (0,0,-1).
  const Vec3 v = evaluate_config(c, {0, 0});
  EXPECT_NEAR(v.z, 3.0, 1e-14);
  EXPECT_NEAR(v.x, 0.0, 1e-14);
  const Vec3 far = evaluate_config(c, {1e8, 0});
  EXPECT_LE(norm(far - c.omega), 1e-7);
}

TEST(ConfigEnergy, SingleBubbleIsQuantized) {
  BubbleConfig c;
  c.bubbles.emplace_back(equivariant_shape(2, 0.5, {}));
  EXPECT_NEAR(config_energy(c, {{0, 0}, 1e5}), 8 * kPi, 1e-6);
}

TEST(ConfigEnergy, ConcentricPairApproachesSum) {
  double prev = 1.0;
  for (double ratio : {10.0, 100.0, 1000.0}) {
    BubbleConfig c;
    c.bubbles.emplace_back(equivariant_shape(1, 1.0, {false, false}));
    c.bubbles.emplace_back(equivariant_shape(1, ratio, {true, true}));
    const double dev = std::abs(config_energy(c, {{0, 0}, 1e4 * ratio}) - 8 * kPi) / (8 * kPi);
    EXPECT_LT(dev, prev);
    prev = dev;
  }
  EXPECT_LE(prev, 0.02);
}

TEST(EquivariantShape, MatchesProfiles) {
  for (bool base_pi : {false, true})
    for (bool descending : {false, true}) {
      const BubbleMap b(equivariant_shape(2, 0.7, {base_pi, descending}));
      for (double r : {0.1, 1.3})
        for (double th : {0.0, 2.0}) {
          const double phi = (base_pi ? kPi : 0.0) + (descending ? -1 : 1) * 2 * std::atan(std::pow(r / 0.7, 2));
          EXPECT_LE(norm(equivariant_value(phi, 2, th) - b({r * std::cos(th), r * std::sin(th)})), 1e-12);
        }
    }
  EXPECT_THROW(equivariant_shape(0, 1, {}), ParameterError);
}

class DistanceD : public ::testing::Test {
 protected:
  // gamma0 = 2 keeps lambda(omega) close to the profile scale.
  const Gamma0 gamma0{2.0};
  const double lp = 1e-3;
  const SphereField u = radial_profile(1e-5, 0.01, 25.0, [this](double r) { return 2 * std::atan(r / lp); });
  BubbleConfig config() const {
    BubbleConfig c;
    c.bubbles.emplace_back(equivariant_shape(1, lp, {}), gamma0);
    c.omega = c.bubbles[0].at_infinity();
    return c;
  }
};

TEST_F(DistanceD, ExactBubbleIsDominatedByRadiiTerms) {
  const BubbleConfig c = config();
  const ScaleResult s = bubble_scale(c.bubbles[0], gamma0);
  const double lambda = s.scale;
  EXPECT_NEAR(lambda / lp, std::sqrt(4 * kPi / 2.0 - 1), 1e-3);
  AdmissibleRadii r;
  r.xi = 100 * lambda;
  r.nu = 1e4 * lambda;
  r.nu_j = {r.xi / 2};
  r.xi_j = {lambda / 100};
  const Disc d{{0, 0}, std::sqrt(r.xi * r.nu)};
  const ProximityReport rep = distance_d(u, c, d, r, gamma0);
  EXPECT_LT(rep.energy_mismatch, 1e-6);
  EXPECT_DOUBLE_EQ(rep.radii_ratio, 0.2);
  EXPECT_NEAR(rep.containment, 0.01 + 0.02 + 0.01, 1e-9);
  EXPECT_EQ(rep.separation, 0.0);
  EXPECT_EQ(rep.nested, 0.0);
  EXPECT_LT(rep.total - rep.radii_ratio - rep.containment, 0.05);
}

TEST_F(DistanceD, ConstantMapOnlyRadiiTerms) {
  const SphereField zero = radial_profile(1e-3, 0.01, 5.0, [](double) { return 0.0; });
  BubbleConfig c;
  AdmissibleRadii r;
  r.xi = 0.5;
  r.nu = 4.0;
  const Disc d{{0, 0}, 1.0};
  const ProximityReport rep = distance_d(zero, c, d, r, gamma0);
  EXPECT_EQ(rep.energy_mismatch, 0.0);
  EXPECT_EQ(rep.neck_energy, 0.0);
  EXPECT_DOUBLE_EQ(rep.total, 0.5 / 1.0 + 1.0 / 4.0);
}

TEST_F(DistanceD, DoubledScaleMismatch) {
  BubbleConfig c;
  c.bubbles.emplace_back(equivariant_shape(1, 2 * lp, {}), gamma0);
  c.omega = c.bubbles[0].at_infinity();
  const double lambda = bubble_scale(c.bubbles[0], gamma0).scale;
  AdmissibleRadii r;
  r.xi = 50 * lambda;
  r.nu = 5e3 * lambda;
  r.nu_j = {r.xi / 2};
  r.xi_j = {lambda / 100};
  const Disc d{{0, 0}, std::sqrt(r.xi * r.nu)};
  const ProximityReport rep = distance_d(u, c, d, r, gamma0);
  const double oracle = equivariant_difference_energy(lp, 2 * lp, d.radius);
  EXPECT_GT(rep.energy_mismatch, 0.5);
  EXPECT_NEAR(rep.energy_mismatch, oracle, 0.01 * oracle);
}

TEST_F(DistanceD, InadmissibleRadiiThrow) {
  const BubbleConfig c = config();
  const double lambda = bubble_scale(c.bubbles[0], gamma0).scale;
  AdmissibleRadii r{0.5, 4.0, {0.2}, {lambda / 100}};
  EXPECT_THROW(distance_d(u, c, {{0, 0}, 0.4}, r, gamma0), AdmissibilityError);  // xi > rho
  EXPECT_THROW(distance_d(u, c, {{0, 0}, 5.0}, r, gamma0), AdmissibilityError);  // rho > nu
  r.xi_j = {2 * lambda};
  EXPECT_THROW(distance_d(u, c, {{0, 0}, 1.0}, r, gamma0), AdmissibilityError);  // xi_j >= lambda_j
  r = AdmissibleRadii{0.5, 4.0, {}, {}};
  EXPECT_THROW(distance_d(u, c, {{0, 0}, 1.0}, r, gamma0), AdmissibilityError);
  r = AdmissibleRadii{0.5, 40.0, {0.2}, {lambda / 100}};
  EXPECT_THROW(distance_d(u, c, {{0, 0}, 1.0}, r, gamma0), AdmissibilityError);  // nu outside domain
}

TEST(ExtractBubbles, ConstantMapIsEmpty) {
  const SphereField f = sample_field(Grid2D::centered({0, 0}, 1, 0.05), [](const Point2&) { return Vec3{0, 0, 1}; });
  EXPECT_TRUE(extract_bubbles(f, {{0, 0}, 0.9}).entries.empty());
}

// With epsilon0 = 2 pi the capturing radius solves 4 pi R^2 / (1 + R^2) = 2 pi,
// i.e. R equals the profile scale.
TEST(ExtractBubbles, SingleBubble) {
  const double lp = 0.3;
  const Point2 a{0.2, -0.1};
  const BubbleMap b = make_equivariant_bubble(1, lp, a);
  const SphereField f = sample_field(Grid2D::centered({0, 0}, 3.0, 0.03), [&](const Point2& x) { return b(x); });
  ExtractionOptions o;
  o.epsilon0 = 2 * kPi;
  const auto set = extract_bubbles(f, {{0, 0}, 2.8}, o);
  ASSERT_EQ(set.entries.size(), 1u);
  const Concentration& c = set.entries[0];
  EXPECT_LE(distance(c.center, a), 2 * lp);
  EXPECT_GT(c.scale, lp / 4);
  EXPECT_LT(c.scale, lp * 4);
}

TEST(ExtractBubbles, ConcentricTower) {
  const double l1 = 1e-3, l2 = 1.0;
  const SphereField f = radial_profile(3e-5, 3e-3, 20.0,
                                       [&](double r) { return 2 * std::atan(r / l1) + 2 * std::atan(r / l2); });
  const auto set = extract_bubbles(f, {{0, 0}, 10.0});
  ASSERT_EQ(set.entries.size(), 2u);
  const auto& small = set.entries[0];
  const auto& large = set.entries[1];
  EXPECT_GT(separation_quotient(small.center, small.scale, large.center, large.scale), 100.0);
  EXPECT_GT(small.scale, l1 / 4);
  EXPECT_LT(small.scale, l1 * 4);
  EXPECT_GT(large.scale, l2 / 4);
  EXPECT_LT(large.scale, l2 * 4);
}

TEST(ExtractBubbles, RejectsBadThreshold) {
  const SphereField f = sample_field(Grid2D::centered({0, 0}, 1, 0.1), [](const Point2&) { return Vec3{0, 0, 1}; });
  ExtractionOptions o;
  o.epsilon0 = 5 * kPi;
  EXPECT_THROW(extract_bubbles(f, {{0, 0}, 0.5}, o), ParameterError);
}

TEST(FitConfig, RecoversCartesianBubble) {
  BubbleShape s;
  s.scale = 0.4;
  s.center = {0.3, -0.2};
  s.reflected = true;
  const BubbleMap b(s);
  const SphereField f = sample_field(Grid2D::centered({0, 0}, 3.0, 0.05), [&](const Point2& x) { return b(x); });
  const Disc d{{0, 0}, 2.5};
  const FitResult fit = fit_config(f, d, extract_bubbles(f, d), Gamma0{});
  ASSERT_EQ(fit.config.size(), 1u);
  const BubbleShape& got = *fit.config.bubbles[0].shape();
  EXPECT_LE(distance(got.center, s.center), 0.05 * s.scale);
  EXPECT_NEAR(got.scale / s.scale, 1.0, 0.05);
  EXPECT_EQ(got.reflected, true);
  EXPECT_LT(fit.report.energy_mismatch, 1e-3 * 4 * kPi);
  EXPECT_TRUE(std::isfinite(fit.report.total));
  EXPECT_DOUBLE_EQ(fit.lambda_max, fit.config.bubbles[0].scale());
}

TEST(FitConfig, ConstantGivesEmptyConfig) {
  const SphereField f = radial_profile(1e-3, 0.01, 5.0, [](double) { return 0.0; });
  const Disc d{{0, 0}, 1.0};
  const FitResult fit = fit_config(f, d, extract_bubbles(f, d), Gamma0{});
  EXPECT_EQ(fit.config.size(), 0u);
  EXPECT_DOUBLE_EQ(fit.report.total, fit.radii.xi / d.radius + d.radius / fit.radii.nu);
}

TEST(FitConfig, RecoversTowerWithSummedEnergy) {
  const double l1 = 1e-3, l2 = 1.0;
  const SphereField f = radial_profile(3e-5, 3e-3, 20.0,
                                       [&](double r) { return 2 * std::atan(r / l1) + 2 * std::atan(r / l2); });
  const Disc d{{0, 0}, 10.0};
  const FitResult fit = fit_config(f, d, extract_bubbles(f, d), Gamma0{});
  ASSERT_EQ(fit.config.size(), 2u);
  double a = fit.config.bubbles[0].shape()->scale, b = fit.config.bubbles[1].shape()->scale;
  if (a > b) std::swap(a, b);
  EXPECT_NEAR(a / l1, 1.0, 0.05);
  EXPECT_NEAR(b / l2, 1.0, 0.05);
  EXPECT_NEAR(config_energy(fit.config, {{0, 0}, 1e6}), 8 * kPi, 0.02 * 8 * kPi);
}

TEST(FitConfig, DiscOutsideDomain) {
  const SphereField f = radial_profile(1e-3, 0.01, 1.0, [](double r) { return r; });
  EXPECT_THROW(fit_config(f, {{0, 0}, 2.0}, {}, Gamma0{}), AdmissibilityError);
  EXPECT_THROW(fit_config(f, {{0, 0}, 0.0}, {}, Gamma0{}), ParameterError);
}
