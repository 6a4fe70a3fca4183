#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hmhf/bubbles.hpp"
#include "hmhf/errors.hpp"
#include "hmhf/snapshot_io.hpp"
#include "hmhf/sphere_field.hpp"

using namespace hmhf;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 normalized(const Vec3& v) { return (1.0 / norm(v)) * v; }

}  // namespace

TEST(ProjectTangent, ParallelVectorVanishes) {
  const Vec3 t = project_tangent({0, 0, 1}, {0, 0, 5});
  EXPECT_EQ(t, (Vec3{0, 0, 0}));
}

TEST(ProjectTangent, DropsNormalComponent) {
  const Vec3 t = project_tangent({0, 0, 1}, {1, 2, 3});
  EXPECT_EQ(t, (Vec3{1, 2, 0}));
}

TEST(ProjectTangent, IdentityDirection) {
  const Vec3 t = project_tangent({1, 0, 0}, {1, 0, 0});
  EXPECT_EQ(t, (Vec3{0, 0, 0}));
}

TEST(Renormalize, UniformScaling) {
  const Grid2D g({0, 0}, 0.5, 3, 3);
  CartesianField f(g, std::vector<Vec3>(g.node_count(), Vec3{0, 0, 2}));
  const CartesianField r = renormalize(f);
  for (const auto& v : r.values) EXPECT_EQ(v, (Vec3{0, 0, 1}));
}

TEST(Renormalize, IdempotentOnUnitField) {
  const auto g = Grid2D::centered({0, 0}, 1.0, 0.1);
  const BubbleMap b = make_equivariant_bubble(1, 0.5, {0, 0});
  const CartesianField f = sample_field(g, [&](const Point2& x) { return b(x); });
  const CartesianField r = renormalize(f);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    EXPECT_LE(norm(r.values[i] - f.values[i]), 1e-12);
}

TEST(Renormalize, DegenerateValueThrows) {
  const Grid2D g({0, 0}, 1.0, 3, 3);
  std::vector<Vec3> v(g.node_count(), Vec3{0, 0, 1});
  v[5] = {1e-9, 0, 0};
  EXPECT_THROW(renormalize(CartesianField(g, v)), DegenerateField);
}

TEST(Grid, RadialGradedSpacing) {
  const auto g = RadialGrid::graded(1, 1e-3, 0.01, 1.0, 1.05);
  EXPECT_NEAR(g.min_spacing(), 1e-3, 1e-12);
  EXPECT_DOUBLE_EQ(g.r_max(), 1.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
}

TEST(DirichletEnergy, ConstantFieldIsZero) {
  const auto g = Grid2D::centered({0, 0}, 1.0, 0.1);
  const SphereField f = sample_field(g, [](const Point2&) { return Vec3{0, 1, 0}; });
  EXPECT_EQ(dirichlet_energy(f), 0.0);
  EXPECT_EQ(dirichlet_energy(f, {{0.2, 0.1}, 0.5}).value, 0.0);
}

// E(D(0,R)) = 4 pi R^2 / (1 + R^2) for the unit degree-1 bubble.
TEST(DirichletEnergy, CanonicalBubbleOnDisc) {
  const BubbleMap b = make_equivariant_bubble(1, 1.0, {0, 0});
  const SphereField f = sample_field(Grid2D::centered({0, 0}, 2.5, 0.02),
                                     [&](const Point2& x) { return b(x); });
  for (double R : {0.5, 1.0, 2.0}) {
    const double oracle = 4 * kPi * R * R / (1 + R * R);
    EXPECT_NEAR(dirichlet_energy(f, {{0, 0}, R}).value, oracle, 1e-3 * oracle) << "R=" << R;
  }
}

TEST(DirichletEnergy, RadialDiscEnergyAtNode) {
  // Radius landing exactly on a grid node.
  const auto g = RadialGrid::uniform(1, 0.01, 5.0);
  const RadialField f = sample_radial(g, [](double r) { return 2 * std::atan(r); }, 0.0);
  const double oracle = 4 * kPi * 0.25 / 1.25;
  EXPECT_NEAR(radial_disc_energy(f, 0.5), oracle, 1e-4 * oracle);
  EXPECT_NEAR(radial_disc_energy(f, g[10]), 4 * kPi * g[10] * g[10] / (1 + g[10] * g[10]), 1e-4);
}

TEST(DirichletEnergy, DegreeKFullPlane) {
  for (int k = 1; k <= 3; ++k) {
    const auto g = RadialGrid::uniform(k, 0.01, 2000.0);
    const SphereField f = sample_radial(g, [k](double r) { return 2 * std::atan(std::pow(r, k)); }, 0.0);
    EXPECT_NEAR(dirichlet_energy(f), 4 * kPi * k, 1e-4 * 4 * kPi * k) << "k=" << k;
  }
}

TEST(DirichletEnergy, DiscOutsideDomainDoesNotIntersect) {
  const SphereField f = sample_field(Grid2D::centered({0, 0}, 1.0, 0.1),
                                     [](const Point2&) { return Vec3{0, 0, 1}; });
  EXPECT_FALSE(dirichlet_energy(f, {{10, 10}, 1.0}).intersects);
}

TEST(DiscRectOverlap, MatchesAreas) {
  EXPECT_NEAR(disc_rect_overlap({{0, 0}, 1.0}, -2, 2, -2, 2), kPi, 1e-12);
  EXPECT_NEAR(disc_rect_overlap({{0, 0}, 1.0}, 0, 2, 0, 2), kPi / 4, 1e-12);
  EXPECT_NEAR(disc_rect_overlap({{0, 0}, 10.0}, 0, 1, 0, 1), 1.0, 1e-12);
  EXPECT_EQ(disc_rect_overlap({{5, 5}, 1.0}, 0, 1, 0, 1), 0.0);
}

TEST(Tension, ConstantFieldVanishes) {
  const CartesianField f = sample_field(Grid2D::centered({0, 0}, 1.0, 0.1),
                                        [](const Point2&) { return Vec3{1, 0, 0}; });
  for (const auto& t : tension(f)) EXPECT_EQ(t, (Vec3{0, 0, 0}));
  const RadialField r = sample_radial(RadialGrid::uniform(1, 0.1, 1.0), [](double) { return kPi; }, kPi);
  for (double t : tension(r)) EXPECT_NEAR(t, 0.0, 1e-12);
}

TEST(Tension, ExactBubbleIsSecondOrder) {
  const BubbleMap b = make_equivariant_bubble(1, 0.5, {0, 0});
  double norms[3];
  const double hs[] = {0.04, 0.02, 0.01};
  for (int i = 0; i < 3; ++i) {
    const SphereField f = sample_field(Grid2D::centered({0, 0}, 1.0, hs[i]),
                                       [&](const Point2& x) { return b(x); });
    norms[i] = std::sqrt(tension_l2_sq(f));
  }
  EXPECT_NEAR(std::log2(norms[0] / norms[1]), 2.0, 0.2);
  EXPECT_NEAR(std::log2(norms[1] / norms[2]), 2.0, 0.2);
}

// A fourth-order Laplacian on the same samples gives an independent tension.
TEST(Tension, PerturbedBubbleAgreesWithWideStencil) {
  const BubbleMap b = make_equivariant_bubble(1, 0.5, {0, 0});
  const auto eta = [](const Point2& x) { return Vec3{std::sin(3 * x.x), std::cos(2 * x.y), x.x * x.y}; };
  const auto g = Grid2D::centered({0, 0}, 1.0, 0.01);
  const CartesianField f = sample_field(g, [&](const Point2& x) { return normalized(b(x) + 0.01 * eta(x)); });
  const auto t = tension(f);
  double diff = 0.0, size = 0.0;
  const double h2 = g.spacing() * g.spacing();
  for (std::size_t j = 2; j + 2 < g.nodes_y(); ++j) {
    for (std::size_t i = 2; i + 2 < g.nodes_x(); ++i) {
      const Vec3& u = f.at(i, j);
      const Vec3 lap = (-1.0 / 12) * (f.at(i - 2, j) + f.at(i + 2, j) + f.at(i, j - 2) + f.at(i, j + 2)) +
                       (4.0 / 3) * (f.at(i - 1, j) + f.at(i + 1, j) + f.at(i, j - 1) + f.at(i, j + 1)) -
                       5.0 * u;
      const Vec3 wide = (1.0 / h2) * (lap - dot(u, lap) * u);
      diff += norm_sq(wide - t[g.index(i, j)]);
      size += norm_sq(wide);
    }
  }
  EXPECT_GT(size * h2, 1e-4);
  EXPECT_LT(std::sqrt(diff / size), 0.02);
}

TEST(CheckResolved, FlagsAntipodalNeighbours) {
  const Grid2D g({0, 0}, 1.0, 3, 3);
  std::vector<Vec3> v(g.node_count(), Vec3{0, 0, 1});
  v[5] = {0, 0, -1};
  EXPECT_THROW(check_resolved(CartesianField(g, v)), ResolutionError);
}

TEST(SnapshotIo, RoundTripIsByteIdentical) {
  const BubbleMap b = make_equivariant_bubble(1, 0.3, {0.1, 0});
  const SphereField cart = sample_field(Grid2D::centered({0, 0}, 1.0, 0.1),
                                        [&](const Point2& x) { return b(x); });
  const SphereField rad = sample_radial(RadialGrid::graded(2, 1e-3, 0.01, 1.0, 1.1),
                                        [](double r) { return 1.7 * r; }, 0.0);
  for (const SphereField& f : {cart, rad}) {
    std::stringstream a;
    write_snapshot(a, f);
    const std::string first = a.str();
    std::stringstream in(first);
    const SphereField back = read_snapshot(in);
    std::stringstream c;
    write_snapshot(c, back);
    EXPECT_EQ(first, c.str());
  }
}

TEST(SnapshotIo, BadMagicThrows) {
  std::stringstream in("NOPE and more bytes");
  EXPECT_THROW(read_snapshot(in), FormatError);
}

TEST(CellEnergyTable, DiscMatchesDirect) {
  const BubbleMap b = make_equivariant_bubble(1, 0.5, {0.2, 0});
  const auto g = Grid2D::centered({0, 0}, 1.5, 0.05);
  const CartesianField f = sample_field(g, [&](const Point2& x) { return b(x); });
  const CellEnergyTable t(g, cell_energies(g, f.values));
  const Disc d{{0.1, -0.2}, 0.8};
  EXPECT_NEAR(t.disc(d), dirichlet_energy(SphereField{f}, d).value, 1e-10);
  EXPECT_NEAR(t.total(), dirichlet_energy(SphereField{f}), 1e-10);
}
