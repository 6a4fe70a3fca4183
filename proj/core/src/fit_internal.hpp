#pragma once

#include <vector>

#include "hmhf/bubble_fit.hpp"

namespace hmhf::detail {

/// Points where the field is known, with its values there. Equivariant fields
/// contribute the origin and their nodes on the positive x-axis.
struct Samples {
  std::vector<Point2> points;
  std::vector<Vec3> values;
  /// Area weights for averages; equivariant samples carry r dr.
  std::vector<double> weights;
  bool radial = false;
};

Samples field_samples(const SphereField& u);

/// E(u - Q; d) on the grid of u.
double mismatch_energy(const SphereField& u, const BubbleConfig& c, const Disc& d);

/// Throws ParameterError unless Q is k-equivariant about the origin.
void check_equivariant(const BubbleConfig& c, const RadialField& f);

/// True when the disc lies inside the region where u is known.
bool contains_disc(const SphereField& u, const Disc& d);

/// Profile scale used by the partition of unity and by fitting.
double profile_scale(const BubbleMap& b);

}  // namespace hmhf::detail
