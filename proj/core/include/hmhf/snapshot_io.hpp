#pragma once

#include <filesystem>
#include <iosfwd>

#include "hmhf/sphere_field.hpp"

namespace hmhf {

/// Binary field snapshot:
///   "HMHF1", one kind byte (0 Cartesian, 1 radial), then little-endian
///   Cartesian: origin.x, origin.y, h (f64), nx, ny (u64), node values
///              x, y, z (f64) in row-major order (j outer, i inner)
///   radial:    degree (i64), n (u64), phi_origin (f64), r[0..n) (f64),
///              phi[0..n) (f64)
void write_snapshot(std::ostream& out, const SphereField& field);
SphereField read_snapshot(std::istream& in);

void write_snapshot_file(const std::filesystem::path& path,
                         const SphereField& field);
/// Throws FormatError whose message names the file on any decoding problem.
SphereField read_snapshot_file(const std::filesystem::path& path);

}  // namespace hmhf
