#include "hmhf/snapshot_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "hmhf/errors.hpp"

namespace hmhf {
namespace {

constexpr std::array<char, 5> kMagic = {'H', 'M', 'H', 'F', '1'};
constexpr std::uint8_t kCartesian = 0;
constexpr std::uint8_t kRadial = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out.write(b.data(), 8);
}
void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
void put_i64(std::ostream& out, std::int64_t v) { put_u64(out, static_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 8))
    throw FormatError("snapshot truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }
std::int64_t get_i64(std::istream& in) { return static_cast<std::int64_t>(get_u64(in)); }

constexpr std::uint64_t kMaxNodes = std::uint64_t{1} << 32;

}  // namespace

void write_snapshot(std::ostream& out, const SphereField& field) {
  out.write(kMagic.data(), kMagic.size());
  if (const auto* c = std::get_if<CartesianField>(&field)) {
    out.put(static_cast<char>(kCartesian));
    put_f64(out, c->grid.origin().x);
    put_f64(out, c->grid.origin().y);
    put_f64(out, c->grid.spacing());
    put_u64(out, c->grid.nx());
    put_u64(out, c->grid.ny());
    for (const Vec3& v : c->values) {
      put_f64(out, v.x);
      put_f64(out, v.y);
      put_f64(out, v.z);
    }
  } else {
    const auto& r = std::get<RadialField>(field);
    out.put(static_cast<char>(kRadial));
    put_i64(out, r.grid.degree());
    put_u64(out, r.grid.size());
    put_f64(out, r.phi_origin);
    for (double x : r.grid.nodes()) put_f64(out, x);
    for (double p : r.phi) put_f64(out, p);
  }
  if (!out) throw FormatError("snapshot write failed");
}

SphereField read_snapshot(std::istream& in) {
  std::array<char, 5> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw FormatError("bad magic (expected HMHF1)");
  const int kind = in.get();
  if (kind == kCartesian) {
    const double ox = get_f64(in);
    const double oy = get_f64(in);
    const double h = get_f64(in);
    const std::uint64_t nx = get_u64(in);
    const std::uint64_t ny = get_u64(in);
    if (nx >= kMaxNodes || ny >= kMaxNodes || (nx + 1) * (ny + 1) >= kMaxNodes)
      throw FormatError("implausible grid size");
    Grid2D grid({ox, oy}, h, nx, ny);
    std::vector<Vec3> values(grid.node_count());
    for (auto& v : values) {
      v.x = get_f64(in);
      v.y = get_f64(in);
      v.z = get_f64(in);
    }
    return CartesianField(grid, std::move(values));
  }
  if (kind == kRadial) {
    const std::int64_t degree = get_i64(in);
    const std::uint64_t n = get_u64(in);
    if (n >= kMaxNodes || degree < 1 || degree > 1000)
      throw FormatError("implausible radial header");
    const double phi_origin = get_f64(in);
    std::vector<double> r(n);
    for (auto& x : r) x = get_f64(in);
    std::vector<double> phi(n);
    for (auto& p : phi) p = get_f64(in);
    return RadialField(RadialGrid(std::move(r), static_cast<int>(degree)),
                       std::move(phi), phi_origin);
  }
  throw FormatError("unknown grid kind byte");
}

void write_snapshot_file(const std::filesystem::path& path,
                         const SphereField& field) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_snapshot(out, field);
}

SphereField read_snapshot_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open snapshot " + path.string());
  try {
    return read_snapshot(in);
  } catch (const Error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace hmhf
