#include "hmhf/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace hmhf {
namespace {

// Area of {0 <= u <= x, 0 <= v <= y, u^2 + v^2 <= r^2} for x, y >= 0.
double quadrant_area(double x, double y, double r) {
  if (x <= 0.0 || y <= 0.0 || r <= 0.0) return 0.0;
  const double r2 = r * r;
  // Antiderivative of sqrt(r^2 - u^2).
  auto arc = [r, r2](double u) {
    u = std::clamp(u, -r, r);
    return 0.5 * (u * std::sqrt(std::max(0.0, r2 - u * u)) +
                  r2 * std::asin(u / r));
  };
  const double ustar = y < r ? std::sqrt(r2 - y * y) : 0.0;
  const double xa = std::min(x, ustar);
  const double xb = std::min(x, r);
  return y * xa + (xb > xa ? arc(xb) - arc(xa) : 0.0);
}

double signed_quadrant(double x, double y, double r) {
  const double sx = x < 0.0 ? -1.0 : 1.0;
  const double sy = y < 0.0 ? -1.0 : 1.0;
  return sx * sy * quadrant_area(std::abs(x), std::abs(y), r);
}

}  // namespace

double disc_rect_overlap(const Disc& disc, double x0, double x1, double y0,
                         double y1) {
  const double r = disc.radius;
  if (r <= 0.0) return 0.0;
  x0 -= disc.center.x;
  x1 -= disc.center.x;
  y0 -= disc.center.y;
  y1 -= disc.center.y;
  // Fast paths: rectangle entirely outside or entirely inside.
  const double nx = std::clamp(0.0, x0, x1);
  const double ny = std::clamp(0.0, y0, y1);
  if (nx * nx + ny * ny >= r * r) return 0.0;
  const double fx = std::max(std::abs(x0), std::abs(x1));
  const double fy = std::max(std::abs(y0), std::abs(y1));
  if (fx * fx + fy * fy <= r * r) return (x1 - x0) * (y1 - y0);
  const double area = signed_quadrant(x1, y1, r) - signed_quadrant(x0, y1, r) -
                      signed_quadrant(x1, y0, r) + signed_quadrant(x0, y0, r);
  return std::clamp(area, 0.0, (x1 - x0) * (y1 - y0));
}

}  // namespace hmhf
