#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hmhf/bubble_fit.hpp"
#include "hmhf/errors.hpp"

namespace hmhf {
namespace {

struct Peel {
  Point2 center;
  double radius = 0.0;
  double energy = 0.0;
};

std::vector<Peel> peel_cartesian(const CartesianField& f, const Disc& d,
                                 const ExtractionOptions& opts) {
  const Grid2D& g = f.grid;
  const double h = g.spacing();
  std::vector<double> remaining = cell_energies(g, f.values);
  auto overlap = [&](const Disc& disc, std::size_t n) {
    const Point2 lo = g.node(n % g.nx(), n / g.nx());
    return disc_rect_overlap(disc, lo.x, lo.x + h, lo.y, lo.y + h) / (h * h);
  };
  for (std::size_t n = 0; n < remaining.size(); ++n) remaining[n] *= overlap(d, n);

  std::vector<Peel> peels;
  ScaleOptions so;
  so.rtol = 1e-3;
  while (peels.size() < opts.max_peels) {
    CellEnergyTable table(g, remaining);
    if (table.total() < opts.epsilon0) break;
    ScaleResult r;
    try {
      r = smallest_disc(FieldEnergyMeasure(std::move(table)), opts.epsilon0, so);
    } catch (const NoScaleError&) {
      break;
    }
    const Disc found{r.center, r.scale * (1.0 + 1e-4)};
    double captured = 0.0;
    for (std::size_t n = 0; n < remaining.size(); ++n) {
      if (remaining[n] == 0.0) continue;
      const double w = overlap(found, n);
      if (w <= 0.0) continue;
      captured += remaining[n] * w;
      remaining[n] *= 1.0 - w;
    }
    if (captured < opts.epsilon0 * (1.0 - 1e-9)) break;
    peels.push_back({r.center, r.scale, captured});
  }
  return peels;
}

std::vector<Peel> peel_radial(const RadialField& f, const Disc& d,
                              const ExtractionOptions& opts) {
  if (std::hypot(d.center.x, d.center.y) > 1e-12)
    throw ParameterError("equivariant fields only support discs about the origin");
  const double rho = std::min(d.radius, f.grid.r_max());
  std::vector<Peel> peels;
  double masked = 0.0;
  double e_masked = 0.0;
  while (peels.size() < opts.max_peels) {
    const double target = e_masked + opts.epsilon0;
    if (radial_disc_energy(f, rho) < target) break;
    double lo = masked, hi = rho;
    for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (radial_disc_energy(f, mid) >= target) hi = mid;
      else lo = mid;
    }
    const double e = radial_disc_energy(f, hi);
    peels.push_back({{0.0, 0.0}, hi, e - e_masked});
    masked = hi;
    e_masked = e;
  }
  return peels;
}

}  // namespace

double separation_quotient(const Point2& a, double la, const Point2& b, double lb) {
  return la / lb + lb / la + distance(a, b) / std::min(la, lb);
}

ExtractionSet extract_bubbles(const SphereField& u, const Disc& d,
                              const ExtractionOptions& opts) {
  if (!(opts.epsilon0 > 0.0 && opts.epsilon0 < 4.0 * 3.14159265358979323846))
    throw ParameterError("epsilon0 must lie in (0, 4 pi)");
  if (!(d.radius > 0.0)) throw ParameterError("extraction disc must have positive radius");
  const std::vector<Peel> peels = std::holds_alternative<CartesianField>(u)
                                      ? peel_cartesian(std::get<CartesianField>(u), d, opts)
                                      : peel_radial(std::get<RadialField>(u), d, opts);

  // Groups start as single peels and merge until all pairs are separated.
  std::vector<Concentration> groups;
  for (const auto& p : peels) groups.push_back({p.center, p.radius, p.energy});
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < groups.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < groups.size() && !merged; ++j) {
        const auto& a = groups[i];
        const auto& b = groups[j];
        if (separation_quotient(a.center, a.scale, b.center, b.scale) > opts.merge_factor)
          continue;
        const double e = a.energy + b.energy;
        Concentration c;
        c.center = (1.0 / e) * (a.energy * a.center + b.energy * b.center);
        c.scale = std::min(a.scale, b.scale);
        c.energy = e;
        groups[i] = c;
        groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
    }
  }
  // Half a quantum or less cannot be a bubble of its own: such groups are
  // necks or tails of their least separated neighbour. Peels come in whole
  // multiples of epsilon0, so the comparison needs a little slack.
  constexpr double kHalfQuantum = 2.0 * 3.14159265358979323846 * (1.0 + 1e-3);
  for (;;) {
    auto weak = std::find_if(groups.begin(), groups.end(),
                             [&](const Concentration& c) { return c.energy <= kHalfQuantum; });
    if (weak == groups.end() || groups.size() < 2) break;
    std::size_t wi = static_cast<std::size_t>(weak - groups.begin());
    std::size_t partner = wi == 0 ? 1 : 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < groups.size(); ++j) {
      if (j == wi) continue;
      const double q = separation_quotient(groups[wi].center, groups[wi].scale, groups[j].center,
                                           groups[j].scale);
      if (q < best) {
        best = q;
        partner = j;
      }
    }
    auto& p = groups[partner];
    const auto& w = groups[wi];
    const double e = p.energy + w.energy;
    p.center = (1.0 / e) * (p.energy * p.center + w.energy * w.center);
    p.energy = e;
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(wi));
  }
  std::sort(groups.begin(), groups.end(),
            [](const Concentration& a, const Concentration& b) { return a.scale < b.scale; });
  return {groups};
}

}  // namespace hmhf
