#include "hmhf/bubbles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hmhf/errors.hpp"

namespace hmhf {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRayTol = 1e-14;
constexpr double kAngleTol = 1e-12;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Globally adaptive Gauss-Kronrod: the worst subinterval is bisected until
// the summed error estimate drops below max(abs_tol, rel_tol * |integral|).
template <class F>
double adaptive_gk(F&& f, double a, double b, double abs_tol, double rel_tol,
                   int max_intervals) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  struct Piece {
    double a, b, value, error;
  };
  auto eval = [&](double lo, double hi) {
    double err = 0.0;
    const double v = GK::integrate(f, lo, hi, 0, 0.0, &err);
    return Piece{lo, hi, v, err};
  };
  std::vector<Piece> pieces{eval(a, b)};
  while (static_cast<int>(pieces.size()) < max_intervals) {
    double err = 0.0, val = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      err += pieces[i].error;
      val += pieces[i].value;
      if (pieces[i].error > pieces[worst].error) worst = i;
    }
    if (err <= std::max(abs_tol, rel_tol * std::abs(val))) break;
    const Piece w = pieces[worst];
    const double mid = 0.5 * (w.a + w.b);
    pieces[worst] = eval(w.a, mid);
    pieces.push_back(eval(mid, w.b));
  }
  double total = 0.0;
  for (const auto& p : pieces) total += p.value;
  return total;
}

std::vector<double> weighted_quantiles(const std::vector<double>& edges_lo,
                                       double width,
                                       const std::vector<double>& mass,
                                       int count) {
  double total = 0.0;
  for (double m : mass) total += m;
  std::vector<double> out;
  if (!(total > 0.0)) return out;
  std::size_t i = 0;
  double cum = 0.0;
  for (int q = 1; q <= count; ++q) {
    const double target = total * q / (count + 1.0);
    while (i + 1 < mass.size() && cum + mass[i] < target) cum += mass[i++];
    const double frac = mass[i] > 0.0 ? std::clamp((target - cum) / mass[i], 0.0, 1.0) : 0.5;
    out.push_back(edges_lo[i] + frac * width);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Gamma0::Gamma0(double value) : value_(value) {
  if (!(value > 0.0 && value < 2.0 * kPi))
    throw ParameterError("gamma0 must lie in (0, 2 pi)");
}

double Gamma0::flow_bound(double initial_energy) {
  if (initial_energy <= 0.0) return 0.01;
  return std::min(0.01, 1.0 / (100.0 * initial_energy));
}

Gamma0 Gamma0::for_flow(double initial_energy) {
  return Gamma0{flow_bound(initial_energy)};
}

void Gamma0::check_flow(double value, double initial_energy) {
  const double bound = flow_bound(initial_energy);
  if (value > bound)
    throw ConfigError("gamma0 = " + std::to_string(value) + " exceeds min(1/100, 1/(100 E0)) = " +
                      std::to_string(bound) + " for E0 = " + std::to_string(initial_energy));
}

RationalMap shape_map(const BubbleShape& s) {
  if (s.degree < 1) throw ParameterError("bubble degree must be positive");
  if (!(s.scale > 0.0)) throw ParameterError("bubble scale must be positive");
  const int k = s.degree;
  const Complex a{s.center.x, s.center.y};
  // ((z - a) / lambda)^k, ascending coefficients.
  std::vector<Complex> p0(k + 1);
  const double inv = std::pow(s.scale, -k);
  for (int i = 0; i <= k; ++i)
    p0[i] = binomial(k, i) * std::pow(-a, k - i) * inv;
  const Mobius m = mobius_from_rotation(s.rotation);
  std::vector<Complex> p(k + 1), q(k + 1);
  for (int i = 0; i <= k; ++i) {
    const Complex one = i == 0 ? Complex{1.0} : Complex{};
    p[i] = m(0, 0) * p0[i] + m(0, 1) * one;
    q[i] = m(1, 0) * p0[i] + m(1, 1) * one;
  }
  for (auto* v : {&p, &q})
    for (auto& c : *v) {
      if (std::abs(c.real()) < 1e-300) c.real(0.0);
      if (std::abs(c.imag()) < 1e-300) c.imag(0.0);
    }
  return RationalMap(std::move(p), std::move(q), s.reflected);
}

double family_scale(int degree, double profile_scale, double gamma0) {
  const double e = 4.0 * kPi * degree;
  if (!(gamma0 < e)) throw NoScaleError("gamma0 exceeds the bubble energy");
  return profile_scale * std::pow(e / gamma0 - 1.0, 1.0 / (2.0 * degree));
}

BubbleMap::BubbleMap(RationalMap map, Gamma0 gamma0)
    : map_(std::move(map)), scale_(0.0), gamma0_(gamma0.value()) {
  const ScaleResult r = locate(BubbleEnergyMeasure(map_), gamma0);
  scale_ = r.scale;
  center_ = r.center;
}

BubbleMap::BubbleMap(const BubbleShape& shape, Gamma0 gamma0)
    : map_(shape_map(shape)),
      scale_(family_scale(shape.degree, shape.scale, gamma0.value())),
      center_(shape.center),
      gamma0_(gamma0.value()),
      shape_(shape) {}

BubbleMap::BubbleMap(RationalMap map, double scale, Point2 center, double gamma0,
                     std::optional<BubbleShape> shape)
    : map_(std::move(map)), scale_(scale), center_(center), gamma0_(gamma0),
      shape_(std::move(shape)) {
  if (!(scale > 0.0)) throw ParameterError("bubble scale must be positive");
}

BubbleMap BubbleMap::with_cache(RationalMap map, double scale, Point2 center,
                                double gamma0, std::optional<BubbleShape> shape) {
  return BubbleMap(std::move(map), scale, center, gamma0, std::move(shape));
}

Vec3 BubbleMap::operator()(const Point2& x) const {
  return map_.value(Complex{x.x, x.y});
}

BubbleMap make_bubble(const BubbleShape& shape, Gamma0 gamma0) {
  return BubbleMap(shape, gamma0);
}

BubbleMap make_equivariant_bubble(int k, double lambda, Point2 a, Gamma0 gamma0) {
  if (k < 1) throw ParameterError("make_equivariant_bubble: k must be >= 1");
  if (!(lambda > 0.0)) throw ParameterError("make_equivariant_bubble: lambda must be > 0");
  BubbleShape s;
  s.degree = k;
  s.scale = lambda;
  s.center = a;
  s.rotation = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
  s.reflected = true;
  return BubbleMap(s, gamma0);
}

Vec3 evaluate_bubble(const BubbleMap& b, const Point2& x) { return b(x); }

// ---------------------------------------------------------------------------

double bubble_disc_energy(const RationalMap& map, const Disc& disc) {
  const auto crit = map.critical_points();
  Complex o{};
  for (auto z : crit) o += z;
  if (!crit.empty()) o /= static_cast<double>(crit.size());
  return bubble_disc_energy(map, disc, {o.real(), o.imag()});
}

double polar_disc_integral(const std::function<double(const Point2&)>& density,
                           const Disc& disc, Point2 pole) {
  const double R = disc.radius;
  if (R <= 0.0) return 0.0;
  // Polar coordinates about the pole, where the density is concentrated. A
  // ray at angle t meets the disc in {r >= 0 : r^2 + 2 b r + q < 0}.
  const double vx = pole.x - disc.center.x;
  const double vy = pole.y - disc.center.y;
  const double q = vx * vx + vy * vy - R * R;
  auto radial = [&](double t, double r0, double r1) {
    const double ex = std::cos(t), ey = std::sin(t);
    if (r1 <= r0) return 0.0;
    if (r0 <= 0.0) {
      // Log variable: the density is concentrated at small r.
      auto f = [&](double s) {
        const double r = std::exp(s);
        return r * r * density({pole.x + r * ex, pole.y + r * ey});
      };
      const double s1 = std::log(r1);
      return adaptive_gk(f, s1 - 40.0, s1, kRayTol, 1e-12, 200);
    }
    auto f = [&](double r) { return r * density({pole.x + r * ex, pole.y + r * ey}); };
    return adaptive_gk(f, r0, r1, kRayTol, 1e-12, 200);
  };
  auto chord = [&](double t, double& r0, double& r1) {
    const double b = vx * std::cos(t) + vy * std::sin(t);
    const double disc2 = b * b - q;
    const double root = disc2 > 0.0 ? std::sqrt(disc2) : 0.0;
    r0 = std::max(0.0, -b - root);
    r1 = std::max(0.0, -b + root);
  };
  if (q < 0.0) {
    auto g = [&](double t) {
      double r0, r1;
      chord(t, r0, r1);
      return radial(t, 0.0, r1);
    };
    return adaptive_gk(g, 0.0, 2.0 * kPi, kAngleTol, 1e-11, 200);
  }
  // Pole outside the disc: the rays that hit it form a cone about -v.
  const double dist = std::sqrt(vx * vx + vy * vy);
  const double half = std::asin(std::min(1.0, R / dist));
  const double axis = std::atan2(-vy, -vx);
  auto g = [&](double u) {
    const double t = axis + half * std::sin(u);
    double r0, r1;
    chord(t, r0, r1);
    return half * std::cos(u) * radial(t, r0, r1);
  };
  return adaptive_gk(g, -0.5 * kPi, 0.5 * kPi, kAngleTol, 1e-11, 200);
}

double bubble_disc_energy(const RationalMap& map, const Disc& disc, Point2 pole) {
  return polar_disc_integral([&](const Point2& p) { return map.energy_density({p.x, p.y}); },
                             disc, pole);
}

BubbleEnergyMeasure::BubbleEnergyMeasure(RationalMap map)
    : map_(std::move(map)), critical_(map_.critical_points()) {
  Complex s{};
  for (auto z : critical_) s += z;
  if (!critical_.empty()) s /= static_cast<double>(critical_.size());
  centroid_ = {s.real(), s.imag()};
}

double BubbleEnergyMeasure::total() const { return 4.0 * kPi * map_.degree(); }

double BubbleEnergyMeasure::in_disc(const Disc& disc) const {
  return bubble_disc_energy(map_, disc, centroid_);
}

SearchSeeds BubbleEnergyMeasure::seeds(int quantiles) const {
  SearchSeeds s;
  s.anchor = centroid_;
  // Radius about the centroid holding half the energy, by bisection in log r.
  const double half = 0.5 * total();
  double lo = -30.0, hi = 30.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (in_disc({centroid_, std::exp(mid)}) < half) lo = mid;
    else hi = mid;
  }
  const double r_half = std::exp(hi);
  s.typical_radius = r_half;
  // Log-polar sample of the density for the quantiles.
  const int nr = 33, nt = 32;
  std::vector<std::pair<Point2, double>> pts;
  for (int i = 0; i < nr; ++i) {
    const double r = r_half * std::pow(2.0, (i - 16) * 0.5);
    for (int j = 0; j < nt; ++j) {
      const double th = 2.0 * kPi * (j + 0.5) / nt;
      const Point2 p{centroid_.x + r * std::cos(th), centroid_.y + r * std::sin(th)};
      pts.push_back({p, map_.energy_density({p.x, p.y}) * r * r});
    }
  }
  auto quant = [&](bool use_x) {
    std::vector<std::pair<double, double>> v;
    double tot = 0.0;
    for (auto& [p, w] : pts) {
      v.push_back({use_x ? p.x : p.y, w});
      tot += w;
    }
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    double cum = 0.0;
    std::size_t i = 0;
    for (int q = 1; q <= quantiles; ++q) {
      const double target = tot * q / (quantiles + 1.0);
      while (i + 1 < v.size() && cum + v[i].second < target) cum += v[i++].second;
      out.push_back(v[i].first);
    }
    return out;
  };
  s.qx = quant(true);
  s.qy = quant(false);
  return s;
}

FieldEnergyMeasure::FieldEnergyMeasure(CellEnergyTable table)
    : table_(std::move(table)), total_(table_->total()) {}

FieldEnergyMeasure::FieldEnergyMeasure(const SphereField& field) {
  if (const auto* c = std::get_if<CartesianField>(&field)) {
    table_.emplace(c->grid, cell_energies(c->grid, c->values));
    total_ = table_->total();
  } else {
    radial_.emplace(std::get<RadialField>(field));
    total_ = dirichlet_energy(field);
  }
}

double FieldEnergyMeasure::in_disc(const Disc& disc) const {
  if (table_) return table_->disc(disc);
  if (std::hypot(disc.center.x, disc.center.y) > 1e-12)
    throw ParameterError("equivariant fields only support discs about the origin");
  return radial_disc_energy(*radial_, disc.radius);
}

SearchSeeds FieldEnergyMeasure::seeds(int quantiles) const {
  SearchSeeds s;
  if (radial_) {
    s.movable = false;
    s.qx = {0.0};
    s.qy = {0.0};
    double lo = 0.0, hi = radial_->grid.r_max();
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (radial_disc_energy(*radial_, mid) < 0.5 * total_) lo = mid;
      else hi = mid;
    }
    s.typical_radius = std::max(hi, radial_->grid.min_spacing());
    return s;
  }
  const Grid2D& g = table_->grid();
  const double h = g.spacing();
  std::vector<double> xs(g.nx()), ys(g.ny());
  for (std::size_t i = 0; i < g.nx(); ++i) xs[i] = g.origin().x + h * i;
  for (std::size_t j = 0; j < g.ny(); ++j) ys[j] = g.origin().y + h * j;
  s.qx = weighted_quantiles(xs, h, table_->column_sums(), quantiles);
  s.qy = weighted_quantiles(ys, h, table_->row_sums(), quantiles);
  // Anchor: the heaviest cell.
  const auto cells = table_->cells();
  const auto it = std::max_element(cells.begin(), cells.end());
  const std::size_t idx = static_cast<std::size_t>(it - cells.begin());
  s.anchor = g.cell_center(idx % g.nx(), idx / g.nx());
  if (s.qx.empty()) {
    s.qx = {s.anchor.x};
    s.qy = {s.anchor.y};
  }
  const double spread = std::max(s.qx.back() - s.qx.front(), s.qy.back() - s.qy.front());
  s.typical_radius = std::max(0.5 * spread, h);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

struct Candidate {
  Point2 center;
  double energy = -1.0;
};

bool better(const Candidate& a, const Candidate& b) {
  const double tol = 1e-12 * std::max(1.0, std::abs(b.energy));
  if (a.energy > b.energy + tol) return true;
  if (a.energy < b.energy - tol) return false;
  if (a.center.x != b.center.x) return a.center.x < b.center.x;
  return a.center.y < b.center.y;
}

class CenterSearch {
 public:
  CenterSearch(const EnergyMeasure& m, const ScaleOptions& opts)
      : m_(m), opts_(opts), seeds_(m.seeds(opts.quantiles)) {
    if (seeds_.movable) {
      base_.push_back(seeds_.anchor);
      std::vector<double> dx(seeds_.qx.size(), 0.0), dy(seeds_.qy.size(), 0.0);
      sx_ = spacing(seeds_.qx);
      sy_ = spacing(seeds_.qy);
      if (opts.seed) {
        std::mt19937_64 rng(*opts.seed);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        for (auto& v : dx) v = u(rng) * sx_;
        for (auto& v : dy) v = u(rng) * sy_;
      }
      for (std::size_t i = 0; i < seeds_.qx.size(); ++i)
        for (std::size_t j = 0; j < seeds_.qy.size(); ++j)
          base_.push_back({seeds_.qx[i] + dx[i], seeds_.qy[j] + dy[j]});
      if (!(sx_ > 0.0)) sx_ = seeds_.typical_radius / 4.0;
      if (!(sy_ > 0.0)) sy_ = seeds_.typical_radius / 4.0;
    } else {
      base_.push_back(seeds_.anchor);
    }
  }

  const SearchSeeds& seeds() const { return seeds_; }

  Candidate best(double radius) const {
    Candidate top;
    for (const auto& p : base_) consider(top, p, radius);
    if (!seeds_.movable) return top;
    double sx = sx_, sy = sy_;
    for (int level = 0; level < opts_.levels; ++level) {
      sx /= opts_.refine;
      sy /= opts_.refine;
      const Point2 c = top.center;
      for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j)
          if (i != 0 || j != 0) consider(top, {c.x + i * sx, c.y + j * sy}, radius);
    }
    return top;
  }

 private:
  static double spacing(const std::vector<double>& q) {
    if (q.size() < 2) return 0.0;
    return (q.back() - q.front()) / static_cast<double>(q.size() - 1);
  }

  void consider(Candidate& top, const Point2& p, double radius) const {
    Candidate c{p, m_.in_disc({p, radius})};
    if (top.energy < 0.0 || better(c, top)) top = c;
  }

  const EnergyMeasure& m_;
  ScaleOptions opts_;
  SearchSeeds seeds_;
  std::vector<Point2> base_;
  double sx_ = 0.0, sy_ = 0.0;
};

}  // namespace

ScaleResult smallest_disc(const EnergyMeasure& m, double target, const ScaleOptions& opts) {
  if (!(target > 0.0)) throw NoScaleError("no scale: target energy must be positive");
  const CenterSearch search(m, opts);
  auto ok = [&](double r) { return search.best(r).energy >= target; };
  double hi = search.seeds().typical_radius;
  int guard = 0;
  while (!ok(hi)) {
    hi *= 2.0;
    if (++guard > 200) throw NoScaleError("no scale: no disc captures the target energy");
  }
  double lo = hi / 2.0;
  guard = 0;
  while (ok(lo)) {
    hi = lo;
    lo /= 2.0;
    if (++guard > 200) throw NoScaleError("no scale: energy concentrates at a point");
  }
  while (hi - lo > opts.rtol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid)) hi = mid;
    else lo = mid;
  }
  const Candidate c = search.best(hi * (1.0 + 1e-4));
  return {hi, c.center, c.energy};
}

ScaleResult locate(const EnergyMeasure& m, Gamma0 gamma0, const ScaleOptions& opts) {
  const double target = m.total() - gamma0.value();
  if (!(target > 0.0)) throw NoScaleError("no scale: total energy does not exceed gamma0");
  return smallest_disc(m, target, opts);
}

ScaleResult bubble_scale(const BubbleMap& b, Gamma0 gamma0) {
  if (gamma0.value() == b.gamma0()) return {b.scale(), b.center(), 0.0};
  if (b.shape())
    return {family_scale(b.shape()->degree, b.shape()->scale, gamma0.value()),
            b.shape()->center, 0.0};
  return locate(BubbleEnergyMeasure(b.map()), gamma0);
}

double compute_scale(const BubbleMap& b, Gamma0 gamma0, const ScaleOptions& opts) {
  return locate(BubbleEnergyMeasure(b.map()), gamma0, opts).scale;
}

Point2 compute_center(const BubbleMap& b, Gamma0 gamma0, const ScaleOptions& opts) {
  return locate(BubbleEnergyMeasure(b.map()), gamma0, opts).center;
}

double compute_scale(const SphereField& f, Gamma0 gamma0, const ScaleOptions& opts) {
  return locate(FieldEnergyMeasure(f), gamma0, opts).scale;
}

Point2 compute_center(const SphereField& f, Gamma0 gamma0, const ScaleOptions& opts) {
  return locate(FieldEnergyMeasure(f), gamma0, opts).center;
}

double exterior_energy(const BubbleMap& b, double R, Gamma0 gamma0) {
  if (!(R >= 2.0)) throw OutOfRegimeError("exterior_energy requires R >= 2");
  const ScaleResult s = bubble_scale(b, gamma0);
  const double total = 4.0 * kPi * b.degree();
  return std::max(0.0, total - bubble_disc_energy(b.map(), {s.center, R * s.scale}));
}

}  // namespace hmhf
