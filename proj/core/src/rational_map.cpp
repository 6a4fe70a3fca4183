#include "hmhf/rational_map.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "hmhf/errors.hpp"

namespace hmhf {
namespace {

void trim(std::vector<Complex>& c) {
  while (c.size() > 1 && c.back() == Complex{}) c.pop_back();
}

int poly_degree(const std::vector<Complex>& c) {
  return c.empty() ? 0 : static_cast<int>(c.size()) - 1;
}

Complex horner(const std::vector<Complex>& c, Complex z) {
  Complex acc{};
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

std::vector<Complex> derivative(const std::vector<Complex>& c) {
  if (c.size() <= 1) return {Complex{}};
  std::vector<Complex> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
  return d;
}

Vec3 sphere_from_homogeneous(Complex p, Complex q) {
  const double np = std::norm(p);
  const double nq = std::norm(q);
  const double n = np + nq;
  const Complex pq = p * std::conj(q);
  return {2.0 * pq.real() / n, 2.0 * pq.imag() / n, (np - nq) / n};
}

Vec3 reflect(Vec3 v, bool on) {
  if (on) v.y = -v.y;
  return v;
}

// Coefficients of c(s0 + s1 z) for ascending coefficients c.
std::vector<Complex> affine_substitute(const std::vector<Complex>& c,
                                       Complex s0, Complex s1) {
  std::vector<Complex> out(c.size(), Complex{});
  std::vector<Complex> power{Complex{1.0}};  // (s0 + s1 z)^i
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t m = 0; m < power.size(); ++m) out[m] += c[i] * power[m];
    std::vector<Complex> next(power.size() + 1, Complex{});
    for (std::size_t m = 0; m < power.size(); ++m) {
      next[m] += power[m] * s0;
      next[m + 1] += power[m] * s1;
    }
    power = std::move(next);
  }
  return out;
}

void scale_to_unit(std::vector<Complex>& c) {
  double m = 0.0;
  for (auto v : c) m = std::max(m, std::abs(v));
  if (m > 0.0)
    for (auto& v : c) v /= m;
}

}  // namespace

std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs) {
  std::vector<Complex> c = coeffs;
  trim(c);
  const int n = poly_degree(c);
  if (n < 1) return {};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -c[i] / c[n];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  std::vector<Complex> roots(n);
  for (int i = 0; i < n; ++i) roots[i] = solver.eigenvalues()(i);
  return roots;
}

double normalized_resultant(const std::vector<Complex>& p_in,
                            const std::vector<Complex>& q_in) {
  std::vector<Complex> p = p_in;
  std::vector<Complex> q = q_in;
  trim(p);
  trim(q);
  std::vector<Complex> roots = polynomial_roots(p);
  const auto rq = polynomial_roots(q);
  roots.insert(roots.end(), rq.begin(), rq.end());
  Complex centre{};
  for (auto r : roots) centre += r;
  if (!roots.empty()) centre /= static_cast<double>(roots.size());
  double spread = 0.0;
  for (auto r : roots) spread = std::max(spread, std::abs(r - centre));
  // A double root comes back split by ~sqrt(eps); rescaling that split up to
  // unit size would hide the shared root.
  spread = std::max(spread, 1e-3 * (1.0 + std::abs(centre)));
  p = affine_substitute(p, centre, spread);
  q = affine_substitute(q, centre, spread);
  scale_to_unit(p);
  scale_to_unit(q);
  const int m = poly_degree(p);
  const int n = poly_degree(q);
  if (m == 0 && n == 0) return 0.0;  // both constant: degenerate
  if (m == 0) return std::pow(std::abs(p[0]), n);
  if (n == 0) return std::pow(std::abs(q[0]), m);
  // Sylvester matrix, descending coefficients.
  const int size = m + n;
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(size, size);
  for (int row = 0; row < n; ++row)
    for (int i = 0; i <= m; ++i) s(row, row + i) = p[m - i];
  for (int row = 0; row < m; ++row)
    for (int i = 0; i <= n; ++i) s(n + row, row + i) = q[n - i];
  return std::abs(s.determinant());
}

RationalMap::RationalMap(std::vector<Complex> numerator,
                         std::vector<Complex> denominator, bool reflected)
    : p_(std::move(numerator)), q_(std::move(denominator)), reflected_(reflected) {
  if (p_.empty()) p_.push_back(Complex{});
  if (q_.empty()) q_.push_back(Complex{});
  trim(p_);
  trim(q_);
  const bool p_zero = p_.size() == 1 && p_[0] == Complex{};
  const bool q_zero = q_.size() == 1 && q_[0] == Complex{};
  if (p_zero && q_zero) throw ParameterError("RationalMap: P and Q both vanish");
  if (std::max(poly_degree(p_), poly_degree(q_)) < 1)
    throw ParameterError("RationalMap: map is constant");
  if (p_zero || q_zero || normalized_resultant(p_, q_) <= 1e-10)
    throw ParameterError("RationalMap: P and Q share a root");
  dp_ = derivative(p_);
  dq_ = derivative(q_);
}

int RationalMap::degree() const {
  return std::max(poly_degree(p_), poly_degree(q_));
}

Vec3 RationalMap::value(Complex z) const {
  return reflect(sphere_from_homogeneous(horner(p_, z), horner(q_, z)), reflected_);
}

Vec3 RationalMap::value_at_infinity() const {
  const int d = degree();
  const Complex pl = poly_degree(p_) == d ? p_.back() : Complex{};
  const Complex ql = poly_degree(q_) == d ? q_.back() : Complex{};
  return reflect(sphere_from_homogeneous(pl, ql), reflected_);
}

std::array<Vec3, 2> RationalMap::gradient(Complex z) const {
  const Complex p = horner(p_, z);
  const Complex q = horner(q_, z);
  const Complex dp = horner(dp_, z);
  const Complex dq = horner(dq_, z);
  const double n = std::norm(p) + std::norm(q);
  const Vec3 u = sphere_from_homogeneous(p, q);
  std::array<Vec3, 2> out;
  const Complex dirs[2] = {Complex{1.0, 0.0}, Complex{0.0, 1.0}};
  for (int d = 0; d < 2; ++d) {
    const Complex ddp = dirs[d] * dp;
    const Complex ddq = dirs[d] * dq;
    const Complex dpq = ddp * std::conj(q) + p * std::conj(ddq);
    const double dnp = 2.0 * (std::conj(p) * ddp).real();
    const double dnq = 2.0 * (std::conj(q) * ddq).real();
    const double dn = dnp + dnq;
    const Vec3 dnum{2.0 * dpq.real(), 2.0 * dpq.imag(), dnp - dnq};
    out[d] = reflect((dnum - dn * u) * (1.0 / n), reflected_);
  }
  return out;
}

double RationalMap::energy_density(Complex z) const {
  const Complex p = horner(p_, z);
  const Complex q = horner(q_, z);
  const Complex wr = horner(dp_, z) * q - p * horner(dq_, z);
  const double n = std::norm(p) + std::norm(q);
  return 4.0 * std::norm(wr) / (n * n);
}

std::vector<Complex> RationalMap::critical_points() const {
  auto r = polynomial_roots(p_);
  const auto rq = polynomial_roots(q_);
  r.insert(r.end(), rq.begin(), rq.end());
  return r;
}

RationalMap translate_rescale(const RationalMap& map, Point2 b, double mu) {
  if (!(mu > 0.0)) throw ParameterError("translate_rescale: mu must be positive");
  const Complex shift{-b.x / mu, -b.y / mu};
  const Complex factor{1.0 / mu, 0.0};
  return RationalMap(affine_substitute(map.numerator(), shift, factor),
                     affine_substitute(map.denominator(), shift, factor),
                     map.reflected());
}

std::array<Complex, 2> stereographic_homogeneous(const Vec3& x) {
  if (x.z <= 0.0) return {Complex{x.x, x.y}, Complex{1.0 - x.z, 0.0}};
  return {Complex{1.0 + x.z, 0.0}, Complex{x.x, -x.y}};
}

Mobius mobius_from_rotation(const Eigen::Matrix3d& rotation) {
  auto image = [&](const Vec3& v) {
    const Eigen::Vector3d r = rotation * Eigen::Vector3d(v.x, v.y, v.z);
    return stereographic_homogeneous({r.x(), r.y(), r.z()});
  };
  const auto p0 = image({0.0, 0.0, -1.0});   // image of w = 0
  const auto pinf = image({0.0, 0.0, 1.0});  // image of w = infinity
  const auto p1 = image({1.0, 0.0, 0.0});    // image of w = 1
  Eigen::Matrix2cd basis;
  basis << pinf[0], p0[0], pinf[1], p0[1];
  const Eigen::Vector2cd c = basis.fullPivLu().solve(Eigen::Vector2cd(p1[0], p1[1]));
  Mobius m;
  m << c(0) * pinf[0], c(1) * p0[0], c(0) * pinf[1], c(1) * p0[1];
  const Complex det = m.determinant();
  m /= std::sqrt(det);
  return m;
}

}  // namespace hmhf
