#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hmhf/bubbles.hpp"
#include "hmhf/geometry.hpp"
#include "hmhf/sphere_field.hpp"

namespace hmhf {

/// omega + sum_j (omega_j(x) - omega_j(infinity)). Not sphere-valued in general.
struct BubbleConfig {
  Vec3 omega{0.0, 0.0, 1.0};
  std::vector<BubbleMap> bubbles;

  std::size_t size() const { return bubbles.size(); }
};

Vec3 evaluate_config(const BubbleConfig& c, const Point2& x);
/// Spatial derivatives (d/dx, d/dy) of the superposition.
std::array<Vec3, 2> config_gradient(const BubbleConfig& c, const Point2& x);

/// Half the integral of |grad Q|^2 over the disc by adaptive polar quadrature
/// about every bubble center (a partition of unity separates the bubbles).
double config_energy(const BubbleConfig& c, const Disc& disc);

/// Radii (nu, nu_1..nu_M) and (xi, xi_1..xi_M).
struct AdmissibleRadii {
  double nu = 0.0;
  double xi = 0.0;
  std::vector<double> nu_j;
  std::vector<double> xi_j;
};

struct ProximityReport {
  double energy_mismatch = 0.0;   // E(u - Q; D(y, rho))
  double bubble_sup = 0.0;        // sum_j |u - omega_j|_inf on D_j*
  double neck_sup = 0.0;          // |u - omega|_inf on D(y, nu) \ D(y, xi)
  double neck_energy = 0.0;       // E(u; D(y, nu) \ D(y, xi))
  double radii_ratio = 0.0;       // xi / rho + rho / nu
  double separation = 0.0;        // sum over ordered pairs j != k
  double containment = 0.0;       // lambda_j / dist(a_j, dD(y, xi)) + lambda_j / nu_j + xi_j / lambda_j
  double nested = 0.0;            // xi_j / dist(a_k, dD(a_j, nu_j)), k in I_j
  double total = 0.0;

  /// Recomputes total from the items.
  void sum();
};

/// Checks the radii against the configuration and throws AdmissibilityError
/// naming the first violated constraint.
void check_admissible(const BubbleConfig& c, const Disc& d, const AdmissibleRadii& radii,
                      Gamma0 gamma0);

/// Localized distance of u to the configuration on D(y, rho). Scales and
/// centers of the bubbles are taken for gamma0. L-infinity terms are maxima
/// over grid nodes; for equivariant fields the configuration must be
/// equivariant about the origin as well (ParameterError otherwise).
ProximityReport distance_d(const SphereField& u, const BubbleConfig& c, const Disc& d,
                           const AdmissibleRadii& radii, Gamma0 gamma0);

// ---------------------------------------------------------------------------
// Extraction.

struct Concentration {
  Point2 center;
  double scale = 0.0;   // radius of the smallest peel in the group
  double energy = 0.0;  // energy captured by all peels of the group
};

struct ExtractionSet {
  std::vector<Concentration> entries;
};

struct ExtractionOptions {
  double epsilon0 = 3.14159265358979323846;
  /// Peels closer than this separation quotient are merged.
  double merge_factor = 10.0;
  std::size_t max_peels = 64;
};

/// lambda/lambda' + lambda'/lambda + |a - a'| / min(lambda, lambda').
double separation_quotient(const Point2& a, double la, const Point2& b, double lb);

/// Greedy peeling of the energy inside the disc: repeatedly takes the smallest
/// disc holding at least epsilon0 of the not yet assigned energy, masks it,
/// and merges peels that are not separated.
ExtractionSet extract_bubbles(const SphereField& u, const Disc& d,
                              const ExtractionOptions& opts = {});

// ---------------------------------------------------------------------------
// Fitting.

/// The four ways a degree-k bubble centred at the origin keeps k-equivariance:
/// polar angle base + sign * 2 arctan((r / lambda)^k).
struct EquivariantOrientation {
  bool base_pi = false;
  bool descending = false;
};

BubbleShape equivariant_shape(int k, double lambda, EquivariantOrientation o);

struct FitOptions {
  std::size_t max_evaluations = 4000;
  /// Simplex size (in the optimizer's units) that counts as converged.
  double simplex_tolerance = 1e-6;
  int sweeps = 3;
  int max_degree = 3;
  ExtractionOptions extraction;
};

struct FitResult {
  BubbleConfig config;
  AdmissibleRadii radii;
  ProximityReport report;
  bool converged = true;
  /// Largest gamma0-scale of the fitted bubbles (0 when M = 0).
  double lambda_max = 0.0;
};

/// Upper bound for the proximity function: fits library bubbles seeded from
/// the extraction, then searches dyadic radii. Falls back to the constant
/// configuration when there are no seeds or the fitted one is inadmissible.
FitResult fit_config(const SphereField& u, const Disc& d, const ExtractionSet& seeds,
                     Gamma0 gamma0, const FitOptions& opts = {});

}  // namespace hmhf
