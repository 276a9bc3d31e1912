#pragma once

#include "nsasym/quadrature.hpp"
#include "nsasym/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nsasym {

/// Spatial rule for integrals over R^3 whose integrand has features at two
/// centers, the origin (data) and a point x (kernel).
struct SpatialRule {
  int radial_order = 8;      ///< Gauss–Legendre nodes per radial panel
  double panel_ratio = 4.0;  ///< r_hi / r_lo of each geometric panel
  int n_theta = 12;
  int n_phi = 12;
  int partition_power = 6;   ///< even, so the partition is polynomial near each center
  double inner_factor = 0.25;
  double outer_factor = 4.0;

  void validate() const;
  /// Every order halved (floored at 4); used for a posteriori error estimates.
  SpatialRule halved() const;
  SpatialRule doubled() const;
};

/// Nodes on [0, inf): r = inner v^4 on [0, inner], geometric Gauss–Legendre
/// panels from inner = inner_factor * lo to outer = outer_factor * hi, and
/// r = outer / u beyond. Scaling lo and hi by c scales every node by c.
Rule1D graded_radial_rule(double lo, double hi, const SpatialRule& rule);

/// int_{R^3} f(y) dy with the partition chi(y) = |y|^m / (|y|^m + |y-x|^m):
/// chi f in spherical coordinates about x and (1 - chi) f about 0, each sphere
/// rule oriented toward the other center. `scales` are the characteristic
/// lengths of the integrand (zeros ignored). The node set is covariant
/// under (x, scales) -> (c x, c scales).
template <class V, class F>
V two_center_integral(const Vec3& x, const std::vector<double>& scales, const SpatialRule& rule, F&& f,
                      const V& zero) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double s : scales) {
    if (s > 0.0 && std::isfinite(s)) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  if (!(hi > 0.0)) throw DomainError("two_center_integral needs a positive length scale");
  const Rule1D radial = graded_radial_rule(lo, hi, rule);
  const SphereRule sphere(rule.n_theta, rule.n_phi);
  const double rx = x.norm();
  V acc = zero;
  if (rx == 0.0) {
    const auto nodes = sphere.nodes();
    for (std::size_t a = 0; a < radial.size(); ++a) {
      const double r = radial.x[a];
      V shell = zero;
      for (const auto& n : nodes) shell += n.weight * f(Vec3(r * n.direction));
      acc += (radial.w[a] * r * r) * shell;
    }
    return acc;
  }
  const Vec3 ex = x / rx;
  const auto about_x = sphere.oriented(-ex);
  const auto about_0 = sphere.oriented(ex);
  const int m = rule.partition_power;
  auto chi = [&](const Vec3& y) {
    const double a = y.squaredNorm(), b = (y - x).squaredNorm();
    if (a == 0.0) return 0.0;
    return 1.0 / (1.0 + std::pow(b / a, m / 2));
  };
  for (std::size_t a = 0; a < radial.size(); ++a) {
    const double r = radial.x[a];
    V shell = zero;
    for (const auto& n : about_x) {
      const Vec3 y = x + r * n.direction;
      const double c = chi(y);
      if (c != 0.0) shell += (n.weight * c) * f(y);
    }
    for (const auto& n : about_0) {
      const Vec3 y = r * n.direction;
      const double c = 1.0 - chi(y);
      if (c != 0.0) shell += (n.weight * c) * f(y);
    }
    acc += (radial.w[a] * r * r) * shell;
  }
  return acc;
}

}  // namespace nsasym
