#pragma once

#include "nsasym/types.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nsasym {

/// Gauss–Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int order);

  /// Integral of f over [a, b].
  template <class F>
  auto integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    auto acc = f(mid + half * nodes[0]) * weights[0];
    for (std::size_t i = 1; i < nodes.size(); ++i) acc += f(mid + half * nodes[i]) * weights[i];
    return acc * half;
  }
};

/// Cached Gauss–Legendre rule; thread-safe.
const GaussLegendre& gauss_legendre(int order);

/// A weighted node on the unit sphere.
struct SphereNode {
  Vec3 direction;
  double weight;
};

/// Product rule on the unit sphere: Gauss–Legendre in cos(polar) times a
/// uniform azimuthal rule. Exact for spherical harmonics of degree
/// < min(2 n_theta, n_phi).
class SphereRule {
 public:
  SphereRule(int n_theta, int n_phi);

  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  std::span<const SphereNode> nodes() const { return nodes_; }
  double weight_sum() const;

  /// Nodes rotated so the rule's pole points along `axis` (unit vector).
  std::vector<SphereNode> oriented(const Vec3& axis) const;

 private:
  int n_theta_;
  int n_phi_;
  std::vector<SphereNode> nodes_;
};

/// Orthonormal frame whose third column is `axis`. Deterministic in `axis`.
Mat3 frame_with_pole(const Vec3& axis);

/// One-dimensional nodes and weights.
struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;

  void add(double xi, double wi) {
    x.push_back(xi);
    w.push_back(wi);
  }
  std::size_t size() const { return x.size(); }
};

/// Composite Gauss–Legendre rule on [a, b] with `panels` equal panels.
Rule1D composite_gl(double a, double b, int panels, int order);

/// Radial rule on [0, inf) for integrands that may carry an integrable
/// |r|^{-c} (c < 3) singularity at r = 0 after the r^2 Jacobian is
/// included by the caller. Resolves features between `inner` and `outer`
/// with Gauss–Legendre in log r; [0, inner] uses r = inner * v^4;
/// [outer, inf) uses r = outer / u.
Rule1D radial_rule(double inner, double outer, int n_inner, int n_log, int n_tail);

/// Same as radial_rule but truncated at `r_max` (no tail).
Rule1D radial_rule_finite(double inner, double r_max, int n_inner, int n_log);

}  // namespace nsasym
