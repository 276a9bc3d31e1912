#include "nsasym/convolution.hpp"

namespace nsasym {

void SpatialRule::validate() const {
  if (radial_order < 4) throw DomainError("radial_order must be >= 4");
  if (n_theta < 4 || n_phi < 4) throw DomainError("angular orders must be >= 4");
  if (!(panel_ratio > 1.0)) throw DomainError("panel_ratio must exceed 1");
  if (partition_power < 2 || partition_power % 2 != 0) throw DomainError("partition_power must be even and >= 2");
  if (!(inner_factor > 0.0) || !(outer_factor >= 1.0)) throw DomainError("bad inner/outer factors");
}

SpatialRule SpatialRule::halved() const {
  SpatialRule r = *this;
  r.radial_order = std::max(4, radial_order / 2);
  r.n_theta = std::max(4, n_theta / 2);
  r.n_phi = std::max(4, n_phi / 2);
  return r;
}

SpatialRule SpatialRule::doubled() const {
  SpatialRule r = *this;
  r.radial_order *= 2;
  r.n_theta *= 2;
  r.n_phi *= 2;
  return r;
}

Rule1D graded_radial_rule(double lo, double hi, const SpatialRule& rule) {
  rule.validate();
  if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("graded_radial_rule requires 0 < lo <= hi");
  const double inner = rule.inner_factor * lo;
  const double outer = rule.outer_factor * hi;
  const auto& gl = gauss_legendre(rule.radial_order);
  Rule1D r;
  for (int i = 0; i < rule.radial_order; ++i) {
    const double v = 0.5 * (gl.nodes[i] + 1.0);
    const double v3 = v * v * v;
    r.add(inner * v3 * v, 0.5 * gl.weights[i] * 4.0 * inner * v3);
  }
  const double span = std::log(outer / inner);
  const int panels = std::max(1, static_cast<int>(std::ceil(span / std::log(rule.panel_ratio) - 1e-9)));
  const double h = span / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = std::log(inner) + p * h;
    for (int i = 0; i < rule.radial_order; ++i) {
      const double u = a + 0.5 * h * (gl.nodes[i] + 1.0);
      const double x = std::exp(u);
      r.add(x, 0.5 * h * gl.weights[i] * x);
    }
  }
  for (int i = 0; i < rule.radial_order; ++i) {
    const double u = 0.5 * (gl.nodes[i] + 1.0);
    r.add(outer / u, 0.5 * gl.weights[i] * outer / (u * u));
  }
  return r;
}

}  // namespace nsasym
