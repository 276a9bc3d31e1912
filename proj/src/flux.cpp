#include "nsasym/flux.hpp"

#include "nsasym/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nsasym {

void FluxConfig::validate() const {
  if (radii.empty()) throw DomainError("flux config needs at least one radius");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw DomainError("flux radii must be positive");
    for (std::size_t j = 0; j < i; ++j)
      if (radii[i] == radii[j]) throw DomainError("flux radii must be distinct");
  }
  if (!(period > 0.0)) throw DomainError("flux period must be positive");
  if (time_nodes < 1) throw DomainError("flux time_nodes must be >= 1");
  if (n_theta < 2 || n_phi < 1) throw DomainError("flux sphere rule too small");
}

Mat3 momentum_flux_tensor(const FieldHandle& u, const FieldHandle& p, const FieldHandle& F, double t,
                          const Vec3& x) {
  const Vec3 U = u.vector_at(t, x);
  const FieldGradient G = fd_gradient(u, t, x, default_fd_step(x));
  Mat3 T = p.scalar_at(t, x) * Mat3::Identity() + U * U.transpose() - G - G.transpose();
  return T - F.tensor_at(t, x);
}

Vec3 flux_integral_at(const FieldHandle& u, const FieldHandle& p, const FieldHandle& F, double rho, double t,
                      const FluxConfig& config) {
  if (!(rho > 0.0)) throw DomainError("flux radius must be positive");
  const SphereRule rule(config.n_theta, config.n_phi);
  Vec3 acc = Vec3::Zero();
  for (const auto& node : rule.nodes()) {
    const Vec3 x = rho * node.direction;
    const Mat3 T = momentum_flux_tensor(u, p, F, t, x);
    acc += node.weight * (T.transpose() * node.direction);
  }
  return acc * (rho * rho);
}

Vec3 flux_integral(const FieldHandle& u, const FieldHandle& p, const FieldHandle& F, double rho,
                   const FluxConfig& config) {
  config.validate();
  Vec3 acc = Vec3::Zero();
  for (int m = 0; m < config.time_nodes; ++m) {
    const double t = config.period * m / config.time_nodes;
    acc += flux_integral_at(u, p, F, rho, t, config);
  }
  return acc / config.time_nodes;
}

FluxExtraction extract_b(const FieldHandle& u, const FieldHandle& p, const FieldHandle& F,
                         const FluxConfig& config) {
  config.validate();
  const std::size_t nr = config.radii.size();
  const std::size_t nt = static_cast<std::size_t>(config.time_nodes);
  const auto values = parallel_map<Vec3>(nr * nt, [&](std::size_t k) {
    const double t = config.period * static_cast<double>(k % nt) / nt;
    return flux_integral_at(u, p, F, config.radii[k / nt], t, config);
  });

  FluxExtraction out;
  for (std::size_t i = 0; i < nr; ++i) {
    Vec3 avg = Vec3::Zero();
    for (std::size_t m = 0; m < nt; ++m) {
      const Vec3& v = values[i * nt + m];
      out.per_time.push_back({config.radii[i], config.period * static_cast<double>(m) / nt, v});
      avg += v;
    }
    out.averaged.push_back({config.radii[i], std::numeric_limits<double>::quiet_NaN(), avg / nt});
  }
  for (const auto& a : out.averaged)
    for (const auto& b : out.averaged) out.spread = std::max(out.spread, (a.I - b.I).norm());

  if (nr == 1) {
    out.b = out.averaged[0].I;
  } else {
    // Fit I = b + c/rho through the two largest radii.
    std::vector<FluxRow> sorted = out.averaged;
    std::sort(sorted.begin(), sorted.end(), [](const FluxRow& a, const FluxRow& b) { return a.rho < b.rho; });
    const FluxRow& r1 = sorted[nr - 2];
    const FluxRow& r2 = sorted[nr - 1];
    out.b = (r2.rho * r2.I - r1.rho * r1.I) / (r2.rho - r1.rho);
  }
  out.converged = out.spread <= config.spread_tol * std::max(out.b.norm(), 1e-300) || out.spread == 0.0;
  return out;
}

double consistency_check(const FieldHandle& u, const FieldHandle& p, const FieldHandle& F, const FieldHandle& f0,
                         double rho1, double rho2, const FluxConfig& config, int n_radial) {
  config.validate();
  if (!(rho1 > 0.0) || !(rho2 > rho1)) throw DomainError("consistency_check requires 0 < rho1 < rho2");
  const Vec3 jump = flux_integral(u, p, F, rho2, config) - flux_integral(u, p, F, rho1, config);
  const SphereRule rule(config.n_theta, config.n_phi);
  const auto& gl = gauss_legendre(n_radial);
  Vec3 source = Vec3::Zero();
  for (int m = 0; m < config.time_nodes; ++m) {
    const double t = config.period * m / config.time_nodes;
    for (int i = 0; i < n_radial; ++i) {
      const double r = rho1 + 0.5 * (rho2 - rho1) * (gl.nodes[i] + 1.0);
      const FieldValue s = sphere_integral(f0, r, rule, t);
      source += 0.5 * (rho2 - rho1) * gl.weights[i] * Vec3(s[0], s[1], s[2]);
    }
  }
  source /= config.time_nodes;
  return (jump - source).norm();
}

}  // namespace nsasym
