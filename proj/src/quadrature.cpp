#include "nsasym/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <iomanip>

namespace nsasym {

std::string format_point(const Vec3& x) {
  std::ostringstream os;
  os << std::setprecision(17) << "(" << x[0] << ", " << x[1] << ", " << x[2] << ")";
  return os.str();
}

GaussLegendre::GaussLegendre(int order) {
  if (order < 1) throw DomainError("Gauss-Legendre order must be >= 1");
  const int n = order;
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute derivative at the converged root for the weight.
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[i] = -z;
    nodes[n - 1 - i] = z;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

const GaussLegendre& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussLegendre>(order);
  return *slot;
}

SphereRule::SphereRule(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 1 || n_phi < 1) throw DomainError("sphere rule orders must be positive");
  const auto& gl = gauss_legendre(n_theta);
  nodes_.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  const double dphi = 2.0 * kPi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double c = gl.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = (j + 0.5) * dphi;
      nodes_.push_back({Vec3(s * std::cos(phi), s * std::sin(phi), c), gl.weights[i] * dphi});
    }
  }
}

double SphereRule::weight_sum() const {
  // Kahan summation.
  double sum = 0.0, comp = 0.0;
  for (const auto& n : nodes_) {
    const double y = n.weight - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

Mat3 frame_with_pole(const Vec3& axis) {
  const Vec3 e3 = axis.normalized();
  // Seed with the coordinate axis least aligned with e3.
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(e3[i]) < std::abs(e3[k])) k = i;
  const Vec3 seed = Vec3::Unit(k);
  Vec3 e1 = (seed - seed.dot(e3) * e3).normalized();
  Vec3 e2 = e3.cross(e1);
  Mat3 m;
  m.col(0) = e1;
  m.col(1) = e2;
  m.col(2) = e3;
  return m;
}

std::vector<SphereNode> SphereRule::oriented(const Vec3& axis) const {
  const Mat3 frame = frame_with_pole(axis);
  std::vector<SphereNode> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back({frame * n.direction, n.weight});
  return out;
}

Rule1D composite_gl(double a, double b, int panels, int order) {
  Rule1D r;
  const auto& gl = gauss_legendre(order);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < order; ++i) r.add(lo + 0.5 * h * (gl.nodes[i] + 1.0), 0.5 * h * gl.weights[i]);
  }
  return r;
}

namespace {

void append_inner(Rule1D& r, double inner, int n_inner) {
  const auto& gl = gauss_legendre(n_inner);
  for (int i = 0; i < n_inner; ++i) {
    const double v = 0.5 * (gl.nodes[i] + 1.0);
    const double v3 = v * v * v;
    r.add(inner * v3 * v, 0.5 * gl.weights[i] * 4.0 * inner * v3);
  }
}

void append_log(Rule1D& r, double lo, double hi, int n_log) {
  if (!(hi > lo)) return;
  const auto& gl = gauss_legendre(n_log);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n_log; ++i) {
    const double u = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
    const double x = std::exp(u);
    r.add(x, 0.5 * (b - a) * gl.weights[i] * x);
  }
}

}  // namespace

Rule1D radial_rule(double inner, double outer, int n_inner, int n_log, int n_tail) {
  Rule1D r;
  append_inner(r, inner, n_inner);
  append_log(r, inner, outer, n_log);
  const auto& gl = gauss_legendre(n_tail);
  for (int i = 0; i < n_tail; ++i) {
    const double u = 0.5 * (gl.nodes[i] + 1.0);
    r.add(outer / u, 0.5 * gl.weights[i] * outer / (u * u));
  }
  return r;
}

Rule1D radial_rule_finite(double inner, double r_max, int n_inner, int n_log) {
  Rule1D r;
  if (r_max <= inner) {
    append_inner(r, r_max, n_inner);
    return r;
  }
  append_inner(r, inner, n_inner);
  append_log(r, inner, r_max, n_log);
  return r;
}

}  // namespace nsasym
