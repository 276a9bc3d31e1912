#include "doctest.h"

#include "nsasym/flux.hpp"
#include "nsasym/landau.hpp"

#include <cmath>

using namespace nsasym;

namespace {

const FieldHandle kNoF = FieldHandle::zero(Arity::tensor3x3);

/// Radial bump beta(s) = ((s-a)(b-s))^6 on [a, b], scaled to unit mass.
struct Bump {
  double a, b, scale;
  Bump(double a_, double b_) : a(a_), b(b_), scale(1.0) { scale = 1.0 / mass(b); }
  double density(double s) const {
    if (s <= a || s >= b) return 0.0;
    return scale * std::pow((s - a) * (b - s), 6);
  }
  /// 4 pi int_a^r s^2 density(s) ds, exact by 10-point Gauss–Legendre.
  double mass(double r) const {
    if (r <= a) return 0.0;
    const double hi = std::min(r, b);
    const auto& gl = gauss_legendre(10);
    double m = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double s = a + 0.5 * (hi - a) * (gl.nodes[i] + 1.0);
      m += 0.5 * (hi - a) * gl.weights[i] * 4.0 * kPi * s * s * scale * std::pow((s - a) * (b - s), 6);
    }
    return m;
  }
};

}  // namespace

TEST_SUITE("flux") {

TEST_CASE("momentum_flux_tensor examples") {
  const auto z = FieldHandle::zero(Arity::vector3);
  const auto zp = FieldHandle::zero(Arity::scalar);
  CHECK(momentum_flux_tensor(z, zp, kNoF, 0.0, Vec3(1, 2, 3)).norm() == 0.0);

  const auto sol = LandauSolution::from_A(2.0, Vec3::UnitZ());
  const Mat3 T = momentum_flux_tensor(sol.velocity_field(false), sol.pressure_field(), kNoF, 0.0, Vec3(1, 2, -1));
  CHECK((T - T.transpose()).norm() < 1e-6);

  // Regression values at x = (2,0,0), A = 2, analytic gradient path.
  const Vec3 x(2, 0, 0);
  const Mat3 an = momentum_flux_tensor(sol.velocity_field(true), sol.pressure_field(), kNoF, 0.0, x);
  CHECK(an(0, 0) == doctest::Approx(-0.4375).epsilon(1e-14));
  CHECK(std::abs(an(1, 1)) < 1e-15);
  CHECK(std::abs(an(2, 2)) < 1e-15);
  CHECK(std::abs(an(0, 2)) < 1e-15);
  // Independent evaluation from the FD gradient.
  const Mat3 fd = momentum_flux_tensor(sol.velocity_field(false), sol.pressure_field(), kNoF, 0.0, x);
  CHECK((an - fd).norm() < 1e-8);
}

TEST_CASE("Landau flux equals b") {
  const auto sol = LandauSolution::from_A(2.0, Vec3::UnitZ());
  FluxConfig cfg;
  for (double rho : {2.0, 4.0, 8.0}) {
    const Vec3 I = flux_integral(sol.velocity_field(), sol.pressure_field(), kNoF, rho, cfg);
    CHECK((I - sol.b()).norm() / sol.b().norm() < 1e-3);
  }
  const auto ex = extract_b(sol.velocity_field(), sol.pressure_field(), kNoF, cfg);
  CHECK((ex.b - sol.b()).norm() / sol.b().norm() < 1e-3);
  CHECK(ex.spread < 1e-3 * sol.b().norm());
  CHECK(ex.converged);
  CHECK(ex.averaged.size() == 3);
  CHECK(ex.per_time.size() == 3);

  // Same with the FD gradient path.
  const auto fd = extract_b(sol.velocity_field(false), sol.pressure_field(), kNoF, cfg);
  CHECK((fd.b - sol.b()).norm() / sol.b().norm() < 1e-6);
}

TEST_CASE("flux of zero fields vanishes") {
  FluxConfig cfg;
  const auto z = FieldHandle::zero(Arity::vector3);
  const auto zp = FieldHandle::zero(Arity::scalar);
  CHECK(flux_integral(z, zp, kNoF, 3.0, cfg).norm() == 0.0);
  CHECK(extract_b(z, zp, kNoF, cfg).b.norm() == 0.0);
  CHECK(consistency_check(z, zp, kNoF, FieldHandle::zero(Arity::vector3), 1.0, 2.0, cfg) == 0.0);
}

TEST_CASE("faster-decaying perturbation leaves b unchanged") {
  const auto sol = LandauSolution::from_A(2.0, Vec3::UnitZ());
  auto u = FieldHandle::vector([sol](const Vec3& x) {
    const double r = x.norm();
    return Vec3(sol.velocity(x) + 1e-3 * Vec3(-x[1], x[0], 0.0) / (r * r * r));
  });
  FluxConfig cfg;
  const auto ex = extract_b(u, sol.pressure_field(), kNoF, cfg);
  CHECK((ex.b - sol.b()).norm() / sol.b().norm() < 2e-3);

  // Oracle: the perturbation's own flux at rho = 16 by direct quadrature.
  cfg.radii = {16.0};
  const Vec3 I16 = flux_integral(u, sol.pressure_field(), kNoF, 16.0, cfg);
  CHECK((I16 - sol.b()).norm() / sol.b().norm() < 2e-3);
}

TEST_CASE("rotation equivariance") {
  const auto sol = LandauSolution::from_A(2.0, Vec3::UnitZ());
  const Mat3 Q = Eigen::AngleAxisd(kPi / 2, Vec3::UnitX()).toRotationMatrix();
  auto u = FieldHandle::vector([sol, Q](const Vec3& x) { return Vec3(Q * sol.velocity(Q.transpose() * x)); });
  auto p = FieldHandle::scalar([sol, Q](const Vec3& x) { return sol.pressure(Q.transpose() * x); });
  FluxConfig cfg;
  const auto ex = extract_b(u, p, kNoF, cfg);
  CHECK((ex.b - Q * sol.b()).norm() / sol.b().norm() < 1e-6);
}

TEST_CASE("flux is linear in F") {
  const auto sol = LandauSolution::from_A(3.0, Vec3(1, 0, 1));
  auto F = FieldHandle::tensor([](const Vec3& x) {
    Mat3 m;
    m << x[0], x[1] * x[1], 1.0, 0.0, std::sin(x[2]), x[0] * x[1], 2.0, 0.0, x.norm();
    return m;
  });
  FluxConfig cfg;
  const double rho = 3.0;
  const Vec3 base = flux_integral(sol.velocity_field(), sol.pressure_field(), kNoF, rho, cfg);
  const Vec3 with = flux_integral(sol.velocity_field(), sol.pressure_field(), F, rho, cfg);
  const SphereRule rule(cfg.n_theta, cfg.n_phi);
  Vec3 fn = Vec3::Zero();
  for (const auto& n : rule.nodes()) fn += n.weight * F.tensor_at(0.0, rho * n.direction).transpose() * n.direction;
  fn *= rho * rho;
  CHECK((with - base + fn).norm() < 1e-10);
}

TEST_CASE("time averaging is idempotent for steady fields") {
  const auto sol = LandauSolution::from_A(2.0, Vec3::UnitZ());
  FluxConfig one, many;
  many.time_nodes = 16;
  const Vec3 a = flux_integral(sol.velocity_field(), sol.pressure_field(), kNoF, 4.0, one);
  const Vec3 b = flux_integral(sol.velocity_field(), sol.pressure_field(), kNoF, 4.0, many);
  CHECK((a - b).norm() < 1e-12);
}

TEST_CASE("trapezoidal time average is exact for trigonometric dependence") {
  auto u = FieldHandle::zero(Arity::vector3, FieldDomain::space_time);
  auto p = FieldHandle::scalar_st([](double t, const Vec3&) { return 1.0 + std::sin(2 * kPi * t); });
  FluxConfig cfg;
  cfg.time_nodes = 4;
  // p n integrates to 0 over a sphere; the averaged signal comes from F.
  auto Fz = FieldHandle::tensor_st([](double t, const Vec3& x) {
    return Mat3((1.0 + std::cos(2 * kPi * t)) * x[2] / x.norm() * Mat3::Identity());
  });
  const Vec3 I = flux_integral(u, p, Fz, 2.0, cfg);
  // -(1/T) int int x3/|x| n_3 dS = -(4 pi rho^2)/3.
  CHECK(std::abs(I[2] + 16.0 * kPi / 3.0) < 1e-10);
}

TEST_CASE("consistency_check examples") {
  const auto sol = LandauSolution::from_A(2.0, Vec3::UnitZ());
  FluxConfig cfg;
  const auto f0zero = FieldHandle::zero(Arity::vector3);
  CHECK(consistency_check(sol.velocity_field(), sol.pressure_field(), kNoF, f0zero, 2.0, 8.0, cfg) <
        1e-3 * sol.b().norm());

  // Manufactured source: f0 = m beta(|x|) e3 in the annulus, balanced by
  // F_i3 = -(m/4pi) x_i M(|x|)/|x|^3 so that d_i T_ij = f0_j holds exactly.
  const double m = 2.5;
  const Bump bump(3.0, 5.0);
  auto f0 = FieldHandle::vector([=](const Vec3& x) { return Vec3(0, 0, m * bump.density(x.norm())); });
  auto F = FieldHandle::tensor([=](const Vec3& x) {
    const double r = x.norm();
    Mat3 out = Mat3::Zero();
    out.col(2) = -(m / (4 * kPi)) * bump.mass(r) * x / (r * r * r);
    return out;
  });
  const double defect =
      consistency_check(sol.velocity_field(), sol.pressure_field(), F, f0, 2.0, 8.0, cfg, 48);
  CHECK(defect < 1e-4);
  // Without F the source is unbalanced by exactly m.
  const double unbalanced =
      consistency_check(sol.velocity_field(), sol.pressure_field(), kNoF, f0, 2.0, 8.0, cfg, 48);
  CHECK(std::abs(unbalanced - m) < 1e-4);
}

TEST_CASE("flux config validation") {
  FluxConfig c;
  c.radii = {1.0, 1.0};
  CHECK_THROWS_AS(c.validate(), DomainError);
  c.radii = {-1.0};
  CHECK_THROWS_AS(c.validate(), DomainError);
  c.radii = {1.0};
  c.time_nodes = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

}  // TEST_SUITE
