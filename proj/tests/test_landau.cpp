#include "doctest.h"

#include "nsasym/landau.hpp"

#include <cmath>
#include <random>

using namespace nsasym;

namespace {

// Line integral of grad p = Delta U - (U.grad)U along a
// polyline, using the analytic gradient and an FD Laplacian.
double line_integral(const LandauSolution& sol, const std::vector<Vec3>& path) {
  const auto u = sol.velocity_field(true);
  const auto& gl = gauss_legendre(24);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < path.size(); ++s) {
    const Vec3 a = path[s], d = path[s + 1] - path[s];
    const int panels = 16;
    for (int p = 0; p < panels; ++p) {
      for (int i = 0; i < 24; ++i) {
        const double tau = (p + 0.5 * (gl.nodes[i] + 1.0)) / panels;
        const Vec3 x = a + tau * d;
        const Vec3 U = sol.velocity(x);
        const Mat3 G = sol.velocity_gradient(x);
        // Richardson-extrapolated Laplacian, O(h^4).
        const double h = 2e-3 * x.norm();
        const FieldValue lap = (4.0 * fd_laplacian(u, 0.0, x, 0.5 * h) - fd_laplacian(u, 0.0, x, h)) / 3.0;
        const Vec3 gp = Vec3(lap[0], lap[1], lap[2]) - G * U;
        total += 0.5 * gl.weights[i] / panels * gp.dot(d);
      }
    }
  }
  return total;
}

}  // namespace

TEST_SUITE("landau") {

TEST_CASE("b_of_A examples") {
  // 30-digit evaluation of the closed form.
  CHECK(std::abs(b_of_A(2.0) - 34.7668403187857356) < 1e-6);
  CHECK(b_of_A(2.0) == doctest::Approx(34.7668403187857356).epsilon(1e-13));
  CHECK(b_of_A(1.5) == doctest::Approx(64.8114258200402164).epsilon(1e-13));
  CHECK(b_of_A(3.0) == doctest::Approx(19.1429900991690680).epsilon(1e-13));
  CHECK(b_of_A(1.0001) == doctest::Approx(334921.288385396246).epsilon(1e-10));
  // Asymptote 16 pi / A.
  CHECK(std::abs(b_of_A(1000.0) - 16.0 * kPi / 1000.0) / (16.0 * kPi / 1000.0) < 0.01);
  CHECK(b_of_A(1000.0) == doctest::Approx(0.0502655394250433168).epsilon(1e-13));
  CHECK(b_of_A(1.5) > b_of_A(2.0));
  CHECK(b_of_A(2.0) > b_of_A(3.0));
  CHECK_THROWS_AS(b_of_A(1.0), DomainError);
  CHECK_THROWS_AS(b_of_A(0.5), DomainError);
}

TEST_CASE("series branch and closed form agree at the switch point") {
  const double a = 3.999999, b = 4.000001;
  CHECK(b_of_A(a) == doctest::Approx(b_of_A(b)).epsilon(1e-6));
  CHECK(db_dA(a) == doctest::Approx(db_dA(b)).epsilon(1e-5));
}

TEST_CASE("db_dA matches a centered difference") {
  for (double A : {1.01, 1.3, 2.0, 3.5, 5.0, 40.0}) {
    const double h = 1e-6 * A;
    const double fd = (b_of_A(A + h) - b_of_A(A - h)) / (2 * h);
    CHECK(db_dA(A) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("a_of_b examples") {
  CHECK(std::abs(a_of_b(b_of_A(2.0), 1e-12) - 2.0) < 1e-10);
  CHECK(std::isinf(a_of_b(0.0)));
  CHECK(std::abs(a_of_b(b_of_A(1.0001), 1e-12) - 1.0001) < 1e-8);
  CHECK_THROWS_AS(a_of_b(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(a_of_b(-1.0), DomainError);
}

TEST_CASE("inversion round trip") {
  for (double A : {1.01, 1.1, 2.0, 5.0, 10.0, 100.0}) {
    CHECK(std::abs(a_of_b(b_of_A(A)) - A) / A < 1e-8);
  }
}

TEST_CASE("b_of_A is strictly decreasing on a log sample") {
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 50; ++i) {
    const double A = 1.0 + 0.001 * std::pow(1e4 / 0.001, i / 49.0);
    const double b = b_of_A(A);
    CHECK(b < prev);
    prev = b;
  }
}

TEST_CASE("velocity examples") {
  const auto zero = LandauSolution(Vec3::Zero());
  CHECK(zero.is_zero());
  CHECK(zero.velocity(Vec3(1, 2, 3)).norm() == 0.0);
  CHECK_THROWS_AS(zero.axis(), DomainError);

  for (double A : {1.05, 2.0, 7.0}) {
    const auto sol = LandauSolution::from_A(A, Vec3(0.3, -0.2, 1.0));
    const Vec3 x(1, 2, 3);
    CHECK((sol.velocity(2.0 * x) - 0.5 * sol.velocity(x)).norm() < 1e-14 * sol.velocity(x).norm());
  }

  const auto sol = LandauSolution::from_A(2.0, Vec3::UnitZ());
  Mat3 rot;
  rot << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  for (const Vec3& x : {Vec3(1, 0.5, 0.2), Vec3(-0.3, 2, -1), Vec3(0.1, 0.1, 4)}) {
    const Vec3 lhs = sol.velocity(rot * x);
    const Vec3 rhs = rot * sol.velocity(x);
    CHECK((lhs - rhs).norm() < 1e-14 * rhs.norm());
  }
  CHECK_THROWS_AS(sol.velocity(Vec3::Zero()), EvaluationError);
}

TEST_CASE("spherical components reproduce the Cartesian velocity") {
  const auto sol = LandauSolution::from_A(1.6, Vec3::UnitZ());
  const Vec3 x(0.4, -0.7, 0.9);
  const auto [ur, uphi] = sol.spherical_velocity(x);
  const double r = x.norm(), c = x[2] / r, s = std::sqrt(1 - c * c);
  const Vec3 er = x / r;
  const Vec3 ephi = (c * er - Vec3::UnitZ()) / s;
  CHECK((ur * er + uphi * ephi - sol.velocity(x)).norm() < 1e-14);
}

TEST_CASE("pressure examples") {
  const auto sol = LandauSolution::from_A(2.0, Vec3::UnitZ());
  const Vec3 x(1.0, 0.5, -0.3);
  const auto u = sol.velocity_field(false);
  const double h = 1e-3;
  const FieldValue lap = fd_laplacian(u, 0.0, x, h);
  const Vec3 rhs = Vec3(lap[0], lap[1], lap[2]) - sol.velocity_gradient(x) * sol.velocity(x);
  const FieldGradient gp = fd_gradient(sol.pressure_field(), 0.0, x, 1e-5);
  CHECK((gp.row(0).transpose() - rhs).norm() / rhs.norm() < 1e-5);

  CHECK(std::abs(sol.pressure(2.0 * x) - sol.pressure(x) / 4.0) < 1e-12 * std::abs(sol.pressure(x)));
  CHECK(std::abs(sol.pressure(Vec3(1e6, 3e5, 0))) < 1e-10);
  CHECK_THROWS_AS(sol.pressure(Vec3::Zero()), EvaluationError);
}

TEST_CASE("pressure gradient is path independent") {
  const auto sol = LandauSolution::from_A(2.0, Vec3::UnitZ());
  const Vec3 x0(5, 0, 0), x(1.0, 0.5, -0.3);
  const double path1 = line_integral(sol, {x0, Vec3(5, 0.5, 0), Vec3(1.0, 0.5, -0.3)});
  const double path2 = line_integral(sol, {x0, Vec3(3, -2, 2), Vec3(1, 1, 1), x});
  CHECK(std::abs(path1 - path2) < 1e-8);
  // The closed form reproduces the same increment.
  CHECK(std::abs(path1 - (sol.pressure(x) - sol.pressure(x0))) < 1e-8);
}

TEST_CASE("analytic gradient matches central differences") {
  const auto sol = LandauSolution::from_A(1.3, Vec3(1, 1, 0));
  const auto u = sol.velocity_field(false);
  for (const Vec3& x : {Vec3(2, 0, 0), Vec3(-0.5, 0.4, 0.3), Vec3(0.7, 0.7, 0.01)}) {
    const FieldGradient fd = fd_gradient(u, 0.0, x, 1e-5 * x.norm());
    const Mat3 ex = sol.velocity_gradient(x);
    CHECK((fd - ex).norm() / ex.norm() < 1e-8);
  }
}

TEST_CASE("landau residual examples") {
  const auto sol = LandauSolution::from_A(2.0, Vec3::UnitZ());
  RadialSphericalGrid g(GridSpec{0.5, 50.0, 32, 16, 32});
  const auto res = landau_residual(sol, g);
  CHECK(res.momentum < 1e-4);
  CHECK(res.divergence < 1e-4);

  const auto zero = landau_residual(LandauSolution(Vec3::Zero()), g);
  CHECK(zero.momentum == 0.0);
  CHECK(zero.divergence == 0.0);

  // Truncation-dominated regime: halving h divides the residual by ~4.
  RadialSphericalGrid small(GridSpec{0.5, 50.0, 8, 8, 8});
  const auto r1 = landau_residual(sol, small, 2e-2);
  const auto r2 = landau_residual(sol, small, 1e-2);
  CHECK(r1.momentum / r2.momentum > 3.5);
  CHECK(r1.momentum / r2.momentum < 4.5);
}

TEST_CASE("velocity is divergence free at random points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> logr(std::log(0.5), std::log(50.0));
  const auto sol = LandauSolution::from_A(2.0, Vec3(0.1, 0.2, 1.0));
  const auto u = sol.velocity_field(false);
  for (int i = 0; i < 100; ++i) {
    Vec3 d(unif(rng), unif(rng), unif(rng));
    const double r = std::exp(logr(rng));
    const Vec3 x = r * d.normalized();
    CHECK(std::abs(fd_divergence(u, 0.0, x, default_fd_step(x))) < 1e-5 / (r * r));
  }
}

TEST_CASE("X1 norm shrinks with |b|") {
  RadialSphericalGrid g(GridSpec{0.1, 100.0, 24, 12, 8});
  double prev = 0.0;
  for (double mb : {1e-3, 1e-2, 1e-1}) {
    const auto sol = LandauSolution(mb * Vec3::UnitZ());
    const double v = xk_norm(sol.velocity_field(), 1.0, g);
    CHECK(std::isfinite(v));
    CHECK(v > prev);
    prev = v;
  }
}

}  // TEST_SUITE
