#include "doctest.h"

#include "nsasym/oseen.hpp"
#include "nsasym/potentials.hpp"

#include <cmath>

using namespace nsasym;

namespace {

double bump(const Vec3& y) {
  const double r2 = y.squaredNorm();
  return r2 >= 1.0 ? 0.0 : std::pow(1.0 - r2, 4);
}

/// int (1 - |y|^2)^4 dy over the unit ball.
const double kBumpMass = 2.0 * kPi * std::tgamma(1.5) * std::tgamma(5.0) / std::tgamma(6.5);

FieldHandle steady_G(const Vec3& shift = Vec3::Zero()) {
  return FieldHandle::tensor_st([shift](double, const Vec3& y) {
    Mat3 E = Mat3::Zero();
    E(0, 1) = 1.0;
    return Mat3(std::pow(1.0 + (y - shift).squaredNorm(), -1.25) * E);
  });
}

Envelope steady_G_envelope() {
  return [](double, const Vec3& y) { return std::pow(1.0 + y.squaredNorm(), -1.25); };
}

PotentialQuadratureSpec periodic_spec() {
  PotentialQuadratureSpec s;
  s.t_max_factor = 4.0;
  s.time_resolution = 0.125;
  s.time_order = 4;
  return s;
}

}  // namespace

TEST_SUITE("potentials") {

TEST_CASE("zero data gives zero") {
  PotentialQuadratureSpec spec;
  const auto G = FieldHandle::zero(Arity::tensor3x3, FieldDomain::space_time);
  const auto g = FieldHandle::zero(Arity::vector3, FieldDomain::space_time);
  CHECK(theta_apply(G, 1.0, Vec3(1, 2, 3), spec).value.norm() == 0.0);
  CHECK(lambda_apply(g, 1.0, Vec3(1, 2, 3), spec).value.norm() == 0.0);
}

TEST_CASE("time rule") {
  PotentialQuadratureSpec spec;
  const Rule1D r = spec.time_rule(200.0, 2.0, 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(r.x[i] > 0.0);
    if (i > 0) CHECK(r.x[i] > r.x[i - 1]);
    sum += r.w[i];
  }
  CHECK(sum == doctest::Approx(200.0).epsilon(1e-12));
  spec.finite_horizon = true;
  const Rule1D f = spec.time_rule(3.0, 2.0, 3.0);
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m += f.w[i] / std::sqrt(3.0 - f.x[i]);
  CHECK(m == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-8));
  spec.time_order = 2;
  CHECK_THROWS_AS(spec.validate(), DomainError);
}

TEST_CASE("time tails of the kernel") {
  // int_T^inf S ds against direct quadrature of the truncated range plus the tail.
  const Vec3 w(0.7, -0.4, 1.1);
  const Mat3 a = oseen_time_tail(2.0, w);
  const Mat3 b = oseen_time_tail(8.0, w);
  Mat3 mid = Mat3::Zero();
  const auto& gl = gauss_legendre(32);
  for (int i = 0; i < 32; ++i) {
    const double s = 5.0 + 3.0 * gl.nodes[i];
    mid += 3.0 * gl.weights[i] * oseen_closed_form(s, w);
  }
  CHECK((a - b - mid).norm() < 1e-10 * a.norm());
  const auto ga = oseen_gradient_time_tail(2.0, w);
  const auto gb = oseen_gradient_time_tail(8.0, w);
  const OseenTensor S;
  std::array<Mat3, 3> gmid{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  for (int i = 0; i < 32; ++i) {
    const auto g = S.gradient(5.0 + 3.0 * gl.nodes[i], w);
    for (int k = 0; k < 3; ++k) gmid[k] += 3.0 * gl.weights[i] * g[k];
  }
  for (int k = 0; k < 3; ++k) CHECK((ga[k] - gb[k] - gmid[k]).norm() < 1e-10 * ga[k].norm());
  // Far from the origin the full time integral is the Stokeslet (delta/r + w w^T/r^3)/(8 pi).
  const Vec3 far(40.0, 10.0, -20.0);
  const double r = far.norm();
  const Mat3 stokeslet = (Mat3::Identity() / r + far * far.transpose() / (r * r * r)) / (8.0 * kPi);
  CHECK((oseen_time_tail(1e-6, far) - stokeslet).norm() < 1e-8 * stokeslet.norm());
}

TEST_CASE("theta decay with alpha = 1.5") {
  PotentialQuadratureSpec spec;
  const auto G = steady_G();
  double cmax = 0.0, cmin = 1e300;
  for (double r : {0.5, 2.0, 10.0, 50.0}) {
    const Vec3 x = r * Vec3(1.0, 0.3, 0.2).normalized();
    const auto res = theta_apply(G, 1.0, x, spec, steady_G_envelope());
    CHECK(res.error_estimate() < 1e-2 * res.value.norm());
    const double c = res.value.norm() * std::pow(1.0 + r * r, 0.75);
    cmax = std::max(cmax, c);
    cmin = std::min(cmin, c);
  }
  CHECK(cmax < 1.0);
  CHECK(cmin > 0.01);
}

TEST_CASE("theta is translation equivariant and linear") {
  PotentialQuadratureSpec spec;
  spec.estimate_error = false;
  const Vec3 shift(0.5, -0.25, 0.75);
  for (const Vec3& x : {Vec3(1.0, 0.0, 0.0), Vec3(0.3, 2.0, -1.0), Vec3(-4.0, 1.0, 2.0)}) {
    const Vec3 a = theta_apply(steady_G(shift), 1.0, x + shift, spec).value;
    const Vec3 b = theta_apply(steady_G(), 1.0, x, spec).value;
    CHECK((a - b).norm() < 1e-4 * b.norm());
  }
  auto G2 = FieldHandle::tensor_st([](double t, const Vec3& y) {
    return Mat3(std::cos(t) * std::pow(1.0 + y.squaredNorm(), -1.5) * Mat3::Identity());
  });
  auto sum = FieldHandle::tensor_st([G2](double t, const Vec3& y) {
    return Mat3(steady_G().tensor_at(t, y) + 2.0 * G2.tensor_at(t, y));
  });
  const Vec3 x(1.0, 2.0, 0.5);
  const Vec3 lhs = theta_apply(sum, 1.0, x, spec).value;
  const Vec3 rhs = theta_apply(steady_G(), 1.0, x, spec).value + 2.0 * theta_apply(G2, 1.0, x, spec).value;
  CHECK((lhs - rhs).norm() < 1e-10 * rhs.norm());
}

TEST_CASE("envelope contract") {
  PotentialQuadratureSpec spec;
  spec.estimate_error = false;
  Envelope tight = [](double, const Vec3& y) { return 0.5 * std::pow(1.0 + y.squaredNorm(), -1.25); };
  CHECK_THROWS_AS(theta_apply(steady_G(), 1.0, Vec3(1, 0, 0), spec, tight), ContractError);
  const auto g = FieldHandle::zero(Arity::vector3, FieldDomain::space_time);
  CHECK_THROWS_AS(theta_apply(g, 1.0, Vec3(1, 0, 0), spec), DomainError);
}

TEST_CASE("lambda of a compact steady source decays like a Stokeslet") {
  PotentialQuadratureSpec spec;
  auto g = FieldHandle::vector_st([](double, const Vec3& y) { return Vec3(bump(y), 0.0, 0.0); });
  for (double r : {2.0, 10.0, 50.0}) {
    const auto res = lambda_apply(g, 1.0, Vec3(0.0, 0.6 * r, 0.8 * r), spec);
    const double c = res.value.norm() * r;
    CHECK(c < 0.05);
    if (r == 50.0) CHECK(c == doctest::Approx(kBumpMass / (8.0 * kPi)).epsilon(1e-3));
  }
}

TEST_CASE("periodic source: mean zero improves decay") {
  const auto spec = periodic_spec();
  auto zero_mean = FieldHandle::vector_st(
      [](double t, const Vec3& y) { return Vec3(std::sin(2 * kPi * t) * bump(y), 0.0, 0.0); });
  auto with_mean = FieldHandle::vector_st(
      [](double t, const Vec3& y) { return Vec3((1.0 + std::sin(2 * kPi * t)) * bump(y), 0.0, 0.0); });
  double z2 = 0.0, z50 = 0.0, m2 = 0.0, m50 = 0.0;
  for (double r : {2.0, 50.0}) {
    const Vec3 x(0.0, 0.6 * r, 0.8 * r);
    const double a = lambda_apply(zero_mean, 1.3, x, spec).value.norm() * r * r;
    const double b = lambda_apply(with_mean, 1.3, x, spec).value.norm() * r * r;
    (r == 2.0 ? z2 : z50) = a;
    (r == 2.0 ? m2 : m50) = b;
  }
  CHECK(z50 <= z2);
  CHECK(m50 > 3.0 * m2);
}

TEST_CASE("periodic tail is independent of the truncation time") {
  auto g = FieldHandle::vector_st(
      [](double t, const Vec3& y) { return Vec3(std::sin(2 * kPi * t) * bump(y), 0.0, 0.0); });
  auto a = periodic_spec();
  auto b = periodic_spec();
  b.t_max_factor = 2.0;
  const Vec3 x(0.0, 1.2, 1.6);
  const auto ra = lambda_apply(g, 1.3, x, a);
  const auto rb = lambda_apply(g, 1.3, x, b);
  CHECK((ra.value - rb.value).norm() < 2.0 * (ra.error_estimate() + rb.error_estimate()));
}

TEST_CASE("doubling the orders stays within the error estimate") {
  PotentialQuadratureSpec spec;
  const Vec3 x(2.0, 1.0, -1.0);
  const auto base = theta_apply(steady_G(), 1.0, x, spec);
  auto fine = spec.doubled();
  fine.estimate_error = false;
  const auto dbl = theta_apply(steady_G(), 1.0, x, fine);
  CHECK((base.value - dbl.value).norm() < 10.0 * base.error_estimate());
}

TEST_CASE("int_est examples") {
  // lambda = 0, b = c = 0, mu = 1: J = 4 pi int r^2 (1 + r)^{-4} dr = 4 pi / 3.
  const IntEstParams p0(0.0, 0.0, 1.0, 0.0, 1.0);
  CHECK(int_est_integral(p0, Vec3(0.3, 0.1, 0.0)) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-8));
  CHECK_THROWS_AS(IntEstParams(2.0, 1.0, 1.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(IntEstParams(1.0, 0.0, 0.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(int_est_ratio(IntEstParams(1.0, 0.0, 1.0, 0.0, 1.0), {Vec3::Zero()}), DomainError);
}

TEST_CASE("int_est two-sided bounds") {
  std::vector<Vec3> xs;
  for (int i = 0; i < 30; ++i) {
    const double r = std::pow(10.0, -2.0 + 4.0 * i / 29.0);
    xs.push_back(r * Vec3(1.0, 2.0, 2.0) / 3.0);
  }
  const double eta = 0.25;
  for (const auto& bc : {std::pair{1.0, 0.0}, std::pair{2.0, 0.0}, std::pair{0.0, 1.0 + eta}, std::pair{0.0, 2.0 + eta}}) {
    for (double lambda : {0.0, 1.0}) {
      const auto res = int_est_ratio(IntEstParams(bc.first, bc.second, 1.0, lambda, 1.0), xs);
      CAPTURE(bc.first);
      CAPTURE(bc.second);
      CAPTURE(lambda);
      CHECK(res.ratio_min > 0.01);
      CHECK(res.ratio_max < 100.0);
      CHECK(res.ratios.size() == 30);
    }
  }
}

TEST_CASE("int_est scaling reduction") {
  std::vector<Vec3> xs, half;
  for (double r : {0.05, 0.7, 3.0, 40.0}) {
    xs.push_back(r * Vec3(0.0, 0.6, 0.8));
    half.push_back(xs.back() / 2.0);
  }
  for (const auto& bc : {std::pair{1.0, 0.0}, std::pair{0.0, 1.25}}) {
    const auto a = int_est_ratio(IntEstParams(bc.first, bc.second, 1.0, 2.0, 4.0), xs);
    const auto b = int_est_ratio(IntEstParams(bc.first, bc.second, 1.0, 1.0, 1.0), half);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(a.ratios[i] == doctest::Approx(b.ratios[i]).epsilon(1e-6));
  }
}

}  // TEST_SUITE
