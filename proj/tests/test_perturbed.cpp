#include "doctest.h"

#include "nsasym/oseen.hpp"
#include "nsasym/perturbed.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <random>

using namespace nsasym;

namespace {

/// e^{t Delta} log|x| at radius r, from the radial heat kernel.
double heat_of_log(double t, double r) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto f = [&](double p) {
    return p * std::log(p) * (std::exp(-(r - p) * (r - p) / (4.0 * t)) - std::exp(-(r + p) * (r + p) / (4.0 * t)));
  };
  const double hi = r + 40.0 * std::sqrt(t);
  const double v = GK::integrate(f, 0.0, r, 15, 1e-14) + GK::integrate(f, r, hi, 15, 1e-14);
  return v / (r * std::sqrt(4.0 * kPi * t));
}

PicardGrid small_grid(TimeMode mode) {
  PicardGrid g;
  g.mode = mode;
  g.rho_min = 0.125;
  g.rho_max = 8.0;
  g.n_rho = 7;
  g.n_theta = 5;
  g.n_t = mode == TimeMode::discrete_self_similar ? 3 : 1;
  return g;
}

std::vector<Vec3> probe_points(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<Vec3> pts;
  while (static_cast<int>(pts.size()) < n) {
    const Vec3 v(U(rng), U(rng), U(rng));
    if (v.norm() < 1.0 && v.norm() > 0.1) pts.push_back(v.normalized() * std::exp(std::log(4.0) * U(rng)));
  }
  return pts;
}

}  // namespace

TEST_SUITE("perturbed") {

TEST_CASE("problem certificates") {
  const PerturbedProblem p = ss_problem(1e-2, 0.25);
  CHECK(p.U_norm() <= 1e-2 * (1.0 + 1e-9));
  CHECK(p.U_norm() > 0.9e-2);
  CHECK(p.w0_norm() <= 1e-2 * (1.0 + 1e-9));
  CHECK(p.div_defect() < 1e-10);
  CHECK(p.has_gradient_certificate());
  // The Landau maximum sits on the axis.
  const FieldHandle U = landau_perturbation(1e-2);
  CHECK(std::abs(3.0 * U.vector_at(0.0, Vec3(0.0, 0.0, 3.0)).norm() - 1e-2) < 1e-14);

  const FieldHandle big = swirl_data(2e-2);
  CHECK_THROWS_AS(PerturbedProblem(U, U, big, 0.25, 1e-2), ContractError);
  const FieldHandle not_div_free =
      FieldHandle::vector([](const Vec3& x) { return Vec3(1e-3 * x / x.squaredNorm()); });
  CHECK_THROWS_AS(PerturbedProblem(U, U, not_div_free, 0.25, 1e-2), ContractError);
  CHECK_THROWS_AS(ss_problem(1e-2, 0.0), DomainError);
  CHECK_THROWS_AS(ss_problem(1e-2, 1.0), DomainError);
}

TEST_CASE("linear part") {
  const PerturbedProblem zero = zero_problem(0.25);
  CHECK(linear_part(zero, 1.0, Vec3(0.3, 0.1, 0.2)).norm() == 0.0);

  const double eps = 1e-2;
  const PerturbedProblem p = ss_problem(eps, 0.25);
  SUBCASE("radial heat-kernel oracle") {
    for (double r : {0.3, 1.0, 3.0}) {
      const Vec3 x = r * Vec3(0.48, 0.6, 0.64);
      const double h = 1e-5 * r;
      const double g = (heat_of_log(1.0, r + h) - heat_of_log(1.0, r - h)) / (2.0 * h);
      const Vec3 expected = eps * Vec3::UnitZ().cross(x) * g / r;
      CHECK((linear_part(p, 1.0, x) - expected).norm() < 1e-6 * expected.norm());
    }
  }
  SUBCASE("decay bound") {
    double C = 0.0;
    for (double t : {1e-2, 1e-1, 1.0, 10.0})
      for (double r : {0.05, 0.5, 5.0, 50.0}) {
        const Vec3 x = r * Vec3(0.6, 0.0, 0.8);
        C = std::max(C, linear_part(p, t, x).norm() * (r + std::sqrt(t)) / eps);
      }
    MESSAGE("linear-part constant C = " << C);
    CHECK(C > 0.1);
    CHECK(C < 2.0);
  }
  SUBCASE("divergence free") {
    const FieldHandle wL =
        FieldHandle::vector_st([&](double t, const Vec3& x) { return linear_part(p, t, x); });
    for (double r : {0.2, 1.0, 4.0}) {
      const Vec3 x = r * Vec3(0.3, -0.5, 0.81).normalized();
      CHECK(std::abs(fd_divergence(wL, 0.5, x, 1e-4 * r)) < 1e-5);
    }
  }
}

TEST_CASE("grid field") {
  PicardGrid g = small_grid(TimeMode::general);
  g.n_t = 2;
  g.t_min = 0.5;
  g.t_max = 2.0;
  const Vec3 axis = Vec3(0.2, 0.1, 1.0).normalized();
  const GridField shape(g, 0.25, axis, {});
  std::vector<Vec3> V(g.size());
  for (std::size_t i = 0; i < V.size(); ++i) {
    V[i] = Vec3(std::sin(0.3 * i), std::cos(0.7 * i), 0.1 * i);
    // Axisymmetric fields are axial on the axis.
    const std::size_t ith = i % static_cast<std::size_t>(g.n_theta);
    if (ith == 0 || ith + 1 == static_cast<std::size_t>(g.n_theta)) V[i].head<2>().setZero();
  }
  const GridField f(g, 0.25, axis, V);
  const Mat3 E = frame_with_pole(axis);
  for (std::size_t i = 0; i < V.size(); i += 5) {
    const auto [t, x] = f.node(i);
    const Vec3 expected = E * V[i] / y1_weight(t, x, 0.25);
    CHECK((f(t, x) - expected).norm() < 1e-12 * expected.norm() + 1e-300);
  }
  double m = 0.0;
  for (const Vec3& v : V) m = std::max(m, v.norm());
  CHECK(f.y1_norm() == doctest::Approx(m));
  // Axisymmetric equivariance: f(R x) = R f(x) for rotations about the axis.
  const Eigen::AngleAxisd R(0.9, axis);
  const Vec3 x(0.4, -0.3, 0.5);
  CHECK((f(0.7, R * x) - R * f(0.7, x)).norm() < 1e-12 * f(0.7, x).norm());
  // Interpolated values obey the Y_1 certificate.
  for (const Vec3& y : probe_points(3, 50)) CHECK(f(0.8, y).norm() * y1_weight(0.8, y, 0.25) <= m * (1.0 + 1e-12));
  CHECK(f(1.0, Vec3::Zero()).norm() == 0.0);
  CHECK_THROWS_AS(f(0.0, x), DomainError);
}

TEST_CASE("nonlinear part") {
  const PerturbedProblem p = ss_problem(1e-2, 0.25);
  const PotentialQuadratureSpec spec = picard_quadrature();
  const FieldHandle zero = FieldHandle::zero(Arity::vector3, FieldDomain::space_time);
  CHECK(nonlinear_part(p, zero, 0.0, 1.0, Vec3(0.3, 0.2, 0.5), spec).norm() == 0.0);

  const FieldHandle wL = FieldHandle::vector_st([](double, const Vec3& x) {
    const double r2 = x.squaredNorm();
    return Vec3(1e-2 * Vec3(-x[1], x[0], 0.0) / r2);
  });
  CHECK_THROWS_AS(nonlinear_part(p, wL, 1e-4, 1.0, Vec3(0.3, 0.2, 0.5), spec), ContractError);
  PotentialQuadratureSpec infinite = spec;
  infinite.finite_horizon = false;
  infinite.parabolic_data_scale = false;
  CHECK_THROWS_AS(nonlinear_part(p, wL, 1.0, 1.0, Vec3(0.3, 0.2, 0.5), infinite), DomainError);
}

TEST_CASE("zero data converges in one step") {
  const PerturbedProblem p = zero_problem(0.25);
  const PicardResult r = picard_solve(p, small_grid(TimeMode::self_similar));
  CHECK(r.state.converged);
  CHECK(r.state.iterations == 1);
  CHECK(r.state.residual == 0.0);
  CHECK(r.state.solution()->y1_norm() == 0.0);
  CHECK(check_self_similarity(r.w, 2.0, {0.5, 1.0}, probe_points(1, 10), 0.25) == 0.0);
}

TEST_CASE("self-similar data") {
  const double eps = 1e-2, tol = 1e-7;
  const PerturbedProblem p = ss_problem(eps, 0.25);
  PicardOptions opt;
  opt.tol = tol;
  const PicardResult r = picard_solve(p, small_grid(TimeMode::self_similar), opt);
  const PicardState& s = r.state;
  REQUIRE(s.converged);
  CHECK(s.iterations <= 30);
  for (double q : s.contraction_factors) CHECK(q < 0.5);
  const double C1 = s.linear_norm / eps;
  CHECK(s.solution()->y1_norm() <= 2.0 * C1 * eps);
  CHECK(s.residual < 2.0 * tol);
  const double bilinear = s.nonlinear_norm / (eps * s.solution()->y1_norm());
  MESSAGE("C1 = " << C1 << ", bilinear constant = " << bilinear);
  CHECK(bilinear < 1.0);
  CHECK(s.y2_norms.back() > s.y1_norms.back());
  CHECK(check_self_similarity(r.w, 2.0, {0.5, 1.0}, probe_points(42, 50), 0.25) < 10.0 * tol);

  SUBCASE("general path matches the fast path") {
    PicardGrid g = small_grid(TimeMode::general);
    g.n_t = 2;
    g.t_min = 0.5;
    g.t_max = 2.0;
    const PicardResult rg = picard_solve(p, g, opt);
    const auto& a = rg.state.solution()->weighted();
    const auto& b = s.solution()->weighted();
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i % b.size()]).norm());
    CHECK(d < 1e-12);
  }
  SUBCASE("Nystrom extension is divergence free") {
    const FieldHandle ny = nystrom_field(p, s);
    for (double rr : {0.3, 2.0}) {
      const Vec3 x = rr * Vec3(0.3, 0.5, 0.81).normalized();
      CHECK(std::abs(fd_divergence(ny, 1.0, x, 1e-4 * rr)) < 1e-4);
    }
  }
  SUBCASE("halving eps") {
    const PicardResult h = picard_solve(ss_problem(0.5 * eps, 0.25), small_grid(TimeMode::self_similar), opt);
    const double ratio = s.solution()->y1_norm() / h.state.solution()->y1_norm();
    CHECK(ratio >= 1.8);
    CHECK(ratio <= 2.2);
    CHECK(h.state.iterations <= s.iterations);
  }
}

TEST_CASE("discretely self-similar data") {
  const PerturbedProblem p = dss_problem(1e-2, 0.25);
  const FieldHandle w0 = p.w0();
  const FieldHandle w0t = FieldHandle::vector_st([w0](double, const Vec3& x) { return w0.vector_at(0.0, x); });
  const auto pts = probe_points(42, 50);
  const double d2 = check_self_similarity(w0t, 2.0, {1.0}, pts, 0.25);
  const double d3 = check_self_similarity(w0t, 3.0, {1.0}, pts, 0.25);
  CHECK(d2 < 1e-15);
  CHECK(d3 > 1e-3);

  const PicardResult r = picard_solve(p, small_grid(TimeMode::discrete_self_similar));
  const double s2 = check_self_similarity(r.w, 2.0, {0.5, 1.0}, pts, 0.25);
  const double s3 = check_self_similarity(r.w, 3.0, {0.5, 1.0}, pts, 0.25);
  MESSAGE("DSS deviations: lambda=2 " << s2 << ", lambda=3 " << s3);
  CHECK(s3 > 5.0 * s2);
}

TEST_CASE("divergence and non-convergence") {
  PicardGrid g = small_grid(TimeMode::self_similar);
  g.n_rho = 5;
  g.rho_min = 0.25;
  g.rho_max = 4.0;
  PicardOptions opt;
  opt.max_iter = 8;
  CHECK_THROWS_AS(picard_solve(ss_problem(20.0, 0.25), g, opt), DivergenceError);
  opt.max_iter = 1;
  opt.tol = 1e-30;
  try {
    picard_solve(ss_problem(1e-2, 0.25), g, opt);
    FAIL("expected a ConvergenceError");
  } catch (const DivergenceError&) {
    FAIL("non-convergence reported as divergence");
  } catch (const ConvergenceError&) {
  }
  PicardGrid full = g;
  full.n_phi = 0;
  const FieldHandle U = landau_perturbation(1e-2);
  const PerturbedProblem not_axisymmetric(U, U, swirl_data(1e-2), 0.25, 1e-2, false);
  CHECK_THROWS_AS(picard_solve(not_axisymmetric, full, opt), DomainError);
}

TEST_CASE("log-correction witness") {
  const PerturbedProblem p = ss_problem(1e-2, 0.25);
  const LogWitness w = log_correction_witness(p, {2, 3, 4, 5, 6});
  CHECK(w.monotone);
  CHECK(w.at_parabolic > 0.5);
  CHECK(w.at_parabolic < 20.0);
  const double oracle = 4.0 * kPi / 3.0 * std::log(2.0);
  for (std::size_t i = 1; i < w.differences.size(); ++i) CHECK(w.differences[i] > w.differences[i - 1]);
  CHECK(w.slope < oracle);
  const LogWitness deep = log_correction_witness(p, {10, 11, 12});
  CHECK(std::abs(deep.slope - oracle) < 0.005 * oracle);
  CHECK_THROWS_AS(log_correction_witness(zero_problem(0.25), {2, 3}), DomainError);
}

TEST_CASE("kernel estimate instance") {
  const double eta = 0.25;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double lo = 1e300, hi = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double t = std::exp(2.0 * U(rng));
    const Vec3 x = Vec3(U(rng), U(rng), U(rng)).normalized() * std::exp(2.0 * U(rng));
    const double r = x.norm();
    const double ratio = model_integral(t, x, eta, 1, SpatialRule{8, 4.0, 12, 12}, 6) /
                         (std::pow(r + std::sqrt(t), eta - 1.0) * std::pow(r, -eta));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  MESSAGE("kernel estimate ratio in [" << lo << ", " << hi << "]");
  CHECK(lo > 0.0);
  CHECK(hi < 100.0);
}

TEST_CASE("pressure") {
  const Vec3 a(0.3, -0.5, 0.8);
  const auto F = [&](const Vec3& y) { return Mat3(a * a.transpose() * std::exp(-y.squaredNorm())); };
  const auto newton = [](const Vec3& y) { return std::pow(kPi, 1.5) * gaussian_potential(0.25, y.norm()); };
  for (double r : {0.3, 1.0, 2.5}) {
    const Vec3 x = r * Vec3(0.6, 0.0, 0.8);
    const double h = 1e-3;
    const double expected = (newton(x + h * a) - 2.0 * newton(x) + newton(x - h * a)) / (h * h);
    CHECK(std::abs(pressure_from_flux(F, x, {1.0}) - expected) < 2e-3 * std::abs(expected));
    CHECK(std::abs(pressure_from_flux(F, x, {1.0}, SpatialRule{16, 4.0, 24, 24}) - expected) <
          1e-4 * std::abs(expected));
  }
  const auto iso = [](const Vec3& y) { return Mat3(Mat3::Identity() * std::exp(-y.squaredNorm())); };
  const Vec3 x(0.5, 0.2, 0.1);
  CHECK(pressure_from_flux(iso, x, {1.0}) == doctest::Approx(-std::exp(-x.squaredNorm())).epsilon(1e-12));
  CHECK_THROWS_AS(pressure_from_flux(iso, Vec3::Zero(), {1.0}), DomainError);
}

}
