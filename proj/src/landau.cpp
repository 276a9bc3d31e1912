#include "nsasym/landau.hpp"

#include "nsasym/parallel.hpp"

#include <cmath>

namespace nsasym {

namespace {

constexpr double kSeriesThreshold = 4.0;

// For A >= 4 the closed form cancels badly; use
// |b|/(16 pi) = sum_m A^{-(2m+1)} (4/3 - 1/(2m+3)).
double b_series(double A) {
  const double inv = 1.0 / A, inv2 = inv * inv;
  double term = inv, sum = 0.0;
  for (int m = 0; m < 40; ++m) {
    const double add = term * (4.0 / 3.0 - 1.0 / (2.0 * m + 3.0));
    sum += add;
    if (add < 1e-18 * sum) break;
    term *= inv2;
  }
  return sum;
}

double db_series(double A) {
  const double inv = 1.0 / A, inv2 = inv * inv;
  double term = inv2, sum = 0.0;
  for (int m = 0; m < 40; ++m) {
    const double add = (2.0 * m + 1.0) * term * (4.0 / 3.0 - 1.0 / (2.0 * m + 3.0));
    sum += add;
    if (add < 1e-18 * sum) break;
    term *= inv2;
  }
  return -sum;
}

}  // namespace

double b_of_A(double A) {
  if (!(A > 1.0)) throw DomainError("b_of_A requires A > 1");
  if (std::isinf(A)) return 0.0;
  if (A >= kSeriesThreshold) return 16.0 * kPi * b_series(A);
  const double L = std::log((A - 1.0) / (A + 1.0));
  return 16.0 * kPi * (A + 0.5 * A * A * L + 4.0 * A / (3.0 * (A * A - 1.0)));
}

double db_dA(double A) {
  if (!(A > 1.0)) throw DomainError("db_dA requires A > 1");
  if (A >= kSeriesThreshold) return 16.0 * kPi * db_series(A);
  const double a2m1 = A * A - 1.0;
  const double L = std::log((A - 1.0) / (A + 1.0));
  return 16.0 * kPi * (1.0 + A * L + A * A / a2m1 - (4.0 / 3.0) * (A * A + 1.0) / (a2m1 * a2m1));
}

double a_of_b(double mag_b, double tol) {
  if (!(tol > 0.0)) throw DomainError("a_of_b requires tol > 0");
  if (!(mag_b >= 0.0) || !std::isfinite(mag_b)) throw DomainError("a_of_b requires a finite |b| >= 0");
  if (mag_b == 0.0) return std::numeric_limits<double>::infinity();

  // Bisection in u = log(A - 1) over the bracket [1 + 1e-12, 1e12].
  double lo = std::log(1e-12), hi = std::log(1e12 - 1.0);
  double A = 0.0;
  if (mag_b >= b_of_A(1.0 + std::exp(lo))) {
    A = 1.0 + std::exp(lo);
  } else if (mag_b <= b_of_A(1.0 + std::exp(hi))) {
    A = 16.0 * kPi / mag_b;
  } else {
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (b_of_A(1.0 + std::exp(mid)) > mag_b)
        lo = mid;
      else
        hi = mid;
    }
    A = 1.0 + std::exp(0.5 * (lo + hi));
  }
  // Newton polish, guarded to stay in A > 1.
  for (int it = 0; it < 4; ++it) {
    const double f = b_of_A(A) - mag_b;
    if (std::abs(f) < 1e-3 * tol * std::max(1.0, mag_b)) break;
    double next = A - f / db_dA(A);
    if (!(next > 1.0)) next = 0.5 * (A + 1.0);
    A = next;
  }
  if (!(std::abs(b_of_A(A) - mag_b) < tol * std::max(1.0, mag_b)))
    throw ConvergenceError("a_of_b did not reach the requested tolerance");
  return A;
}

// ---------------------------------------------------------------------------

LandauSolution::LandauSolution(const Vec3& b, double A, bool zero)
    : b_(b), A_(A), zero_(zero), axis_(zero ? Vec3::Zero() : Vec3(b.normalized())) {}

LandauSolution::LandauSolution(const Vec3& b, double tol)
    : LandauSolution(b, a_of_b(b.norm(), tol), b.norm() == 0.0) {}

LandauSolution LandauSolution::from_A(double A, const Vec3& axis) {
  if (std::isinf(A) && A > 0) return LandauSolution(Vec3::Zero(), A, true);
  const double n = axis.norm();
  if (!(n > 0.0)) throw DomainError("Landau axis must be nonzero");
  return LandauSolution(b_of_A(A) * axis / n, A, false);
}

Vec3 LandauSolution::axis() const {
  if (zero_) throw DomainError("the zero Landau solution has no axis");
  return axis_;
}

namespace {
void check_nonzero(const Vec3& x) {
  if (x.squaredNorm() == 0.0) throw EvaluationError("Landau solution is singular at the origin");
}
}  // namespace

Vec3 LandauSolution::velocity(const Vec3& x) const {
  check_nonzero(x);
  if (zero_) return Vec3::Zero();
  const double rho = x.norm();
  const Vec3 xh = x / rho;
  const double c = xh.dot(axis_);
  const double d = A_ - c;
  const double alpha = 2.0 * ((A_ * A_ - 1.0) / (d * d) - 1.0) - 2.0 * c / d;
  const double beta = 2.0 / d;
  return (alpha * xh + beta * axis_) / rho;
}

Mat3 LandauSolution::velocity_gradient(const Vec3& x) const {
  check_nonzero(x);
  if (zero_) return Mat3::Zero();
  const double rho = x.norm();
  const Vec3 xh = x / rho;
  const Vec3& e = axis_;
  const double c = xh.dot(e);
  const double d = A_ - c;
  const double alpha = 2.0 * ((A_ * A_ - 1.0) / (d * d) - 1.0) - 2.0 * c / d;
  const double dalpha = 4.0 * (A_ * A_ - 1.0) / (d * d * d) - 2.0 * A_ / (d * d);
  const double beta = 2.0 / d;
  const double dbeta = 2.0 / (d * d);
  const Vec3 dc = e - c * xh;  // rho * grad(cos phi)
  Mat3 g = alpha * (Mat3::Identity() - 2.0 * xh * xh.transpose()) + dalpha * xh * dc.transpose() -
           beta * e * xh.transpose() + dbeta * e * dc.transpose();
  return g / (rho * rho);
}

double LandauSolution::pressure(const Vec3& x) const {
  check_nonzero(x);
  if (zero_) return 0.0;
  const double r2 = x.squaredNorm();
  const double c = x.dot(axis_) / std::sqrt(r2);
  const double d = A_ - c;
  return 4.0 * (A_ * c - 1.0) / (r2 * d * d);
}

std::pair<double, double> LandauSolution::spherical_velocity(const Vec3& x) const {
  check_nonzero(x);
  if (zero_) return {0.0, 0.0};
  const double rho = x.norm();
  const double c = x.dot(axis_) / rho;
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  const double d = A_ - c;
  return {2.0 / rho * ((A_ * A_ - 1.0) / (d * d) - 1.0), -2.0 * s / (rho * d)};
}

FieldHandle LandauSolution::velocity_field(bool with_gradient) const {
  const LandauSolution self = *this;
  std::function<Mat3(const Vec3&)> grad;
  if (with_gradient) grad = [self](const Vec3& x) { return self.velocity_gradient(x); };
  return FieldHandle::vector([self](const Vec3& x) { return self.velocity(x); }, grad);
}

FieldHandle LandauSolution::pressure_field() const {
  const LandauSolution self = *this;
  return FieldHandle::scalar([self](const Vec3& x) { return self.pressure(x); });
}

LandauResidual landau_residual_at(const LandauSolution& sol, const Vec3& x, double h_rel) {
  if (!(h_rel > 0.0)) throw DomainError("landau_residual requires h_rel > 0");
  if (sol.is_zero()) return {};
  const FieldHandle u = sol.velocity_field(false);
  const FieldHandle p = sol.pressure_field();
  const double r = x.norm();
  const double h = h_rel * r;
  const Vec3 U = sol.velocity(x);
  const FieldGradient G = fd_gradient(u, 0.0, x, h);
  const FieldValue lap = fd_laplacian(u, 0.0, x, h);
  const FieldGradient gp = fd_gradient(p, 0.0, x, h);
  Vec3 res;
  for (int k = 0; k < 3; ++k) res[k] = -lap[k] + G.row(k).dot(U) + gp(0, k);
  return {res.norm() * r * r * r, std::abs(G.trace()) * r * r};
}

LandauResidual landau_residual(const LandauSolution& sol, const RadialSphericalGrid& grid, double h_rel) {
  if (!(h_rel > 0.0)) throw DomainError("landau_residual requires h_rel > 0");
  if (sol.is_zero()) return {};
  const auto per_node =
      parallel_map<LandauResidual>(grid.size(), [&](std::size_t i) { return landau_residual_at(sol, grid.node(i), h_rel); });
  LandauResidual out;
  for (const auto& l : per_node) {
    out.momentum = std::max(out.momentum, l.momentum);
    out.divergence = std::max(out.divergence, l.divergence);
  }
  return out;
}

}  // namespace nsasym
