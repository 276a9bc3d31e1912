#pragma once

#include "nsasym/fields.hpp"
#include "nsasym/types.hpp"

#include <limits>

namespace nsasym {

/// |b| as a function of the profile parameter A > 1:
/// 16 pi (A + A^2/2 log((A-1)/(A+1)) + 4A / (3(A^2-1))). Strictly decreasing.
double b_of_A(double A);

/// d|b|/dA.
double db_dA(double A);

/// Inverse of b_of_A. Returns +infinity for mag_b == 0 (the zero solution).
double a_of_b(double mag_b, double tol = 1e-13);

/// Landau solution (U^b, P^b) of -Delta u + (u.grad)u + grad p = b delta_0.
///
/// In spherical coordinates with the north pole along b/|b| and polar angle phi,
///   U = (2/rho)[(A^2-1)/(A-cos phi)^2 - 1] e_rho - 2 sin phi / (rho (A - cos phi)) e_phi,
///   P = 4 (A cos phi - 1) / (rho^2 (A - cos phi)^2),
/// so P vanishes at infinity. b = 0 is the zero field with A = +infinity.
class LandauSolution {
 public:
  explicit LandauSolution(const Vec3& b, double tol = 1e-13);
  static LandauSolution from_A(double A, const Vec3& axis);

  const Vec3& b() const { return b_; }
  double A() const { return A_; }
  bool is_zero() const { return zero_; }
  /// b/|b|; throws DomainError for the zero solution.
  Vec3 axis() const;
  double pressure_offset() const { return 0.0; }

  Vec3 velocity(const Vec3& x) const;
  /// G(i, j) = d_j U_i.
  Mat3 velocity_gradient(const Vec3& x) const;
  double pressure(const Vec3& x) const;

  /// (u_rho, u_phi) with phi the polar angle from the axis.
  std::pair<double, double> spherical_velocity(const Vec3& x) const;

  /// Handles for the field machinery. The velocity handle carries the
  /// analytic gradient unless `with_gradient` is false.
  FieldHandle velocity_field(bool with_gradient = true) const;
  FieldHandle pressure_field() const;

 private:
  LandauSolution(const Vec3& b, double A, bool zero);

  Vec3 b_;
  double A_;
  bool zero_;
  Vec3 axis_;
};

struct LandauResidual {
  double momentum = 0.0;
  double divergence = 0.0;
};

/// max over grid nodes of |-Delta U + (U.grad)U + grad P| |x|^3 and
/// |div U| |x|^2, all derivatives by central differences with step
/// h_rel * |x|.
LandauResidual landau_residual(const LandauSolution& sol, const RadialSphericalGrid& grid, double h_rel = 1e-4);
/// The same weighted residuals at a single point.
LandauResidual landau_residual_at(const LandauSolution& sol, const Vec3& x, double h_rel = 1e-4);

}  // namespace nsasym
