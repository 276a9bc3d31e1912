#pragma once

#include "nsasym/fields.hpp"

#include <vector>

namespace nsasym {

struct FluxConfig {
  std::vector<double> radii{2.0, 4.0, 8.0};
  double period = 1.0;  ///< averaging window T; 1 for steady fields
  int time_nodes = 1;
  int n_theta = 32;
  int n_phi = 64;
  /// extract_b flags the ladder when the spread exceeds spread_tol * max(|b|, 1e-300).
  double spread_tol = 1e-3;

  /// Throws DomainError on non-positive or repeated radii, T <= 0, or time_nodes < 1.
  void validate() const;
};

/// T_ij = p delta_ij + u_i u_j - d_i u_j - d_j u_i - F_ij.
/// Gradients use the analytic path when the handle has one, otherwise central
/// differences with step 1e-4 max(1, |x|). F may be an empty tensor handle
/// (FieldHandle::zero(Arity::tensor3x3)).
Mat3 momentum_flux_tensor(const FieldHandle& u, const FieldHandle& p, const FieldHandle& F, double t,
                          const Vec3& x);

/// (1/T) int_0^T int_{|x|=rho} T_ij n_i dS dt, trapezoidal in time on
/// time_nodes equispaced nodes (periodic rule).
Vec3 flux_integral(const FieldHandle& u, const FieldHandle& p, const FieldHandle& F, double rho,
                   const FluxConfig& config);

/// Flux at a single time, no averaging.
Vec3 flux_integral_at(const FieldHandle& u, const FieldHandle& p, const FieldHandle& F, double rho, double t,
                      const FluxConfig& config);

struct FluxRow {
  double rho = 0.0;
  double t = 0.0;  ///< NaN for averaged rows
  Vec3 I = Vec3::Zero();
};

struct FluxExtraction {
  Vec3 b = Vec3::Zero();
  std::vector<FluxRow> averaged;  ///< one row per radius
  std::vector<FluxRow> per_time;  ///< one row per (radius, time node)
  double spread = 0.0;            ///< max_{i,j} |I(rho_i) - I(rho_j)|
  bool converged = true;          ///< spread within spread_tol of |b|
};

/// Limit of I(rho) along the radii ladder: I(rho) = b + c/rho is fitted
/// through the two largest radii.
FluxExtraction extract_b(const FieldHandle& u, const FieldHandle& p, const FieldHandle& F,
                         const FluxConfig& config);

/// |I(rho2) - I(rho1) - (1/T) int_0^T int_{rho1 < |x| < rho2} f0 dx dt|.
double consistency_check(const FieldHandle& u, const FieldHandle& p, const FieldHandle& F, const FieldHandle& f0,
                         double rho1, double rho2, const FluxConfig& config, int n_radial = 32);

}  // namespace nsasym
