#pragma once

#include "nsasym/fields.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace nsasym {

/// Smooth step: 0 for u <= 0, 1 for u >= 1, built from exp(-1/s).
double smooth_step(double u);
double smooth_step_derivative(double u);

struct DecompOptions {
  int line_panels = 1;       ///< Gauss–Legendre panels per segment between cutoff radii
  int line_order = 24;
  int cheb_nodes = 24;       ///< Chebyshev nodes per segment for the marginal I_2
  int sphere_theta = 16;     ///< angular rule for the volume integrals a_k
  int sphere_phi = 32;
  double series_tol = 1e-12; ///< relative size of the last dyadic term kept
  int max_depth = 80;
  int envelope_samples = 2000;
  /// Radii for the sampled decay constant sup |F| <x>^{a-1}.
  double decay_r_min = 1.0;
  double decay_r_max = 100.0;
  int decay_radii = 24;
};

/// f = f0 + sum_j d_j F_j for |f| <= M <x>^{-a}, a > 3.
///
/// f0 = f psi + a_0 phi_0 is supported in |x| <= R. The pieces
/// f_k = (f + a_k) phi_k - a_{k-1} phi_{k-1} (k >= 1) have zero integral and
/// live in 2^{k-2} L <= |x| <= 2^{k+1} L with L = R / 2; rescaled to B_2 each
/// is written as a divergence by the telescoping line integrals
/// G_3, I_3, F_3, G_2, I_2, F_2, G_1, F_1. F(c, j) is F_j for component c.
/// The series over k is summed until the remaining terms are below
/// series_tol relative to M <x>^{1-a}; beyond |x| its terms are divergence
/// free near x, so truncation does not affect the reconstruction.
class ForceDecomposition {
 public:
  using FluxMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3, 0, 3, 3>;

  ForceDecomposition(FieldHandle f, double R, double a, double M, DecompOptions options = {});

  int components() const { return nc_; }
  double support_radius() const { return R_; }
  double dyadic_scale() const { return L_; }
  double exponent() const { return a_; }

  FieldValue f0(const Vec3& x) const;
  FluxMatrix F(const Vec3& x) const;
  /// sum_k div F_k, assembled from the identity d_j F_kj = f_k - psi'psi'psi' I_k.
  FieldValue divergence_F(const Vec3& x) const;
  /// f_k(x), k >= 1.
  FieldValue piece(int k, const Vec3& x) const;
  /// a_k, k >= 0.
  FieldValue coefficient(int k) const;
  /// int f_k by quadrature on its annulus (zero for k >= 1).
  FieldValue piece_integral(int k) const;
  /// |int f0 - int f|, both by quadrature.
  double mass_defect() const;
  FieldValue total_integral() const;
  FieldValue f0_integral() const;
  /// Number of dyadic pieces summed at x.
  int depth_at(const Vec3& x) const;
  /// Largest depth used so far.
  int max_depth_used() const;

 private:
  struct Piece;
  const Piece& piece_data(int k) const;
  FieldValue tilde(int k, const Vec3& y) const;
  FieldValue tilde_bound(int k) const;
  double phi(const Vec3& y) const;
  FieldValue exterior_mass(double r0, bool weighted) const;
  FluxMatrix piece_F(int k, const Vec3& y) const;
  int first_piece(const Vec3& x) const;
  bool tail_done(int k, const Vec3& x) const;

  FieldHandle f_;
  double R_, a_, M_, L_;
  int nc_;
  DecompOptions opt_;
  double phi_integral_ = 0.0;
  Rule1D line_unit_;  ///< composite rule on [0, 1]
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<const Piece>> pieces_;
  mutable std::map<int, FieldValue> coeffs_;
};

struct DecompResult {
  FieldHandle f0 = FieldHandle::zero(Arity::scalar);
  FieldHandle F = FieldHandle::zero(Arity::vector3);  ///< vector3 for scalar f, tensor3x3 (rows F(c, .)) for vector f
  double support_radius = 0.0;
  double decay_constant = 0.0;  ///< sampled sup |F(x)| <x>^{a-1} over the decay radii
  double mass_defect = 0.0;
  int dyadic_depth = 0;
  std::shared_ptr<const ForceDecomposition> detail;
};

/// Contract-checks |f| <= M <x>^{-a} on deterministic samples; a <= 3 or
/// R <= 0 is a DomainError.
DecompResult decompose_force(const FieldHandle& f, double R, double a, double M, const DecompOptions& options = {});

// ---------------------------------------------------------------------------

/// Boundary data on the flat chart K x {0}, K = (-1, 1)^2; zero outside K.
using PlanarData = std::function<Vec3(double x1, double x2)>;

struct ExtensionOptions {
  int xi_radial = 64;    ///< mollifier rule, radial nodes on [1/8, 1/4]
  int xi_angular = 32;
  int line_panels = 4;   ///< rule for the marginals of u_*^3 over [-1, 1]
  int line_order = 16;
  double flux_tol = 1e-10;
};

struct SupportSlab {
  double half_width = 9.0 / 8.0;  ///< in-plane square half side
  double height = 0.25;           ///< extension vanishes for x_3 above this (chart coordinates)
};

struct ExtensionResult {
  FieldHandle E = FieldHandle::zero(Arity::vector3);
  SupportSlab support;
  FieldHandle H = FieldHandle::zero(Arity::scalar);             ///< harmonic part (zero for chart extensions)
  std::vector<double> g;       ///< component fluxes (empty for chart extensions)
};

/// Mollifier phi on R^2: radial, supported in 1/8 <= |xi| <= 1/4, unit mass.
double mollifier(double r);
double mollifier_derivative(double r);
/// chi(s) = 1 for s < 1/8, 0 for s > 1/4.
double cutoff(double s);
double cutoff_derivative(double s);

/// Divergence-free extension of flux-free planar data into x_3 > 0:
/// u = (d_3 Phi_1, d_3 Phi_2, -d_1 Phi_1 - d_2 Phi_2) with
/// Phi_j = chi(x_3) [x_3 (u_*^j * phi)_{x_3} - f^j]. The derivatives are moved
/// onto phi so u_* needs no gradient. Supported in (9/8) K x [0, 1/4].
ExtensionResult extend_flat(const PlanarData& u_star, const ExtensionOptions& options = {});

struct GraphChart {
  std::function<double(double, double)> h;
  std::function<Eigen::Vector2d(double, double)> grad_h;
};

/// Extension from data on the graph x_3 = h(x'), |h| < 1/4, via
/// y_3 = x_3 - h(x') and U = (u^1, u^2, u^3 - u^1 d_1 h - u^2 d_2 h).
/// u_star is given as a function of x'.
ExtensionResult extend_graph(const PlanarData& u_star, const GraphChart& chart, const ExtensionOptions& options = {});

struct BoundarySphere {
  Vec3 center;
  double radius = 1.0;
};

struct HarmonicPart {
  FieldHandle H = FieldHandle::zero(Arity::scalar);  ///< scalar sum g_k / |x - x_k|
  FieldHandle gradient = FieldHandle::zero(Arity::vector3);  ///< grad H, the flux-carrying part
  std::vector<double> g;
};

/// g_k = (1/4pi) int_{Gamma_k} u_* . N dS with N pointing into each sphere
/// (the outer normal of the exterior domain).
HarmonicPart harmonic_part(const std::function<Vec3(const Vec3&)>& u_star, const std::vector<BoundarySphere>& spheres,
                           int n_theta = 32, int n_phi = 64);

}  // namespace nsasym
