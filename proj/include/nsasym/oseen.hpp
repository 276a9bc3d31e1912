#pragma once

#include "nsasym/types.hpp"

#include <array>
#include <vector>

namespace nsasym {

/// Heat kernel (4 pi t)^{-3/2} exp(-|x|^2 / 4t). Throws DomainError for t <= 0.
double heat_kernel(double t, const Vec3& x);

/// Newtonian potential of the heat kernel, (1/4pi) int Gamma(t,y)/|x-y| dy
/// = erf(r / 2 sqrt t) / (4 pi r). Finite at r = 0.
double gaussian_potential(double t, double r);

enum class OseenMode { erf_closed_form, brute_quadrature };

/// Stokes fundamental tensor S_ij = Gamma delta_ij + d_i d_j Phi, Phi the
/// Newtonian potential of Gamma. Stateless apart from the mode selector.
class OseenTensor {
 public:
  explicit OseenTensor(OseenMode mode = OseenMode::erf_closed_form) : mode_(mode) {}

  OseenMode mode() const { return mode_; }

  /// S(t, x). Throws DomainError for t <= 0 and EvaluationError for x = 0.
  Mat3 operator()(double t, const Vec3& x) const;

  /// d_k S_ij as out[k](i, j), closed form.
  std::array<Mat3, 3> gradient(double t, const Vec3& x) const;

 private:
  OseenMode mode_;
};

/// Closed-form evaluation (series for |x| < 3 sqrt t).
Mat3 oseen_closed_form(double t, const Vec3& x);

/// d_i d_j Phi by direct quadrature of (1/4pi) int (d_i d_j Gamma)(t, x - z) / |z| dz
/// in spherical coordinates about z = 0, plus Gamma delta_ij.
Mat3 oseen_brute(double t, const Vec3& x, int order = 48);

/// Convenience wrapper over OseenTensor.
Mat3 oseen_eval(double t, const Vec3& x, OseenMode mode = OseenMode::erf_closed_form);

/// d_x^ell d_t^k S by central differences of the closed form, with spatial step
/// eps (|x| + sqrt t) and time step eps t. ell <= 2, k <= 1.
/// Entry m of the result is the derivative along the multi-index
/// (m_1, ..., m_ell) with m = sum m_a 3^{a-1}, so there are 3^ell matrices.
std::vector<Mat3> oseen_derivative(double t, const Vec3& x, int ell, int k);

/// Frobenius norm over all entries of an oseen_derivative result.
double derivative_magnitude(const std::vector<Mat3>& d);

/// Spatial factor x_j / (4 pi |x|^3) of Q_j = delta(t) x_j / (4 pi |x|^3).
Vec3 pressure_kernel_q(const Vec3& x);

struct DecayConstant {
  int ell = 0;
  int k = 0;
  double value = 0.0;  ///< max of |d^ell d_t^k S| (|x| + sqrt t)^{3 + ell + 2k}
  double t_at = 0.0;
  double r_at = 0.0;
};

/// Weighted maxima over an n x n log grid of (t, |x|) in [lo, hi]^2 for
/// (ell, k) in {(0,0), (1,0), (2,0), (0,1)}. x is taken along (1,1,1)/sqrt 3.
std::vector<DecayConstant> oseen_decay_constants(int n = 20, double lo = 1e-2, double hi = 1e2);

/// max over the same grid of |d_i S_ij| (|x| + sqrt t)^4 (FD divergence).
double oseen_divergence_defect(int n = 20, double lo = 1e-2, double hi = 1e2);

}  // namespace nsasym
