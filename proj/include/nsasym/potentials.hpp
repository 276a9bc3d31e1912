#pragma once

#include "nsasym/convolution.hpp"
#include "nsasym/fields.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace nsasym {

/// Discretization of the space-time potentials.
///
/// Time: s in (0, H] in the variable sigma = sqrt s, first panel [0, sigma_0]
/// with sigma_0 = time_inner * min(|x|, data scale, sqrt H), then geometric
/// panels of ratio time_ratio, each capped at time_resolution in s. With a
/// finite horizon the last half is graded symmetrically toward s = H.
/// Space: two_center_integral with scales (sqrt s, |x|, data scale).
struct PotentialQuadratureSpec {
  double t_max_factor = 100.0;  ///< T_max = t_max_factor (1 + t)
  int time_order = 8;
  double time_ratio = 2.0;
  double time_inner = 0.25;
  double time_resolution = std::numeric_limits<double>::infinity();
  SpatialRule space;
  double data_scale = 1.0;
  /// Data at time tau has length scale data_scale * sqrt(tau) (self-similar data).
  bool parabolic_data_scale = false;
  /// Integrate over (0, t) only, without the tail (the Duhamel term).
  bool finite_horizon = false;
  /// Beyond T_max the data is treated as periodic with this period (steady
  /// data is the special case); tail_samples equispaced samples give its mean
  /// and zero-mean primitive.
  double tail_period = 1.0;
  int tail_samples = 8;
  /// Also evaluate with halved orders and report the difference.
  bool estimate_error = true;

  void validate() const;
  PotentialQuadratureSpec halved() const;
  PotentialQuadratureSpec doubled() const;

  /// Nodes s_i and weights of the time rule for horizon H at |x| = xnorm,
  /// current time t.
  Rule1D time_rule(double H, double xnorm, double t) const;
};

/// Pointwise bound on the data; an empty envelope disables the contract check.
using Envelope = std::function<double(double t, const Vec3& y)>;

struct PotentialResult {
  Vec3 value = Vec3::Zero();
  double truncation_estimate = 0.0;  ///< size of the un-modelled time tail
  double quadrature_estimate = 0.0;  ///< |Q(spec) - Q(spec.halved())|
  double error_estimate() const { return truncation_estimate + quadrature_estimate; }
};

/// (Theta G)_i(t, x) = - int_0^inf int d_k S_ij(s, x - y) G_jk(t - s, y) dy ds.
/// G is a space-time tensor field. The interval [0, T_max] is integrated by
/// quadrature. Beyond it the tail is K_T gbar + K(T_max) H, with K_T the
/// kernel integrated in time from T_max, gbar the period mean and H the
/// zero-mean primitive of the data at t - T_max; the next term of the
/// integration by parts, bounded with the envelope (or |data|), is
/// truncation_estimate.
PotentialResult theta_apply(const FieldHandle& G, double t, const Vec3& x, const PotentialQuadratureSpec& spec,
                            const Envelope& envelope = {});

/// (Lambda g)_i(t, x) = int_0^inf int S_ij(s, x - y) g_j(t - s, y) dy ds, same contract.
PotentialResult lambda_apply(const FieldHandle& g, double t, const Vec3& x, const PotentialQuadratureSpec& spec,
                             const Envelope& envelope = {});

/// int_T^inf S(s, w) ds and int_T^inf d_k S(s, w) ds.
Mat3 oseen_time_tail(double T, const Vec3& w);
std::array<Mat3, 3> oseen_gradient_time_tail(double T, const Vec3& w);

/// Parameters of the convolution estimate
/// int (|x-y| + lambda)^{-b} |x-y|^{-c} (|y| + sqrt t)^{-n-mu} dy
///   ~ sqrt(t)^{-mu} (|x| + lambda + sqrt t)^{-b} (|x| + sqrt t)^{-c}.
struct IntEstParams {
  int n = 3;
  double b = 0.0;
  double c = 0.0;
  double mu = 1.0;
  double lambda = 0.0;
  double t = 1.0;

  IntEstParams() = default;
  IntEstParams(double b_, double c_, double mu_, double lambda_, double t_);
  void validate() const;
};

struct IntEstResult {
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  std::vector<double> ratios;
};

/// Integral J(x) by two-center quadrature. Throws ConvergenceError when the
/// halved rule disagrees by more than 1e-3 relative.
double int_est_integral(const IntEstParams& p, const Vec3& x, const SpatialRule& rule = SpatialRule{12, 4.0, 16, 16});
IntEstResult int_est_ratio(const IntEstParams& p, const std::vector<Vec3>& x_samples,
                           const SpatialRule& rule = SpatialRule{12, 4.0, 16, 16});

}  // namespace nsasym
