#pragma once

#include "nsasym/quadrature.hpp"
#include "nsasym/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace nsasym {

enum class Arity { scalar, vector3, tensor3x3 };
enum class FieldDomain { space, space_time };

int component_count(Arity a);

/// Field values: 1, 3 or 9 components (tensors flattened row-major).
using FieldValue = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 9, 1>;
/// Row c holds the gradient of component c: G(c, j) = d_j f_c.
using FieldGradient = Eigen::Matrix<double, Eigen::Dynamic, 3, 0, 9, 3>;

/// An evaluable field on R^3 or R_+ x R^3.
///
/// Space fields ignore the time argument. Copies share the underlying
/// closure, which must be pure: identical inputs give identical outputs.
class FieldHandle {
 public:
  using EvalFn = std::function<FieldValue(double, const Vec3&)>;
  using GradFn = std::function<FieldGradient(double, const Vec3&)>;

  FieldHandle(Arity arity, FieldDomain domain, EvalFn eval, GradFn grad = {});

  static FieldHandle scalar(std::function<double(const Vec3&)> f);
  static FieldHandle vector(std::function<Vec3(const Vec3&)> f,
                            std::function<Mat3(const Vec3&)> grad = {});
  static FieldHandle tensor(std::function<Mat3(const Vec3&)> f);
  static FieldHandle scalar_st(std::function<double(double, const Vec3&)> f);
  static FieldHandle vector_st(std::function<Vec3(double, const Vec3&)> f,
                               std::function<Mat3(double, const Vec3&)> grad = {});
  static FieldHandle tensor_st(std::function<Mat3(double, const Vec3&)> f);
  static FieldHandle zero(Arity arity, FieldDomain domain = FieldDomain::space);

  Arity arity() const { return arity_; }
  FieldDomain domain() const { return domain_; }
  int components() const { return component_count(arity_); }
  bool has_analytic_gradient() const { return static_cast<bool>(grad_); }

  FieldValue operator()(double t, const Vec3& x) const;
  FieldValue operator()(const Vec3& x) const { return (*this)(0.0, x); }

  double scalar_at(double t, const Vec3& x) const;
  Vec3 vector_at(double t, const Vec3& x) const;
  Mat3 tensor_at(double t, const Vec3& x) const;

  /// Analytic gradient; throws EvaluationError when the field has none.
  FieldGradient gradient(double t, const Vec3& x) const;

 private:
  Arity arity_;
  FieldDomain domain_;
  EvalFn eval_;
  GradFn grad_;
};

/// Grid parameters; n_r counts radii (geometric from r_min to r_max inclusive).
struct GridSpec {
  double r_min = 0.1;
  double r_max = 100.0;
  int n_r = 64;
  int n_theta = 32;
  int n_phi = 64;

  /// Plain `key=value` block, one key per line.
  std::string to_text() const;
  static GridSpec from_text(const std::string& text);
};

/// Geometric radii times a Gauss–Legendre x uniform-azimuth sphere rule.
class RadialSphericalGrid {
 public:
  explicit RadialSphericalGrid(const GridSpec& spec = {});

  const GridSpec& spec() const { return spec_; }
  const std::vector<double>& radii() const { return radii_; }
  const SphereRule& sphere() const { return sphere_; }
  std::size_t size() const { return radii_.size() * sphere_.nodes().size(); }

  /// Node i in radius-major order.
  Vec3 node(std::size_t i) const;
  /// Volume of the cell around node i (radial cell in log space times the
  /// sphere weight).
  double cell_volume(std::size_t i) const;

 private:
  GridSpec spec_;
  std::vector<double> radii_;
  std::vector<double> shell_volume_factor_;
  SphereRule sphere_;
};

struct NormReport {
  double xk_value = 0.0;
  double weak_lq_value = 0.0;
  GridSpec grid_used;
};

/// max over grid nodes of (1 + |x|)^k |f(t, x)|; a lower bound of the X_k norm.
double xk_norm(const FieldHandle& f, double k, const RadialSphericalGrid& grid, double t = 0.0);

/// Discrete weak-L^q quasi-norm sup_lambda lambda * m(|f| > lambda)^{1/q},
/// with the measure counted from grid cell volumes and lambda ranging over
/// the sampled |f| values.
double weak_lq_norm(const FieldHandle& f, double q, const RadialSphericalGrid& grid, double t = 0.0);

NormReport norm_report(const FieldHandle& f, double k, double q, const RadialSphericalGrid& grid);

enum class DerivativeKind { grad, div, laplacian };

/// Default step 1e-4 * max(1, |x|).
double default_fd_step(const Vec3& x);

/// Central second-order gradient; uses the analytic gradient when present.
FieldGradient fd_gradient(const FieldHandle& f, double t, const Vec3& x, double h);
double fd_divergence(const FieldHandle& f, double t, const Vec3& x, double h);
FieldValue fd_laplacian(const FieldHandle& f, double t, const Vec3& x, double h);

/// Dispatching form: grad -> (components x 3), div -> 1 x 1, laplacian -> components x 1.
Eigen::MatrixXd fd_derivative(const FieldHandle& f, DerivativeKind kind, const Vec3& x, double h,
                              double t = 0.0);

/// Quadrature of the integral of f over the sphere |x| = rho, component-wise.
FieldValue sphere_integral(const FieldHandle& f, double rho, const SphereRule& rule, double t = 0.0);

/// Integral over the ball |x| <= radius with a Gauss–Legendre radial rule.
FieldValue ball_integral(const FieldHandle& f, double radius, int n_radial, const SphereRule& rule,
                         double t = 0.0);

}  // namespace nsasym
