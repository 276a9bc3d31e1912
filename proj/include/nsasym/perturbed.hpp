#pragma once

#include "nsasym/fields.hpp"
#include "nsasym/potentials.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace nsasym {

/// Contraction factor >= 1 on consecutive steps: the data is too large.
class DivergenceError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

struct CertificationOptions {
  GridSpec grid{0.05, 20.0, 12, 8, 16};
  int div_samples = 20;
  double div_tol = 1e-6;  ///< bound on |div w0| |x|^2 / eps
  bool gradient = true;   ///< also certify sup |x|^2 (|grad U| + |grad U~| + |grad w0|)
};

/// Data of w_t - Delta w + div(w (x) w + U (x) w + w (x) U~) + grad p = 0, w(0) = w0.
///
/// The constructor certifies sup |x| |U|, sup |x| |U~| and sup |x| |w0| <= eps
/// on the certification grid (each field separately) and div w0 = 0 at FD
/// samples; a violation is a ContractError. `axisymmetric` asserts that all
/// three fields are equivariant under rotations about `axis`.
class PerturbedProblem {
 public:
  PerturbedProblem(FieldHandle U, FieldHandle U_tilde, FieldHandle w0, double eta, double eps,
                   bool axisymmetric = false, const Vec3& axis = Vec3::UnitZ(),
                   const CertificationOptions& options = {});

  const FieldHandle& U() const { return U_; }
  const FieldHandle& U_tilde() const { return Ut_; }
  const FieldHandle& w0() const { return w0_; }
  double eta() const { return eta_; }
  double eps() const { return eps_; }
  bool axisymmetric() const { return axisymmetric_; }
  const Vec3& axis() const { return axis_; }

  /// Certified sup |x| |.| of U, U~, w0 (lower bounds of the X_1-type norms).
  double U_norm() const { return U_norm_; }
  double U_tilde_norm() const { return Ut_norm_; }
  double w0_norm() const { return w0_norm_; }
  /// max |div w0| |x|^2 over the FD samples.
  double div_defect() const { return div_defect_; }
  bool has_gradient_certificate() const { return grad_ok_; }
  double gradient_norm() const { return grad_norm_; }
  bool U_is_zero() const { return U_norm_ == 0.0 && Ut_norm_ == 0.0; }

 private:
  FieldHandle U_, Ut_, w0_;
  double eta_, eps_;
  bool axisymmetric_;
  Vec3 axis_;
  double U_norm_ = 0.0, Ut_norm_ = 0.0, w0_norm_ = 0.0, div_defect_ = 0.0, grad_norm_ = 0.0;
  bool grad_ok_ = false;
};

/// Landau profile with sup |x| |U| = eps: A = 1 + 4 / eps, axis e_3.
FieldHandle landau_perturbation(double eps);
/// eps (-x2, x1, 0) / |x|^2.
FieldHandle swirl_data(double eps);
/// (eps / 1.3) (1 + 0.3 sin(2 pi log|x| / log 2)) (-x2, x1, 0) / |x|^2: DSS for lambda = 2.
FieldHandle dss_swirl_data(double eps);

PerturbedProblem ss_problem(double eps, double eta);
PerturbedProblem dss_problem(double eps, double eta);
PerturbedProblem zero_problem(double eta);

enum class TimeMode { general, self_similar, discrete_self_similar };

/// Evaluation grid in parabolic coordinates rho = |x| / sqrt t.
///
/// Times: general mode uses n_t geometric times in [t_min, t_max] and holds
/// the profile constant outside; self_similar uses the single slice t = 1;
/// discrete_self_similar uses n_t times per period [1, lambda^2) and wraps.
/// Space: n_rho geometric rho in [rho_min, rho_max], n_theta polar angles
/// including the poles, n_phi azimuths (0 for axisymmetric problems).
/// Stored values are V = (rho + 1)^{1-eta} rho^eta sqrt(t) w, so the grid
/// Y_1 norm is max |V|; V is multilinear in (log t, log rho, theta, phi)
/// between nodes and constant beyond the rho range.
struct PicardGrid {
  TimeMode mode = TimeMode::general;
  double t_min = 0.25;
  double t_max = 4.0;
  int n_t = 3;
  double dss_lambda = 2.0;
  double rho_min = 0.125;
  double rho_max = 8.0;
  int n_rho = 13;
  int n_theta = 7;
  int n_phi = 0;

  void validate() const;
  std::vector<double> times() const;
  std::vector<double> rhos() const;
  std::size_t size() const;
};

/// An iterate memoized on the grid.
class GridField {
 public:
  GridField(const PicardGrid& grid, double eta, const Vec3& axis, std::vector<Vec3> weighted);

  Vec3 operator()(double t, const Vec3& x) const;
  FieldHandle handle() const;
  const std::vector<Vec3>& weighted() const { return V_; }
  /// Node position of index i.
  std::pair<double, Vec3> node(std::size_t i) const;
  /// max |V| over the nodes.
  double y1_norm() const;
  /// max over nodes of (|x| + sqrt t)^{1-eta} |x|^{1+eta} |grad w|, with the
  /// gradient taken by central differences of the interpolant.
  double gradient_norm() const;
  double eta() const { return eta_; }
  const PicardGrid& grid() const { return grid_; }

 private:
  PicardGrid grid_;
  double eta_;
  Mat3 frame_;
  std::vector<double> logt_, logrho_, theta_, phi_;
  std::vector<Vec3> V_;
  std::size_t nt_, nr_, nth_, nph_;
  Vec3 local_value(double logt, double logrho, double th, double ph) const;
};

/// Y_1 weight (|x| + sqrt t)^{1-eta} |x|^eta.
double y1_weight(double t, const Vec3& x, double eta);

/// Heat convolution int Gamma(t, y) w0(x - y) dy by two-center quadrature;
/// a ConvergenceError when the halved rule differs by more than 1e-3 relative
/// to eps / (|x| + sqrt t).
Vec3 linear_part(const PerturbedProblem& problem, double t, const Vec3& x,
                 const SpatialRule& rule = SpatialRule{16, 2.0, 16, 16});

/// w_N(w)(t, x) = -int_0^t int d_k S_ij(s, x - y) F_kj(t - s, y) dy ds with
/// F = w (x) w + U (x) w + w (x) U~, through theta_apply on [0, t]. The data
/// envelope is Y (Y w1 + |U| + |U~|) built from the certificate
/// |w| <= Y w1, w1 = (|x| + sqrt t)^{eta-1} |x|^{-eta}; a violation is a
/// ContractError.
Vec3 nonlinear_part(const PerturbedProblem& problem, const FieldHandle& w, double y1_bound, double t, const Vec3& x,
                    const PotentialQuadratureSpec& spec);

/// Quadrature used inside the Picard map.
PotentialQuadratureSpec picard_quadrature();

struct PicardOptions {
  int max_iter = 30;
  double tol = 1e-7;
  PotentialQuadratureSpec quadrature = picard_quadrature();
  SpatialRule linear_rule{16, 2.0, 16, 16};
};

struct PicardState {
  std::vector<std::shared_ptr<const GridField>> iterates;  ///< w^0 = w_L, w^1, ...
  std::vector<double> y1_norms;
  std::vector<double> y2_norms;
  std::vector<double> contraction_factors;  ///< one per step from the second on
  std::vector<double> distances;            ///< Y_1 distance of successive iterates
  bool converged = false;
  int iterations = 0;         ///< applications of the map
  double linear_norm = 0.0;   ///< grid Y_1 norm of w_L
  double residual = 0.0;      ///< ||w - w_L - w_N(w)||_{Y_1, grid} of the returned w
  double nonlinear_norm = 0.0;  ///< ||w_N(w)||_{Y_1, grid}
  std::size_t returned = 0;   ///< index of the returned iterate

  std::shared_ptr<const GridField> linear() const { return iterates.front(); }
  std::shared_ptr<const GridField> solution() const { return iterates.at(returned); }
};

struct PicardResult {
  PicardState state;
  FieldHandle w = FieldHandle::zero(Arity::vector3, FieldDomain::space_time);
};

/// w^{k+1} = w_L + w_N(w^k) from w^0 = w_L, on the grid nodes. Stops when
/// the Y_1 distance of successive iterates is below tol and returns the
/// iterate whose residual that distance is. A DivergenceError when the
/// contraction factor is >= 1 on 3 consecutive steps, a ConvergenceError
/// after max_iter applications.
PicardResult picard_solve(const PerturbedProblem& problem, const PicardGrid& grid, const PicardOptions& options = {});

/// w_L + w_N(w) evaluated by quadrature at (t, x) for the memoized w: a
/// smooth extension of the fixed point off the grid.
FieldHandle nystrom_field(const PerturbedProblem& problem, const PicardState& state,
                          const PotentialQuadratureSpec& spec = picard_quadrature());

/// max over probe times and points of |lambda w(lambda^2 t, lambda x) - w(t, x)|
/// weighted by (|x| + sqrt t)^{1-eta} |x|^eta.
double check_self_similarity(const FieldHandle& w, double lambda, const std::vector<double>& probe_times,
                             const std::vector<Vec3>& points, double eta);

/// int_0^t int (|y| + sqrt s)^{-4} (|x-y| + sqrt(t-s))^{-1+eta} |x-y|^{-k-eta} dy ds.
double model_integral(double t, const Vec3& x, double eta, int k,
                      const SpatialRule& rule = SpatialRule{12, 4.0, 16, 16}, int time_order = 8);

struct LogWitness {
  std::vector<double> x_norms;
  std::vector<double> weighted;      ///< I(x) (|x| + sqrt t)
  std::vector<double> log_factor;    ///< log(sqrt t / 2|x|)
  std::vector<double> differences;   ///< successive weighted differences
  bool monotone = false;
  double slope = 0.0;                ///< last difference per factor-2 step
  double at_parabolic = 0.0;         ///< weighted value at |x| = sqrt t
};

/// The eta = 0 model integral at |x| = sqrt t 2^{-j}. Requires U != 0.
LogWitness log_correction_witness(const PerturbedProblem& problem, const std::vector<int>& j_values, double t = 1.0);

/// Pressure from -Delta p = d_i d_j F_ij at (t, x):
/// p = PV int K_ij(x - y) F_ij(y) dy - tr F(x) / 3 with
/// K_ij(z) = (3 z_i z_j - |z|^2 delta_ij) / (4 pi |z|^5).
double pressure(const PerturbedProblem& problem, const FieldHandle& w, double t, const Vec3& x,
                const SpatialRule& rule = SpatialRule{8, 4.0, 12, 12});

/// The same singular integral for a tensor field F with characteristic
/// lengths `scales`.
double pressure_from_flux(const std::function<Mat3(const Vec3&)>& F, const Vec3& x, const std::vector<double>& scales,
                          const SpatialRule& rule = SpatialRule{8, 4.0, 12, 12});

}  // namespace nsasym
