#include "nsasym/perturbed.hpp"

#include "nsasym/decomp.hpp"
#include "nsasym/landau.hpp"
#include "nsasym/oseen.hpp"
#include "nsasym/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace nsasym {

namespace {

void require_vector_space(const FieldHandle& f, const char* name) {
  if (f.arity() != Arity::vector3) throw DomainError(std::string(name) + " must be a vector field");
}

/// Deterministic directions on a Fibonacci spiral.
Vec3 spiral_direction(int i, int n) {
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  const double z = 1.0 - (2.0 * i + 1.0) / n;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(golden * i), r * std::sin(golden * i), z};
}

double weighted_sup(const FieldHandle& f, const RadialSphericalGrid& grid) {
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 x = grid.node(i);
    best = std::max(best, x.norm() * f.vector_at(0.0, x).norm());
  }
  return best;
}

}  // namespace

PerturbedProblem::PerturbedProblem(FieldHandle U, FieldHandle U_tilde, FieldHandle w0, double eta, double eps,
                                   bool axisymmetric, const Vec3& axis, const CertificationOptions& options)
    : U_(std::move(U)), Ut_(std::move(U_tilde)), w0_(std::move(w0)), eta_(eta), eps_(eps),
      axisymmetric_(axisymmetric) {
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("eta must lie in (0, 1)");
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  require_vector_space(U_, "U");
  require_vector_space(Ut_, "U~");
  require_vector_space(w0_, "w0");
  if (!(axis.norm() > 0.0)) throw DomainError("symmetry axis must be nonzero");
  axis_ = axis.normalized();

  const RadialSphericalGrid grid(options.grid);
  U_norm_ = weighted_sup(U_, grid);
  Ut_norm_ = weighted_sup(Ut_, grid);
  w0_norm_ = weighted_sup(w0_, grid);
  const auto over = [&](double v, const char* name) {
    if (v > eps_ * (1.0 + 1e-9))
      throw ContractError(std::string("sup |x| |") + name + "| = " + std::to_string(v) + " exceeds eps = " +
                          std::to_string(eps_));
  };
  over(U_norm_, "U");
  over(Ut_norm_, "U~");
  over(w0_norm_, "w0");

  const int n = options.div_samples;
  for (int i = 0; i < n; ++i) {
    const double r = grid.spec().r_min * std::pow(grid.spec().r_max / grid.spec().r_min, (i + 0.5) / n);
    const Vec3 x = r * spiral_direction(i, n);
    div_defect_ = std::max(div_defect_, std::abs(fd_divergence(w0_, 0.0, x, 1e-4 * r)) * r * r);
  }
  if (div_defect_ > options.div_tol * eps_)
    throw ContractError("div w0 != 0: max |div w0| |x|^2 = " + std::to_string(div_defect_));

  if (options.gradient) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Vec3 x = grid.node(i);
      const double h = 1e-4 * x.norm();
      const double g = fd_gradient(U_, 0.0, x, h).norm() + fd_gradient(Ut_, 0.0, x, h).norm() +
                       fd_gradient(w0_, 0.0, x, h).norm();
      grad_norm_ = std::max(grad_norm_, x.squaredNorm() * g);
    }
    grad_ok_ = std::isfinite(grad_norm_);
  }
}

FieldHandle landau_perturbation(double eps) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  return LandauSolution::from_A(1.0 + 4.0 / eps, Vec3::UnitZ()).velocity_field();
}

FieldHandle swirl_data(double eps) {
  return FieldHandle::vector(
      [eps](const Vec3& x) {
        const double r2 = x.squaredNorm();
        if (r2 == 0.0) return Vec3(Vec3::Zero());
        return Vec3(eps * Vec3(-x[1], x[0], 0.0) / r2);
      },
      [eps](const Vec3& x) {
        const double r2 = x.squaredNorm();
        Mat3 g = Mat3::Zero();
        if (r2 == 0.0) return g;
        const Vec3 v(-x[1], x[0], 0.0);
        g(0, 1) = -1.0;
        g(1, 0) = 1.0;
        g = (g - 2.0 * v * x.transpose() / r2) * (eps / r2);
        return g;
      });
}

FieldHandle dss_swirl_data(double eps) {
  return FieldHandle::vector([eps](const Vec3& x) {
    const double r2 = x.squaredNorm();
    if (r2 == 0.0) return Vec3(Vec3::Zero());
    const double m = 1.0 + 0.3 * std::sin(2.0 * kPi * std::log(std::sqrt(r2)) / std::log(2.0));
    return Vec3((eps / 1.3) * m * Vec3(-x[1], x[0], 0.0) / r2);
  });
}

PerturbedProblem ss_problem(double eps, double eta) {
  const FieldHandle U = landau_perturbation(eps);
  return PerturbedProblem(U, U, swirl_data(eps), eta, eps, true);
}

PerturbedProblem dss_problem(double eps, double eta) {
  const FieldHandle U = landau_perturbation(eps);
  return PerturbedProblem(U, U, dss_swirl_data(eps), eta, eps, true);
}

PerturbedProblem zero_problem(double eta) {
  const FieldHandle z = FieldHandle::zero(Arity::vector3);
  return PerturbedProblem(z, z, z, eta, 1.0, true);
}

// ---------------------------------------------------------------------------

void PicardGrid::validate() const {
  if (mode == TimeMode::general) {
    if (!(t_min > 0.0) || !(t_max >= t_min) || n_t < 1) throw DomainError("general grid needs 0 < t_min <= t_max, n_t >= 1");
    if (n_t > 1 && !(t_max > t_min)) throw DomainError("several times need t_max > t_min");
  }
  if (mode == TimeMode::discrete_self_similar && (!(dss_lambda > 1.0) || n_t < 2))
    throw DomainError("DSS grid needs lambda > 1 and n_t >= 2");
  if (!(rho_min > 0.0) || !(rho_max > rho_min) || n_rho < 2) throw DomainError("grid needs 0 < rho_min < rho_max, n_rho >= 2");
  if (n_theta < 3) throw DomainError("grid needs n_theta >= 3");
  if (n_phi != 0 && n_phi < 4) throw DomainError("grid needs n_phi = 0 (axisymmetric) or n_phi >= 4");
}

std::vector<double> PicardGrid::times() const {
  std::vector<double> t;
  switch (mode) {
    case TimeMode::self_similar:
      t.push_back(1.0);
      break;
    case TimeMode::discrete_self_similar:
      for (int k = 0; k < n_t; ++k) t.push_back(std::pow(dss_lambda, 2.0 * k / n_t));
      break;
    case TimeMode::general:
      for (int k = 0; k < n_t; ++k) t.push_back(n_t == 1 ? t_min : t_min * std::pow(t_max / t_min, double(k) / (n_t - 1)));
      break;
  }
  return t;
}

std::vector<double> PicardGrid::rhos() const {
  std::vector<double> r;
  for (int k = 0; k < n_rho; ++k) r.push_back(rho_min * std::pow(rho_max / rho_min, double(k) / (n_rho - 1)));
  return r;
}

std::size_t PicardGrid::size() const {
  return times().size() * static_cast<std::size_t>(n_rho) * n_theta * std::max(1, n_phi);
}

double y1_weight(double t, const Vec3& x, double eta) {
  const double r = x.norm();
  return std::pow(r + std::sqrt(t), 1.0 - eta) * std::pow(r, eta);
}

namespace {

/// Weight (rho + 1)^{1-eta} rho^eta.
double rho_weight(double rho, double eta) { return std::pow(rho + 1.0, 1.0 - eta) * std::pow(rho, eta); }

struct Stencil {
  std::size_t i0 = 0, i1 = 0;
  double f = 0.0;
};

Stencil locate_clamped(const std::vector<double>& a, double v) {
  const std::size_t n = a.size();
  if (n == 1 || v <= a.front()) return {0, 0, 0.0};
  if (v >= a.back()) return {n - 1, n - 1, 0.0};
  const std::size_t hi = std::upper_bound(a.begin(), a.end(), v) - a.begin();
  const std::size_t lo = hi - 1;
  return {lo, hi, (v - a[lo]) / (a[hi] - a[lo])};
}

/// Uniform periodic nodes a_k = a_0 + k P / n.
Stencil locate_periodic(const std::vector<double>& a, double period, double v) {
  const std::size_t n = a.size();
  if (n == 1) return {0, 0, 0.0};
  const double h = period / n;
  double u = (v - a.front()) / h;
  u -= n * std::floor(u / n);
  std::size_t lo = static_cast<std::size_t>(std::floor(u));
  double f = u - lo;
  if (lo >= n) {
    lo = 0;
    f = 0.0;
  }
  return {lo, (lo + 1) % n, f};
}

Mat3 rotation_z(double phi) {
  Mat3 R = Mat3::Identity();
  const double c = std::cos(phi), s = std::sin(phi);
  R(0, 0) = c;
  R(0, 1) = -s;
  R(1, 0) = s;
  R(1, 1) = c;
  return R;
}

}  // namespace

GridField::GridField(const PicardGrid& grid, double eta, const Vec3& axis, std::vector<Vec3> weighted)
    : grid_(grid), eta_(eta), frame_(frame_with_pole(axis.normalized())), V_(std::move(weighted)) {
  grid_.validate();
  for (double t : grid_.times()) logt_.push_back(std::log(t));
  for (double r : grid_.rhos()) logrho_.push_back(std::log(r));
  for (int k = 0; k < grid_.n_theta; ++k) theta_.push_back(kPi * k / (grid_.n_theta - 1));
  if (grid_.n_phi == 0)
    phi_.push_back(0.0);
  else
    for (int k = 0; k < grid_.n_phi; ++k) phi_.push_back(2.0 * kPi * k / grid_.n_phi);
  nt_ = logt_.size();
  nr_ = logrho_.size();
  nth_ = theta_.size();
  nph_ = phi_.size();
  if (V_.empty()) V_.assign(nt_ * nr_ * nth_ * nph_, Vec3::Zero());
  if (V_.size() != nt_ * nr_ * nth_ * nph_) throw DomainError("grid value count does not match the grid");
}

std::pair<double, Vec3> GridField::node(std::size_t i) const {
  const std::size_t iph = i % nph_;
  const std::size_t ith = (i / nph_) % nth_;
  const std::size_t ir = (i / (nph_ * nth_)) % nr_;
  const std::size_t it = i / (nph_ * nth_ * nr_);
  const double t = std::exp(logt_[it]);
  const double r = std::sqrt(t) * std::exp(logrho_[ir]);
  const double th = theta_[ith], ph = phi_[iph];
  const Vec3 local(r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph), r * std::cos(th));
  return {t, frame_ * local};
}

Vec3 GridField::local_value(double logt, double logrho, double th, double ph) const {
  Stencil s[4];
  if (grid_.mode == TimeMode::discrete_self_similar)
    s[0] = locate_periodic(logt_, 2.0 * std::log(grid_.dss_lambda), logt);
  else
    s[0] = locate_clamped(logt_, logt);
  s[1] = locate_clamped(logrho_, logrho);
  s[2] = locate_clamped(theta_, th);
  s[3] = nph_ == 1 ? Stencil{} : locate_periodic(phi_, 2.0 * kPi, ph);
  Vec3 acc = Vec3::Zero();
  for (int c = 0; c < 16; ++c) {
    double w = 1.0;
    std::size_t idx[4];
    for (int d = 0; d < 4; ++d) {
      const bool up = (c >> d) & 1;
      const double f = s[d].f;
      w *= up ? f : 1.0 - f;
      idx[d] = up ? s[d].i1 : s[d].i0;
    }
    if (w == 0.0) continue;
    acc += w * V_[((idx[0] * nr_ + idx[1]) * nth_ + idx[2]) * nph_ + idx[3]];
  }
  return acc;
}

Vec3 GridField::operator()(double t, const Vec3& x) const {
  if (!(t > 0.0)) throw DomainError("grid fields are defined for t > 0");
  const Vec3 q = frame_.transpose() * x;
  const double r = q.norm();
  if (r == 0.0) return Vec3::Zero();
  const double rho = r / std::sqrt(t);
  const double th = std::acos(std::clamp(q[2] / r, -1.0, 1.0));
  const double ph = std::atan2(q[1], q[0]);
  Vec3 v;
  if (nph_ == 1)
    v = rotation_z(ph) * local_value(std::log(t), std::log(rho), th, 0.0);
  else
    v = local_value(std::log(t), std::log(rho), th, ph);
  return frame_ * v / (rho_weight(rho, eta_) * std::sqrt(t));
}

FieldHandle GridField::handle() const {
  auto self = std::make_shared<const GridField>(*this);
  return FieldHandle::vector_st([self](double t, const Vec3& x) { return (*self)(t, x); });
}

double GridField::y1_norm() const {
  double m = 0.0;
  for (const Vec3& v : V_) m = std::max(m, v.norm());
  return m;
}

double GridField::gradient_norm() const {
  const double step = 0.25 * (logrho_[1] - logrho_[0]);
  double m = 0.0;
  for (std::size_t i = 0; i < V_.size(); ++i) {
    const auto [t, x] = node(i);
    const double r = x.norm();
    const double h = step * r;
    Mat3 g;
    for (int j = 0; j < 3; ++j) {
      Vec3 xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      g.col(j) = ((*this)(t, xp) - (*this)(t, xm)) / (2.0 * h);
    }
    m = std::max(m, std::pow(r + std::sqrt(t), 1.0 - eta_) * std::pow(r, 1.0 + eta_) * g.norm());
  }
  return m;
}

// ---------------------------------------------------------------------------

Vec3 linear_part(const PerturbedProblem& problem, double t, const Vec3& x, const SpatialRule& rule) {
  if (!(t > 0.0)) throw DomainError("linear_part requires t > 0");
  const FieldHandle& w0 = problem.w0();
  auto eval = [&](const SpatialRule& r) {
    return two_center_integral(
        x, {std::sqrt(t), x.norm()}, r, [&](const Vec3& y) { return Vec3(heat_kernel(t, x - y) * w0.vector_at(0.0, y)); },
        Vec3(Vec3::Zero()));
  };
  const Vec3 v = eval(rule);
  const Vec3 vh = eval(rule.halved());
  const double scale = std::max(problem.eps() / (x.norm() + std::sqrt(t)), v.norm());
  if (!v.allFinite() || (v - vh).norm() > 1e-3 * scale)
    throw ConvergenceError("heat convolution did not converge at t=" + std::to_string(t) + ", x=" + format_point(x) +
                           " (halved-rule difference " + std::to_string((v - vh).norm()) + ")");
  return v;
}

PotentialQuadratureSpec picard_quadrature() {
  PotentialQuadratureSpec s;
  s.finite_horizon = true;
  s.parabolic_data_scale = true;
  s.data_scale = 1.0;
  s.time_order = 4;
  s.time_ratio = 4.0;
  s.time_inner = 0.25;
  s.space = SpatialRule{4, 4.0, 6, 8};
  s.estimate_error = false;
  return s;
}

Vec3 nonlinear_part(const PerturbedProblem& problem, const FieldHandle& w, double y1_bound, double t, const Vec3& x,
                    const PotentialQuadratureSpec& spec) {
  if (!(t > 0.0)) throw DomainError("nonlinear_part requires t > 0");
  if (!spec.finite_horizon) throw DomainError("nonlinear_part integrates over [0, t]: use a finite-horizon spec");
  require_vector_space(w, "w");
  const FieldHandle U = problem.U(), Ut = problem.U_tilde();
  const double eta = problem.eta();
  const double unorm = std::max({problem.eps(), problem.U_norm(), problem.U_tilde_norm()}) * (1.0 + 1e-6);
  const FieldHandle G = FieldHandle::tensor_st([w, U, Ut](double tau, const Vec3& y) {
    const Vec3 wv = w.vector_at(tau, y);
    const Vec3 u = U.vector_at(tau, y), ut = Ut.vector_at(tau, y);
    const Mat3 F = wv * wv.transpose() + u * wv.transpose() + wv * ut.transpose();
    return Mat3(F.transpose());
  });
  const Envelope env = [y1_bound, eta, unorm](double tau, const Vec3& y) {
    const double r = y.norm();
    const double b = y1_bound * std::pow(r + std::sqrt(tau), eta - 1.0) * std::pow(r, -eta);
    return b * (b + 2.0 * unorm / r);
  };
  return theta_apply(G, t, x, spec, env).value;
}

// ---------------------------------------------------------------------------

PicardResult picard_solve(const PerturbedProblem& problem, const PicardGrid& grid, const PicardOptions& options) {
  grid.validate();
  if (grid.n_phi == 0 && !problem.axisymmetric())
    throw DomainError("an axisymmetric grid (n_phi = 0) needs an axisymmetric problem");
  if (options.max_iter < 1 || !(options.tol > 0.0)) throw DomainError("picard_solve needs max_iter >= 1 and tol > 0");
  const double eta = problem.eta();
  const GridField shape(grid, eta, problem.axis(), {});
  const std::size_t n = grid.size();
  const Mat3 frameT = frame_with_pole(problem.axis()).transpose();

  /// Node values are stored in the frame of the axis.
  auto weighted = [&](std::size_t i, const Vec3& w) {
    const auto [t, x] = shape.node(i);
    return Vec3(rho_weight(x.norm() / std::sqrt(t), eta) * std::sqrt(t) * (frameT * w));
  };

  const std::vector<Vec3> VL = parallel_map<Vec3>(n, [&](std::size_t i) {
    const auto [t, x] = shape.node(i);
    return weighted(i, linear_part(problem, t, x, options.linear_rule));
  });

  PicardResult out;
  PicardState& st = out.state;
  st.iterates.push_back(std::make_shared<const GridField>(grid, eta, problem.axis(), VL));
  st.linear_norm = st.iterates.back()->y1_norm();

  int bad_steps = 0;
  for (int k = 0; k < options.max_iter; ++k) {
    const auto cur = st.iterates.back();
    const FieldHandle wk = cur->handle();
    const double Y = cur->y1_norm();
    std::vector<Vec3> next = parallel_map<Vec3>(n, [&](std::size_t i) {
      const auto [t, x] = shape.node(i);
      return Vec3(VL[i] + weighted(i, nonlinear_part(problem, wk, Y, t, x, options.quadrature)));
    });
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d = std::max(d, (next[i] - cur->weighted()[i]).norm());
    st.iterates.push_back(std::make_shared<const GridField>(grid, eta, problem.axis(), std::move(next)));
    ++st.iterations;
    if (!st.distances.empty()) {
      const double prev = st.distances.back();
      const double q = prev > 0.0 ? d / prev : 0.0;
      st.contraction_factors.push_back(q);
      bad_steps = q >= 1.0 ? bad_steps + 1 : 0;
    }
    st.distances.push_back(d);
    if (d < options.tol) {
      st.converged = true;
      st.returned = st.iterates.size() - 2;
      st.residual = d;
      double nn = 0.0;
      for (std::size_t i = 0; i < n; ++i) nn = std::max(nn, (st.iterates.back()->weighted()[i] - VL[i]).norm());
      st.nonlinear_norm = nn;
      break;
    }
    if (bad_steps >= 3)
      throw DivergenceError("Picard iteration diverges: contraction factor >= 1 on 3 consecutive steps (eps = " +
                            std::to_string(problem.eps()) + " too large)");
  }
  for (const auto& it : st.iterates) {
    st.y1_norms.push_back(it->y1_norm());
    st.y2_norms.push_back(it->y1_norm() + it->gradient_norm());
  }
  if (!st.converged)
    throw ConvergenceError("Picard iteration did not reach tol " + std::to_string(options.tol) + " in " +
                           std::to_string(options.max_iter) + " steps (last distance " +
                           std::to_string(st.distances.back()) + ")");
  out.w = st.solution()->handle();
  return out;
}

FieldHandle nystrom_field(const PerturbedProblem& problem, const PicardState& state,
                          const PotentialQuadratureSpec& spec) {
  if (state.iterates.empty()) throw DomainError("empty Picard state");
  const auto w = state.solution();
  const FieldHandle wh = w->handle();
  const double Y = w->y1_norm();
  const PerturbedProblem p = problem;
  return FieldHandle::vector_st([p, wh, Y, spec](double t, const Vec3& x) {
    return Vec3(linear_part(p, t, x) + nonlinear_part(p, wh, Y, t, x, spec));
  });
}

double check_self_similarity(const FieldHandle& w, double lambda, const std::vector<double>& probe_times,
                             const std::vector<Vec3>& points, double eta) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  double dev = 0.0;
  for (double t : probe_times) {
    for (const Vec3& x : points) {
      const Vec3 a = lambda * w.vector_at(lambda * lambda * t, lambda * x);
      const Vec3 b = w.vector_at(t, x);
      dev = std::max(dev, (a - b).norm() * y1_weight(t, x, eta));
    }
  }
  return dev;
}

// ---------------------------------------------------------------------------

double model_integral(double t, const Vec3& x, double eta, int k, const SpatialRule& rule, int time_order) {
  if (!(t > 0.0)) throw DomainError("model_integral requires t > 0");
  if (!(x.norm() > 0.0)) throw DomainError("model_integral requires x != 0");
  if (!(eta >= 0.0 && eta < 1.0) || k < 1 || k + eta >= 3.0) throw DomainError("model_integral needs 0 <= eta < 1, k >= 1");
  PotentialQuadratureSpec spec;
  spec.finite_horizon = true;
  spec.time_order = time_order;
  spec.data_scale = std::sqrt(t);
  const Rule1D tr = spec.time_rule(t, x.norm(), t);
  double acc = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double s = tr.x[i];
    const double ss = std::sqrt(s), st = std::sqrt(t - s);
    acc += tr.w[i] * two_center_integral(
                         x, {ss, x.norm(), st}, rule,
                         [&](const Vec3& y) {
                           const double d = (x - y).norm();
                           return std::pow(y.norm() + ss, -4.0) * std::pow(d + st, eta - 1.0) * std::pow(d, -k - eta);
                         },
                         0.0);
  }
  return acc;
}

LogWitness log_correction_witness(const PerturbedProblem& problem, const std::vector<int>& j_values, double t) {
  if (problem.U_is_zero()) throw DomainError("the log-correction witness concerns U != 0");
  if (j_values.size() < 2) throw DomainError("the witness needs at least two dyadic steps");
  const Vec3 e = Vec3(1.0, 1.0, 1.0).normalized();
  const double st = std::sqrt(t);
  LogWitness w;
  for (int j : j_values) {
    const double r = st * std::pow(2.0, -j);
    w.x_norms.push_back(r);
    w.weighted.push_back(model_integral(t, r * e, 0.0, 1) * (r + st));
    w.log_factor.push_back(std::log(st / (2.0 * r)));
  }
  w.monotone = true;
  for (std::size_t i = 1; i < w.weighted.size(); ++i) {
    w.differences.push_back(w.weighted[i] - w.weighted[i - 1]);
    if (!(w.differences.back() > 0.0)) w.monotone = false;
  }
  const int dj = j_values.back() - j_values[j_values.size() - 2];
  w.slope = w.differences.back() / dj;
  w.at_parabolic = model_integral(t, st * e, 0.0, 1) * 2.0 * st;
  return w;
}

double pressure_from_flux(const std::function<Mat3(const Vec3&)>& F, const Vec3& x, const std::vector<double>& scales,
                          const SpatialRule& rule) {
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("pressure is evaluated away from the origin");
  const Mat3 Fx = F(x);
  const double R = 0.25 * r;
  std::vector<double> sc = scales;
  sc.push_back(r);
  sc.push_back(R);
  const double pv = two_center_integral(
      x, sc, rule,
      [&](const Vec3& y) {
        const Vec3 z = x - y;
        const double d = z.norm();
        if (d == 0.0) return 0.0;
        const double chi = 1.0 - smooth_step(d / R - 1.0);
        const Mat3 G = F(y) - chi * Fx;
        return (3.0 * z.dot(G * z) - d * d * G.trace()) / (4.0 * kPi * std::pow(d, 5));
      },
      0.0);
  return pv - Fx.trace() / 3.0;
}

double pressure(const PerturbedProblem& problem, const FieldHandle& w, double t, const Vec3& x, const SpatialRule& rule) {
  if (!(t > 0.0)) throw DomainError("pressure requires t > 0");
  const FieldHandle U = problem.U(), Ut = problem.U_tilde();
  const auto F = [&](const Vec3& y) {
    const Vec3 wv = w.vector_at(t, y);
    return Mat3(wv * wv.transpose() + U.vector_at(t, y) * wv.transpose() + wv * Ut.vector_at(t, y).transpose());
  };
  return pressure_from_flux(F, x, {std::sqrt(t)}, rule);
}

}  // namespace nsasym
