#include "nsasym/fields.hpp"

#include "nsasym/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace nsasym {

namespace {
std::atomic<int> g_jobs{1};
}

void set_jobs(int jobs) { g_jobs = std::max(1, jobs); }
int jobs() { return g_jobs.load(); }

int component_count(Arity a) {
  switch (a) {
    case Arity::scalar:
      return 1;
    case Arity::vector3:
      return 3;
    case Arity::tensor3x3:
      return 9;
  }
  return 0;
}

FieldHandle::FieldHandle(Arity arity, FieldDomain domain, EvalFn eval, GradFn grad)
    : arity_(arity), domain_(domain), eval_(std::move(eval)), grad_(std::move(grad)) {
  if (!eval_) throw DomainError("FieldHandle requires an evaluator");
}

FieldHandle FieldHandle::scalar(std::function<double(const Vec3&)> f) {
  return {Arity::scalar, FieldDomain::space, [f](double, const Vec3& x) {
            FieldValue v(1);
            v[0] = f(x);
            return v;
          }};
}

FieldHandle FieldHandle::scalar_st(std::function<double(double, const Vec3&)> f) {
  return {Arity::scalar, FieldDomain::space_time, [f](double t, const Vec3& x) {
            FieldValue v(1);
            v[0] = f(t, x);
            return v;
          }};
}

FieldHandle FieldHandle::vector(std::function<Vec3(const Vec3&)> f, std::function<Mat3(const Vec3&)> grad) {
  GradFn g;
  if (grad) g = [grad](double, const Vec3& x) { return FieldGradient(grad(x)); };
  return {Arity::vector3, FieldDomain::space, [f](double, const Vec3& x) { return FieldValue(f(x)); },
          std::move(g)};
}

FieldHandle FieldHandle::vector_st(std::function<Vec3(double, const Vec3&)> f,
                                   std::function<Mat3(double, const Vec3&)> grad) {
  GradFn g;
  if (grad) g = [grad](double t, const Vec3& x) { return FieldGradient(grad(t, x)); };
  return {Arity::vector3, FieldDomain::space_time, [f](double t, const Vec3& x) { return FieldValue(f(t, x)); },
          std::move(g)};
}

namespace {
FieldValue flatten(const Mat3& m) {
  FieldValue v(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v[3 * i + j] = m(i, j);
  return v;
}
}  // namespace

FieldHandle FieldHandle::tensor(std::function<Mat3(const Vec3&)> f) {
  return {Arity::tensor3x3, FieldDomain::space, [f](double, const Vec3& x) { return flatten(f(x)); }};
}

FieldHandle FieldHandle::tensor_st(std::function<Mat3(double, const Vec3&)> f) {
  return {Arity::tensor3x3, FieldDomain::space_time, [f](double t, const Vec3& x) { return flatten(f(t, x)); }};
}

FieldHandle FieldHandle::zero(Arity arity, FieldDomain domain) {
  const int n = component_count(arity);
  return {arity, domain, [n](double, const Vec3&) { return FieldValue(FieldValue::Zero(n)); },
          [n](double, const Vec3&) { return FieldGradient(FieldGradient::Zero(n, 3)); }};
}

FieldValue FieldHandle::operator()(double t, const Vec3& x) const {
  FieldValue v = eval_(t, x);
  if (v.size() != components())
    throw EvaluationError("field returned " + std::to_string(v.size()) + " components, expected " +
                          std::to_string(components()));
  return v;
}

double FieldHandle::scalar_at(double t, const Vec3& x) const {
  if (arity_ != Arity::scalar) throw DomainError("scalar_at on a non-scalar field");
  return (*this)(t, x)[0];
}

Vec3 FieldHandle::vector_at(double t, const Vec3& x) const {
  if (arity_ != Arity::vector3) throw DomainError("vector_at on a non-vector field");
  const FieldValue v = (*this)(t, x);
  return {v[0], v[1], v[2]};
}

Mat3 FieldHandle::tensor_at(double t, const Vec3& x) const {
  if (arity_ != Arity::tensor3x3) throw DomainError("tensor_at on a non-tensor field");
  const FieldValue v = (*this)(t, x);
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = v[3 * i + j];
  return m;
}

FieldGradient FieldHandle::gradient(double t, const Vec3& x) const {
  if (!grad_) throw EvaluationError("field has no analytic gradient");
  FieldGradient g = grad_(t, x);
  if (g.rows() != components()) throw EvaluationError("analytic gradient has wrong row count");
  return g;
}

// ---------------------------------------------------------------------------
// Grid

std::string GridSpec::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "r_min=" << r_min << "\n"
     << "r_max=" << r_max << "\n"
     << "n_r=" << n_r << "\n"
     << "n_theta=" << n_theta << "\n"
     << "n_phi=" << n_phi << "\n";
  return os.str();
}

GridSpec GridSpec::from_text(const std::string& text) {
  GridSpec g;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "r_min")
      g.r_min = std::stod(val);
    else if (key == "r_max")
      g.r_max = std::stod(val);
    else if (key == "n_r")
      g.n_r = std::stoi(val);
    else if (key == "n_theta")
      g.n_theta = std::stoi(val);
    else if (key == "n_phi")
      g.n_phi = std::stoi(val);
    else
      throw DomainError("unknown grid key '" + key + "'");
  }
  return g;
}

RadialSphericalGrid::RadialSphericalGrid(const GridSpec& spec) : spec_(spec), sphere_(spec.n_theta, spec.n_phi) {
  if (!(spec.r_min > 0.0)) throw DomainError("grid r_min must be positive");
  if (!(spec.r_max > spec.r_min)) throw DomainError("grid r_max must exceed r_min");
  if (spec.n_r < 2) throw DomainError("grid needs at least two radii");
  const double q = std::pow(spec.r_max / spec.r_min, 1.0 / (spec.n_r - 1));
  const double sq = std::sqrt(q);
  radii_.resize(spec.n_r);
  shell_volume_factor_.resize(spec.n_r);
  for (int i = 0; i < spec.n_r; ++i) {
    radii_[i] = (i == spec.n_r - 1) ? spec.r_max : spec.r_min * std::pow(q, i);
    const double lo = radii_[i] / sq, hi = radii_[i] * sq;
    shell_volume_factor_[i] = (hi * hi * hi - lo * lo * lo) / 3.0;
  }
}

Vec3 RadialSphericalGrid::node(std::size_t i) const {
  const std::size_t ns = sphere_.nodes().size();
  return radii_[i / ns] * sphere_.nodes()[i % ns].direction;
}

double RadialSphericalGrid::cell_volume(std::size_t i) const {
  const std::size_t ns = sphere_.nodes().size();
  return shell_volume_factor_[i / ns] * sphere_.nodes()[i % ns].weight;
}

// ---------------------------------------------------------------------------
// Norms

namespace {

std::vector<double> magnitudes(const FieldHandle& f, const RadialSphericalGrid& grid, double t) {
  return parallel_map<double>(grid.size(), [&](std::size_t i) {
    const Vec3 x = grid.node(i);
    const FieldValue v = f(t, x);
    if (!v.allFinite()) throw EvaluationError("non-finite field value at grid node " + format_point(x));
    return v.norm();
  });
}

}  // namespace

double xk_norm(const FieldHandle& f, double k, const RadialSphericalGrid& grid, double t) {
  if (!(k > 0.0)) throw DomainError("xk_norm requires k > 0");
  const auto mags = magnitudes(f, grid, t);
  double best = 0.0;
  for (std::size_t i = 0; i < mags.size(); ++i) {
    const double r = grid.node(i).norm();
    best = std::max(best, std::pow(1.0 + r, k) * mags[i]);
  }
  return best;
}

double weak_lq_norm(const FieldHandle& f, double q, const RadialSphericalGrid& grid, double t) {
  if (!(q > 1.0)) throw DomainError("weak_lq_norm requires q > 1");
  const auto mags = magnitudes(f, grid, t);
  std::vector<std::size_t> order(mags.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mags[a] > mags[b]; });
  double measure = 0.0, best = 0.0;
  for (std::size_t idx : order) {
    measure += grid.cell_volume(idx);
    best = std::max(best, mags[idx] * std::pow(measure, 1.0 / q));
  }
  return best;
}

NormReport norm_report(const FieldHandle& f, double k, double q, const RadialSphericalGrid& grid) {
  return {xk_norm(f, k, grid), weak_lq_norm(f, q, grid), grid.spec()};
}

// ---------------------------------------------------------------------------
// Finite differences

double default_fd_step(const Vec3& x) { return 1e-4 * std::max(1.0, x.norm()); }

namespace {

FieldValue eval_checked(const FieldHandle& f, double t, const Vec3& x) {
  FieldValue v = f(t, x);
  if (!v.allFinite()) throw EvaluationError("stencil point not evaluable: " + format_point(x));
  return v;
}

void check_step(double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
}

}  // namespace

FieldGradient fd_gradient(const FieldHandle& f, double t, const Vec3& x, double h) {
  check_step(h);
  if (f.has_analytic_gradient()) return f.gradient(t, x);
  FieldGradient g(f.components(), 3);
  for (int j = 0; j < 3; ++j) {
    Vec3 xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g.col(j) = (eval_checked(f, t, xp) - eval_checked(f, t, xm)) / (2.0 * h);
  }
  return g;
}

double fd_divergence(const FieldHandle& f, double t, const Vec3& x, double h) {
  if (f.arity() != Arity::vector3) throw DomainError("divergence needs a vector field");
  return fd_gradient(f, t, x, h).trace();
}

FieldValue fd_laplacian(const FieldHandle& f, double t, const Vec3& x, double h) {
  check_step(h);
  const FieldValue c = eval_checked(f, t, x);
  FieldValue acc = FieldValue::Zero(c.size());
  for (int j = 0; j < 3; ++j) {
    Vec3 xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    acc += eval_checked(f, t, xp) + eval_checked(f, t, xm) - 2.0 * c;
  }
  return acc / (h * h);
}

Eigen::MatrixXd fd_derivative(const FieldHandle& f, DerivativeKind kind, const Vec3& x, double h, double t) {
  switch (kind) {
    case DerivativeKind::grad:
      return fd_gradient(f, t, x, h);
    case DerivativeKind::div: {
      Eigen::MatrixXd m(1, 1);
      m(0, 0) = fd_divergence(f, t, x, h);
      return m;
    }
    case DerivativeKind::laplacian:
      return fd_laplacian(f, t, x, h);
  }
  throw DomainError("unknown derivative kind");
}

// ---------------------------------------------------------------------------
// Integrals

FieldValue sphere_integral(const FieldHandle& f, double rho, const SphereRule& rule, double t) {
  if (!(rho > 0.0)) throw DomainError("sphere radius must be positive");
  FieldValue acc = FieldValue::Zero(f.components());
  for (const auto& n : rule.nodes()) {
    const Vec3 x = rho * n.direction;
    const FieldValue v = f(t, x);
    if (!v.allFinite()) throw EvaluationError("non-finite value on sphere at " + format_point(x));
    acc += n.weight * v;
  }
  return acc * (rho * rho);
}

FieldValue ball_integral(const FieldHandle& f, double radius, int n_radial, const SphereRule& rule, double t) {
  const auto& gl = gauss_legendre(n_radial);
  FieldValue acc = FieldValue::Zero(f.components());
  for (int i = 0; i < n_radial; ++i) {
    const double r = 0.5 * radius * (gl.nodes[i] + 1.0);
    const double w = 0.5 * radius * gl.weights[i];
    acc += w * sphere_integral(f, r, rule, t);
  }
  return acc;
}

}  // namespace nsasym
