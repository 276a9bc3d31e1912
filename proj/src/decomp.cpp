#include "nsasym/decomp.hpp"

#include <cmath>

namespace nsasym {

namespace {

double expm(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
double expm_derivative(double s) { return s > 0.0 ? std::exp(-1.0 / s) / (s * s) : 0.0; }

/// rho(r) = 1 for r <= 1, 0 for r >= 2.
double rho(double r) { return 1.0 - smooth_step(r - 1.0); }

constexpr double kR1 = 0.57735026918962576;  // 3^{-1/2}

/// psi(t) = 0 for t < -R1, 1 for t > R1.
double psi1(double t) { return smooth_step((t + kR1) / (2.0 * kR1)); }
double psi1_prime(double t) { return smooth_step_derivative((t + kR1) / (2.0 * kR1)) / (2.0 * kR1); }

Rule1D unit_rule(int panels, int order) { return composite_gl(0.0, 1.0, panels, order); }

template <class F>
FieldValue line(const Rule1D& unit, double a, double b, int nc, F&& g) {
  FieldValue acc = FieldValue::Zero(nc);
  if (!(b > a)) return acc;
  const double len = b - a;
  for (std::size_t i = 0; i < unit.size(); ++i) acc += (unit.w[i] * len) * g(a + len * unit.x[i]);
  return acc;
}

/// int_a^b g with the interval split where a line at squared distance perp2
/// from the origin crosses the cutoff radii of the dyadic pieces.
template <class F>
FieldValue line_broken(const Rule1D& unit, double a, double b, double perp2, int nc, F&& g) {
  FieldValue acc = FieldValue::Zero(nc);
  if (!(b > a)) return acc;
  double cuts[10];
  int n = 0;
  cuts[n++] = a;
  for (double rad : {-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0}) {
    const double q = rad * rad - perp2;
    if (q <= 0.0) continue;
    const double t = std::copysign(std::sqrt(q), rad);
    if (t > a && t < b) cuts[n++] = t;
  }
  cuts[n++] = b;
  for (int i = 0; i + 1 < n; ++i) acc += line(unit, cuts[i], cuts[i + 1], nc, g);
  return acc;
}

/// Chebyshev interpolant of a vector-valued function on [a, b].
struct Cheb {
  double a = -1.0, b = 1.0;
  Eigen::MatrixXd c;  ///< N x components, f = c_0/2 + sum c_k T_k

  template <class F>
  static Cheb fit(double a, double b, int n, int nc, F&& f) {
    Cheb ch;
    ch.a = a;
    ch.b = b;
    Eigen::MatrixXd vals(n, nc);
    for (int j = 0; j < n; ++j) {
      const double u = std::cos(kPi * (j + 0.5) / n);
      vals.row(j) = f(0.5 * (a + b) + 0.5 * (b - a) * u).transpose();
    }
    ch.c = Eigen::MatrixXd::Zero(n, nc);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) ch.c.row(k) += (2.0 / n) * std::cos(kPi * k * (j + 0.5) / n) * vals.row(j);
    return ch;
  }

  Eigen::VectorXd operator()(double x) const {
    const double u = (2.0 * x - a - b) / (b - a);
    const int n = static_cast<int>(c.rows());
    Eigen::RowVectorXd b1 = Eigen::RowVectorXd::Zero(c.cols()), b2 = b1;
    for (int k = n - 1; k >= 1; --k) {
      const Eigen::RowVectorXd t = 2.0 * u * b1 - b2 + c.row(k);
      b2 = b1;
      b1 = t;
    }
    return (u * b1 - b2 + 0.5 * c.row(0)).transpose();
  }

  /// Antiderivative vanishing at a.
  Cheb primitive() const {
    const int n = static_cast<int>(c.rows());
    Cheb p;
    p.a = a;
    p.b = b;
    p.c = Eigen::MatrixXd::Zero(n + 1, c.cols());
    const double scale = 0.5 * (b - a);
    for (int k = 1; k <= n; ++k) {
      const Eigen::RowVectorXd lo = c.row(k - 1);
      const Eigen::RowVectorXd hi = k + 1 < n ? Eigen::RowVectorXd(c.row(k + 1)) : Eigen::RowVectorXd::Zero(c.cols());
      p.c.row(k) = scale * (lo - hi) / (2.0 * k);
    }
    p.c.row(0) = -2.0 * p(a).transpose();
    return p;
  }
};

/// Primitive of a function on [-2, 2] from Chebyshev fits on the segments
/// between the cutoff radii; vanishes at -2.
struct PiecewisePrimitive {
  std::vector<double> cuts{-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0};
  std::vector<Cheb> prims;
  std::vector<Eigen::VectorXd> offsets;

  template <class F>
  PiecewisePrimitive(int nodes_per_segment, int nc, F&& f) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(nc);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      prims.push_back(Cheb::fit(cuts[i], cuts[i + 1], nodes_per_segment, nc, f).primitive());
      offsets.push_back(acc);
      acc += prims.back()(cuts[i + 1]);
    }
    offsets.push_back(acc);
  }

  Eigen::VectorXd operator()(double x) const {
    if (x <= cuts.front()) return Eigen::VectorXd::Zero(offsets.front().size());
    if (x >= cuts.back()) return offsets.back();
    std::size_t i = 0;
    while (x > cuts[i + 1]) ++i;
    return offsets[i] + prims[i](x);
  }
};

double japanese_bracket(double x) { return std::pow(1.0 + x * x, 0.5); }

}  // namespace

double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double p = expm(u), q = expm(1.0 - u);
  return p / (p + q);
}

double smooth_step_derivative(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double p = expm(u), q = expm(1.0 - u);
  const double dp = expm_derivative(u), dq = -expm_derivative(1.0 - u);
  return (dp * q - p * dq) / ((p + q) * (p + q));
}

// ---------------------------------------------------------------------------

struct ForceDecomposition::Piece {
  PiecewisePrimitive G1;
  Eigen::VectorXd I;
};

ForceDecomposition::ForceDecomposition(FieldHandle f, double R, double a, double M, DecompOptions options)
    : f_(std::move(f)), R_(R), a_(a), M_(M), L_(0.5 * R), opt_(options) {
  if (!(R > 0.0)) throw DomainError("decompose_force requires R > 0");
  if (!(a > 3.0)) throw DomainError("decompose_force requires a > 3 (got " + std::to_string(a) + ")");
  if (!(M > 0.0)) throw DomainError("decompose_force requires an envelope constant M > 0");
  if (f_.arity() == Arity::tensor3x3) throw DomainError("decompose_force expects a scalar or vector field");
  nc_ = f_.components();
  line_unit_ = unit_rule(opt_.line_panels, opt_.line_order);
  // int phi = (1 - 1/8) int rho.
  const Rule1D r = composite_gl(0.0, 2.0, 8, 16);
  double m = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) m += r.w[i] * 4.0 * kPi * r.x[i] * r.x[i] * rho(r.x[i]);
  phi_integral_ = 0.875 * m;
}

double ForceDecomposition::phi(const Vec3& y) const {
  const double r = y.norm();
  return rho(r) - rho(2.0 * r);
}

FieldValue ForceDecomposition::f0(const Vec3& x) const {
  const double r = x.norm();
  if (r >= R_) return FieldValue::Zero(nc_);
  return f_(0.0, x) * rho(r / L_) + coefficient(0) * phi(x / L_);
}

FieldValue ForceDecomposition::exterior_mass(double r0, bool weighted) const {
  // int f(x) (1 - rho(|x| / r0)) dx, or int_{|x| > r0} f without the weight.
  Rule1D radial = composite_gl(r0, 2.0 * r0, 8, 16);
  if (weighted)
    for (std::size_t i = 0; i < radial.size(); ++i) radial.w[i] *= 1.0 - rho(radial.x[i] / r0);
  const double outer = 2.0 * r0 * std::pow(4.0, 12);
  const auto& gl = gauss_legendre(16);
  for (int p = 0; p < 12; ++p) {
    const double lo = std::log(2.0 * r0) + p * std::log(4.0), h = std::log(4.0);
    for (int i = 0; i < 16; ++i) {
      const double rr = std::exp(lo + 0.5 * h * (gl.nodes[i] + 1.0));
      radial.add(rr, 0.5 * h * gl.weights[i] * rr);
    }
  }
  for (int i = 0; i < 16; ++i) {
    const double u = 0.5 * (gl.nodes[i] + 1.0);
    radial.add(outer / u, 0.5 * gl.weights[i] * outer / (u * u));
  }
  const SphereRule sphere(opt_.sphere_theta, opt_.sphere_phi);
  FieldValue acc = FieldValue::Zero(nc_);
  for (std::size_t i = 0; i < radial.size(); ++i) {
    const double rr = radial.x[i];
    for (const auto& n : sphere.nodes()) acc += (radial.w[i] * rr * rr * n.weight) * f_(0.0, Vec3(rr * n.direction));
  }
  return acc;
}

FieldValue ForceDecomposition::coefficient(int k) const {
  if (k < 0) throw DomainError("dyadic coefficients start at k = 0");
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = coeffs_.find(k);
    if (it != coeffs_.end()) return it->second;
  }
  const double scale = std::ldexp(L_, k);
  const FieldValue ak = exterior_mass(scale, true) / (scale * scale * scale * phi_integral_);
  std::lock_guard<std::mutex> lock(mu_);
  coeffs_.emplace(k, ak);
  return ak;
}

FieldValue ForceDecomposition::piece(int k, const Vec3& x) const {
  if (k < 1) throw DomainError("pieces f_k are indexed from k = 1");
  const double scale = std::ldexp(L_, k);
  const double r = x.norm() / scale;
  if (r <= 0.25 || r >= 2.0) return FieldValue::Zero(nc_);
  const Vec3 y = x / scale;
  return (f_(0.0, x) + coefficient(k)) * phi(y) - coefficient(k - 1) * phi(2.0 * y);
}

FieldValue ForceDecomposition::tilde(int k, const Vec3& y) const { return piece(k, std::ldexp(L_, k) * y); }

FieldValue ForceDecomposition::tilde_bound(int k) const {
  const double lo = std::ldexp(L_, k - 2);
  FieldValue b = coefficient(k).cwiseAbs() + coefficient(k - 1).cwiseAbs();
  b.array() += M_ * std::pow(1.0 + lo * lo, -0.5 * a_);
  return b;
}

const ForceDecomposition::Piece& ForceDecomposition::piece_data(int k) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = pieces_.find(k);
    if (it != pieces_.end()) return *it->second;
  }
  auto I3 = [&](double y1, double y2) {
    const double h2 = 4.0 - y1 * y1 - y2 * y2;
    if (h2 <= 0.0) return FieldValue(FieldValue::Zero(nc_));
    const double h = std::sqrt(h2);
    return line_broken(line_unit_, -h, h, y1 * y1 + y2 * y2, nc_, [&](double t) { return tilde(k, Vec3(y1, y2, t)); });
  };
  auto I2 = [&](double y1) {
    const double h2 = 4.0 - y1 * y1;
    if (h2 <= 0.0) return Eigen::VectorXd(Eigen::VectorXd::Zero(nc_));
    const double h = std::sqrt(h2);
    return Eigen::VectorXd(line_broken(line_unit_, -h, h, y1 * y1, nc_, [&](double s) { return I3(y1, s); }));
  };
  auto p = std::make_shared<Piece>(Piece{PiecewisePrimitive(opt_.cheb_nodes, nc_, I2), Eigen::VectorXd()});
  p->I = p->G1(2.0);
  std::lock_guard<std::mutex> lock(mu_);
  return *pieces_.emplace(k, std::move(p)).first->second;
}

ForceDecomposition::FluxMatrix ForceDecomposition::piece_F(int k, const Vec3& y) const {
  FluxMatrix out = FluxMatrix::Zero(nc_, 3);
  if (y.cwiseAbs().maxCoeff() >= 2.0) return out;
  auto line_t = [&](double y1, double y2, double hi) {
    const double h2 = 4.0 - y1 * y1 - y2 * y2;
    if (h2 <= 0.0) return FieldValue(FieldValue::Zero(nc_));
    const double h = std::sqrt(h2);
    return line_broken(line_unit_, -h, std::min(hi, h), y1 * y1 + y2 * y2, nc_,
                       [&](double t) { return tilde(k, Vec3(y1, y2, t)); });
  };
  auto line_s = [&](double y1, double hi) {
    const double h2 = 4.0 - y1 * y1;
    if (h2 <= 0.0) return FieldValue(FieldValue::Zero(nc_));
    const double h = std::sqrt(h2);
    return line_broken(line_unit_, -h, std::min(hi, h), y1 * y1, nc_, [&](double s) { return line_t(y1, s, 1e300); });
  };
  const double inf = 1e300;
  // F_3 = G_3 - psi(y3) I_3
  out.col(2) = line_t(y[0], y[1], y[2]) - psi1(y[2]) * line_t(y[0], y[1], inf);
  const double d3 = psi1_prime(y[2]);
  if (d3 != 0.0) {
    // F_2 = psi'(y3) [G_2 - psi(y2) I_2]
    out.col(1) = d3 * (line_s(y[0], y[1]) - psi1(y[1]) * line_s(y[0], inf));
    const double d2 = psi1_prime(y[1]);
    if (d2 != 0.0) {
      // F_1 = psi'(y2) psi'(y3) [G_1 - psi(y1) I]
      const Piece& p = piece_data(k);
      const Eigen::VectorXd G1 = y[0] <= -2.0 ? Eigen::VectorXd(Eigen::VectorXd::Zero(nc_)) : p.G1(y[0]);
      out.col(0) = d2 * d3 * (G1 - psi1(y[0]) * p.I);
    }
  }
  return out;
}

int ForceDecomposition::first_piece(const Vec3& x) const {
  const double m = x.cwiseAbs().maxCoeff();
  if (m < 2.0 * L_) return 1;
  return std::max(1, static_cast<int>(std::floor(std::log2(m / (2.0 * L_)))));
}

bool ForceDecomposition::tail_done(int k, const Vec3& x) const {
  const double scale = std::ldexp(L_, k);
  if (0.25 * scale <= x.norm()) return false;
  const double bound = 2000.0 * scale * tilde_bound(k).maxCoeff();
  const double r = x.norm();
  return bound < opt_.series_tol * M_ * std::pow(1.0 + r * r, 0.5 * (1.0 - a_));
}

ForceDecomposition::FluxMatrix ForceDecomposition::F(const Vec3& x) const {
  FluxMatrix acc = FluxMatrix::Zero(nc_, 3);
  for (int k = first_piece(x);; ++k) {
    if (k > opt_.max_depth)
      throw ConvergenceError("dyadic series did not reach its tolerance by depth " + std::to_string(opt_.max_depth) +
                             " at x=" + format_point(x));
    const double scale = std::ldexp(L_, k);
    acc += scale * piece_F(k, x / scale);
    if (tail_done(k + 1, x)) break;
  }
  return acc;
}

FieldValue ForceDecomposition::divergence_F(const Vec3& x) const {
  FieldValue acc = FieldValue::Zero(nc_);
  for (int k = first_piece(x);; ++k) {
    if (k > opt_.max_depth) throw ConvergenceError("dyadic series did not reach its tolerance");
    const double scale = std::ldexp(L_, k);
    const Vec3 y = x / scale;
    if (y.cwiseAbs().maxCoeff() < 2.0) {
      acc += piece(k, x);
      const double c = psi1_prime(y[0]) * psi1_prime(y[1]) * psi1_prime(y[2]);
      if (c != 0.0) acc -= c * piece_data(k).I;
    }
    if (tail_done(k + 1, x)) break;
  }
  return acc;
}

int ForceDecomposition::depth_at(const Vec3& x) const {
  int k = first_piece(x);
  while (!tail_done(k + 1, x) && k <= opt_.max_depth) ++k;
  return k - first_piece(x) + 1;
}

int ForceDecomposition::max_depth_used() const {
  std::lock_guard<std::mutex> lock(mu_);
  return coeffs_.empty() ? 0 : coeffs_.rbegin()->first;
}

FieldValue ForceDecomposition::piece_integral(int k) const {
  const double scale = std::ldexp(L_, k);
  const Rule1D radial = composite_gl(0.25 * scale, 2.0 * scale, 24, 16);
  const SphereRule sphere(opt_.sphere_theta, opt_.sphere_phi);
  FieldValue acc = FieldValue::Zero(nc_);
  for (std::size_t i = 0; i < radial.size(); ++i) {
    const double r = radial.x[i];
    for (const auto& n : sphere.nodes()) acc += (radial.w[i] * r * r * n.weight) * piece(k, Vec3(r * n.direction));
  }
  return acc;
}

FieldValue ForceDecomposition::f0_integral() const {
  const Rule1D radial = composite_gl(0.0, R_, 16, 16);
  const SphereRule sphere(opt_.sphere_theta, opt_.sphere_phi);
  FieldValue acc = FieldValue::Zero(nc_);
  for (std::size_t i = 0; i < radial.size(); ++i) {
    const double r = radial.x[i];
    for (const auto& n : sphere.nodes()) acc += (radial.w[i] * r * r * n.weight) * f0(Vec3(r * n.direction));
  }
  return acc;
}

FieldValue ForceDecomposition::total_integral() const {
  const Rule1D radial = composite_gl(0.0, R_, 16, 16);
  const SphereRule sphere(opt_.sphere_theta, opt_.sphere_phi);
  FieldValue acc = FieldValue::Zero(nc_);
  for (std::size_t i = 0; i < radial.size(); ++i) {
    const double r = radial.x[i];
    for (const auto& n : sphere.nodes()) acc += (radial.w[i] * r * r * n.weight) * f_(0.0, Vec3(r * n.direction));
  }
  return acc + exterior_mass(R_, false);
}

double ForceDecomposition::mass_defect() const { return (f0_integral() - total_integral()).norm(); }

DecompResult decompose_force(const FieldHandle& f, double R, double a, double M, const DecompOptions& options) {
  auto d = std::make_shared<ForceDecomposition>(f, R, a, M, options);
  // Envelope contract on a deterministic spiral of samples.
  const int n = options.envelope_samples;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double s = std::sqrt(1.0 - z * z);
    const Vec3 dir(s * std::cos(golden * i), s * std::sin(golden * i), z);
    const double r = std::pow(10.0, -2.0 + 5.0 * i / std::max(1, n - 1));
    const Vec3 x = r * dir;
    const double v = f(0.0, x).norm();
    const double bound = M * std::pow(1.0 + r * r, -0.5 * a);
    if (!(v <= bound * (1.0 + 1e-9)))
      throw ContractError("force exceeds M <x>^{-a} at x=" + format_point(x) + " (|f|=" + std::to_string(v) +
                          ", bound=" + std::to_string(bound) + ")");
  }
  DecompResult out;
  out.detail = d;
  out.support_radius = R;
  if (d->components() == 1) {
    out.f0 = FieldHandle::scalar([d](const Vec3& x) { return d->f0(x)[0]; });
    out.F = FieldHandle::vector([d](const Vec3& x) { return Vec3(d->F(x).row(0).transpose()); });
  } else {
    out.f0 = FieldHandle::vector([d](const Vec3& x) { return Vec3(d->f0(x)); });
    out.F = FieldHandle::tensor([d](const Vec3& x) { return Mat3(d->F(x)); });
  }
  const std::vector<Vec3> dirs{Vec3(1, 0, 0), Vec3(0, 0, 1), Vec3(1, 1, 1).normalized(), Vec3(0.6, -0.8, 0.0)};
  for (int i = 0; i < options.decay_radii; ++i) {
    const double r = options.decay_r_min *
                     std::pow(options.decay_r_max / options.decay_r_min, i / std::max(1.0, options.decay_radii - 1.0));
    for (const Vec3& e : dirs) {
      const double v = d->F(r * e).norm() * std::pow(japanese_bracket(r), a - 1.0);
      out.decay_constant = std::max(out.decay_constant, v);
    }
  }
  out.mass_defect = d->mass_defect();
  out.dyadic_depth = d->max_depth_used();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double bump_profile(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }
double bump_profile_derivative(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return std::exp(-1.0 / q) * (-2.0 * s / (q * q));
}

double mollifier_constant() {
  static const double c = [] {
    const Rule1D r = composite_gl(0.125, 0.25, 8, 24);
    double m = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) m += r.w[i] * 2.0 * kPi * r.x[i] * bump_profile(16.0 * (r.x[i] - 0.1875));
    return 1.0 / m;
  }();
  return c;
}

/// Polar rule for the mollifier integrals: (xi, weight).
struct XiNode {
  Eigen::Vector2d xi;
  double w;
  double r;
};

std::vector<XiNode> xi_rule(const ExtensionOptions& o) {
  std::vector<XiNode> nodes;
  const Rule1D radial = composite_gl(0.125, 0.25, 1, o.xi_radial);
  for (std::size_t i = 0; i < radial.size(); ++i) {
    for (int j = 0; j < o.xi_angular; ++j) {
      const double th = 2.0 * kPi * j / o.xi_angular;
      const double r = radial.x[i];
      nodes.push_back({Eigen::Vector2d(r * std::cos(th), r * std::sin(th)), radial.w[i] * r * 2.0 * kPi / o.xi_angular, r});
    }
  }
  return nodes;
}

bool in_K(double x1, double x2) { return std::abs(x1) < 1.0 && std::abs(x2) < 1.0; }

struct FlatExtension {
  PlanarData u;
  ExtensionOptions opt;
  std::vector<XiNode> xi;
  Rule1D unit;

  Vec3 data(double x1, double x2) const { return in_K(x1, x2) ? u(x1, x2) : Vec3::Zero(); }

  /// int_{-1}^{hi} u_*^3(x1, s) ds
  double column(double x1, double hi) const {
    if (!(std::abs(x1) < 1.0)) return 0.0;
    const double top = std::min(hi, 1.0);
    if (!(top > -1.0)) return 0.0;
    return line(unit, -1.0, top, 1, [&](double s) {
             FieldValue v(1);
             v[0] = u(x1, s)[2];
             return v;
           })[0];
  }
  double g(double x1) const { return column(x1, 1.0); }
  double g_primitive(double x1) const {
    const double top = std::min(x1, 1.0);
    if (!(top > -1.0)) return 0.0;
    return line(unit, -1.0, top, 1, [&](double s) {
             FieldValue v(1);
             v[0] = g(s);
             return v;
           })[0];
  }
  double f1(double x1, double x2) const {
    const double c = cutoff_derivative(x2);
    return c == 0.0 ? 0.0 : -c * g_primitive(x1);
  }
  double f2(double x1, double x2) const {
    if (!(std::abs(x1) < 1.0) || x2 <= -1.0) return 0.0;
    return column(x1, x2) - g(x1) * (1.0 - cutoff(x2));
  }

  Vec3 operator()(const Vec3& x) const {
    const double x3 = x[2];
    const double chi = cutoff(x3), dchi = cutoff_derivative(x3);
    if (chi == 0.0 && dchi == 0.0) return Vec3::Zero();
    const double c = mollifier_constant();
    Eigen::Vector2d M = Eigen::Vector2d::Zero(), A = Eigen::Vector2d::Zero();
    double B = 0.0;  // B_11 + B_22
    for (const auto& n : xi) {
      const Vec3 v = data(x[0] + x3 * n.xi[0], x[1] + x3 * n.xi[1]);
      if (v[0] == 0.0 && v[1] == 0.0) continue;
      const double s = 16.0 * (n.r - 0.1875);
      const double ph = c * bump_profile(s);
      const double dph = c * 16.0 * bump_profile_derivative(s);
      M += n.w * ph * v.head<2>();
      A -= n.w * (ph + n.r * dph) * v.head<2>();
      B -= n.w * dph / n.r * (n.xi[0] * v[0] + n.xi[1] * v[1]);
    }
    Vec3 out;
    out[0] = chi * A[0];
    out[1] = chi * A[1];
    if (dchi != 0.0) {
      out[0] += dchi * (x3 * M[0] - f1(x[0], x[1]));
      out[1] += dchi * (x3 * M[1] - f2(x[0], x[1]));
    }
    out[2] = chi * (data(x[0], x[1])[2] - B);
    return out;
  }
};

}  // namespace

double mollifier(double r) { return mollifier_constant() * bump_profile(16.0 * (r - 0.1875)); }
double mollifier_derivative(double r) { return mollifier_constant() * 16.0 * bump_profile_derivative(16.0 * (r - 0.1875)); }
double cutoff(double s) { return 1.0 - smooth_step(8.0 * (s - 0.125)); }
double cutoff_derivative(double s) { return -8.0 * smooth_step_derivative(8.0 * (s - 0.125)); }

ExtensionResult extend_flat(const PlanarData& u_star, const ExtensionOptions& options) {
  if (!u_star) throw DomainError("extend_flat needs boundary data");
  auto ext = std::make_shared<FlatExtension>();
  ext->u = u_star;
  ext->opt = options;
  ext->xi = xi_rule(options);
  ext->unit = unit_rule(options.line_panels, options.line_order);
  const double flux = ext->g_primitive(1.0);
  double scale = 0.0;
  for (double x1 : {-0.9, -0.5, 0.0, 0.5, 0.9})
    for (double x2 : {-0.9, -0.5, 0.0, 0.5, 0.9}) scale = std::max(scale, u_star(x1, x2).norm());
  if (std::abs(flux) > options.flux_tol * std::max(1.0, 4.0 * scale))
    throw ContractError("boundary data carries nonzero flux int u_*^3 = " + std::to_string(flux));
  ExtensionResult r;
  r.E = FieldHandle::vector([ext](const Vec3& x) { return (*ext)(x); });
  r.H = FieldHandle::zero(Arity::scalar);
  return r;
}

ExtensionResult extend_graph(const PlanarData& u_star, const GraphChart& chart, const ExtensionOptions& options) {
  if (!chart.h || !chart.grad_h) throw DomainError("extend_graph needs h and its gradient");
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j <= 40; ++j) {
      const double x1 = -1.125 + 2.25 * i / 40.0, x2 = -1.125 + 2.25 * j / 40.0;
      if (!(std::abs(chart.h(x1, x2)) < 0.25))
        throw DomainError("graph height must satisfy |h| < 1/4 (h=" + std::to_string(chart.h(x1, x2)) + " at (" +
                          std::to_string(x1) + ", " + std::to_string(x2) + "))");
    }
  PlanarData U_star = [u_star, chart](double x1, double x2) {
    const Vec3 v = u_star(x1, x2);
    const Eigen::Vector2d dh = chart.grad_h(x1, x2);
    return Vec3(v[0], v[1], v[2] - v[0] * dh[0] - v[1] * dh[1]);
  };
  ExtensionResult flat = extend_flat(U_star, options);
  const FieldHandle U = flat.E;
  ExtensionResult r;
  r.E = FieldHandle::vector([U, chart](const Vec3& x) {
    const double h = chart.h(x[0], x[1]);
    const Vec3 V = U.vector_at(0.0, Vec3(x[0], x[1], x[2] - h));
    const Eigen::Vector2d dh = chart.grad_h(x[0], x[1]);
    return Vec3(V[0], V[1], V[2] + V[0] * dh[0] + V[1] * dh[1]);
  });
  r.H = FieldHandle::zero(Arity::scalar);
  return r;
}

HarmonicPart harmonic_part(const std::function<Vec3(const Vec3&)>& u_star, const std::vector<BoundarySphere>& spheres,
                           int n_theta, int n_phi) {
  if (spheres.empty()) throw DomainError("harmonic_part needs at least one boundary sphere");
  for (std::size_t k = 0; k < spheres.size(); ++k) {
    if (!(spheres[k].radius > 0.0)) throw DomainError("sphere radii must be positive");
    for (std::size_t l = 0; l < k; ++l)
      if ((spheres[k].center - spheres[l].center).norm() <= spheres[k].radius + spheres[l].radius)
        throw DomainError("boundary spheres " + std::to_string(l) + " and " + std::to_string(k) + " overlap");
  }
  const SphereRule rule(n_theta, n_phi);
  std::vector<double> g;
  for (const auto& s : spheres) {
    double flux = 0.0;
    for (const auto& n : rule.nodes())
      flux += n.weight * s.radius * s.radius * u_star(s.center + s.radius * n.direction).dot(-n.direction);
    g.push_back(flux / (4.0 * kPi));
  }
  HarmonicPart out;
  out.g = g;
  out.H = FieldHandle::scalar([spheres, g](const Vec3& x) {
    double v = 0.0;
    for (std::size_t k = 0; k < spheres.size(); ++k) v += g[k] / (x - spheres[k].center).norm();
    return v;
  });
  out.gradient = FieldHandle::vector([spheres, g](const Vec3& x) {
    Vec3 v = Vec3::Zero();
    for (std::size_t k = 0; k < spheres.size(); ++k) {
      const Vec3 d = x - spheres[k].center;
      const double r = d.norm();
      v -= g[k] * d / (r * r * r);
    }
    return v;
  });
  return out;
}

}  // namespace nsasym
