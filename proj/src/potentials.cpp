#include "nsasym/potentials.hpp"

#include "nsasym/oseen.hpp"

#include <cmath>

namespace nsasym {

void PotentialQuadratureSpec::validate() const {
  if (!(t_max_factor > 0.0)) throw DomainError("t_max_factor must be positive");
  if (time_order < 4) throw DomainError("time_order must be >= 4");
  if (!(time_ratio > 1.0)) throw DomainError("time_ratio must exceed 1");
  if (!(time_inner > 0.0) || !(time_resolution > 0.0)) throw DomainError("time_inner and time_resolution must be positive");
  if (!(data_scale > 0.0)) throw DomainError("data_scale must be positive");
  if (parabolic_data_scale && !finite_horizon)
    throw DomainError("a parabolic data scale requires the finite horizon (data defined for t > 0 only)");
  if (!(tail_period > 0.0) || tail_samples < 1) throw DomainError("tail averaging needs a positive period and samples");
  space.validate();
}

PotentialQuadratureSpec PotentialQuadratureSpec::halved() const {
  PotentialQuadratureSpec s = *this;
  s.time_order = std::max(4, time_order / 2);
  s.space = space.halved();
  s.estimate_error = false;
  return s;
}

PotentialQuadratureSpec PotentialQuadratureSpec::doubled() const {
  PotentialQuadratureSpec s = *this;
  s.time_order = time_order * 2;
  s.space = space.doubled();
  return s;
}

namespace {

/// Breakpoints 0 = b_0 < sigma_0 < ... <= limit in sigma = sqrt(s).
std::vector<double> sigma_breaks(double sigma0, double limit, double ratio, double resolution) {
  std::vector<double> b{0.0};
  double cur = std::min(sigma0, limit);
  b.push_back(cur);
  while (cur < limit * (1.0 - 1e-14)) {
    double next = cur * ratio;
    if (std::isfinite(resolution)) next = std::min(next, std::sqrt(cur * cur + resolution));
    cur = std::min(next, limit);
    b.push_back(cur);
  }
  return b;
}

void append_panels(Rule1D& r, const std::vector<double>& b, int order, bool mirrored, double H) {
  const auto& gl = gauss_legendre(order);
  for (std::size_t p = 0; p + 1 < b.size(); ++p) {
    const double lo = b[p], hi = b[p + 1];
    for (int i = 0; i < order; ++i) {
      const double sig = lo + 0.5 * (hi - lo) * (gl.nodes[i] + 1.0);
      const double w = 0.5 * (hi - lo) * gl.weights[i] * 2.0 * sig;
      r.add(mirrored ? H - sig * sig : sig * sig, w);
    }
  }
}

}  // namespace

Rule1D PotentialQuadratureSpec::time_rule(double H, double xnorm, double t) const {
  if (!(H > 0.0)) throw DomainError("time horizon must be positive");
  const double ds = parabolic_data_scale ? data_scale * std::sqrt(t) : data_scale;
  double lo = std::min(ds, std::sqrt(H));
  if (xnorm > 0.0) lo = std::min(lo, xnorm);
  const double sigma0 = time_inner * lo;
  Rule1D r;
  if (!finite_horizon) {
    append_panels(r, sigma_breaks(sigma0, std::sqrt(H), time_ratio, time_resolution), time_order, false, H);
    return r;
  }
  const double half = std::sqrt(0.5 * H);
  const auto b = sigma_breaks(sigma0, half, time_ratio, time_resolution);
  append_panels(r, b, time_order, false, H);
  append_panels(r, b, time_order, true, H);
  return r;
}

Mat3 oseen_time_tail(double T, const Vec3& w) {
  // s = T / tau^2, ds = 2 T tau^{-3} dtau, tau in (0, 1].
  const double tau0 = 0.25 * std::min(1.0, std::sqrt(T) / w.norm());
  const auto b = sigma_breaks(tau0, 1.0, 2.0, std::numeric_limits<double>::infinity());
  const auto& gl = gauss_legendre(8);
  Mat3 acc = Mat3::Zero();
  for (std::size_t p = 0; p + 1 < b.size(); ++p) {
    for (int i = 0; i < 8; ++i) {
      const double tau = b[p] + 0.5 * (b[p + 1] - b[p]) * (gl.nodes[i] + 1.0);
      const double wt = 0.5 * (b[p + 1] - b[p]) * gl.weights[i] * 2.0 * T / (tau * tau * tau);
      acc += wt * oseen_closed_form(T / (tau * tau), w);
    }
  }
  return acc;
}

std::array<Mat3, 3> oseen_gradient_time_tail(double T, const Vec3& w) {
  const double tau0 = 0.25 * std::min(1.0, std::sqrt(T) / w.norm());
  const auto b = sigma_breaks(tau0, 1.0, 2.0, std::numeric_limits<double>::infinity());
  const auto& gl = gauss_legendre(8);
  const OseenTensor S;
  std::array<Mat3, 3> acc{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  for (std::size_t p = 0; p + 1 < b.size(); ++p) {
    for (int i = 0; i < 8; ++i) {
      const double tau = b[p] + 0.5 * (b[p + 1] - b[p]) * (gl.nodes[i] + 1.0);
      const double wt = 0.5 * (b[p + 1] - b[p]) * gl.weights[i] * 2.0 * T / (tau * tau * tau);
      const auto g = S.gradient(T / (tau * tau), w);
      for (int k = 0; k < 3; ++k) acc[k] += wt * g[k];
    }
  }
  return acc;
}

namespace {

enum class Op { lambda, theta };

void check_envelope(const Envelope& env, double tau, const Vec3& y, double magnitude) {
  if (!env) return;
  const double bound = env(tau, y);
  if (magnitude > bound * (1.0 + 1e-9) + 1e-300)
    throw ContractError("data exceeds its envelope at t=" + std::to_string(tau) + ", y=" + format_point(y) +
                        " (|value|=" + std::to_string(magnitude) + ", bound=" + std::to_string(bound) + ")");
}

/// K(s, w) applied to data value d (flattened row-major for tensors).
Vec3 apply_kernel(Op op, const OseenTensor& S, double s, const Vec3& w, const FieldValue& d) {
  if (op == Op::lambda) return oseen_closed_form(s, w) * Vec3(d[0], d[1], d[2]);
  const auto g = S.gradient(s, w);
  Vec3 out = Vec3::Zero();
  for (int k = 0; k < 3; ++k) out -= g[k] * Vec3(d[k], d[3 + k], d[6 + k]);  // column k of G
  return out;
}

/// |K(s1, w) - K(s2, w)| in the Frobenius norm.
double kernel_difference(Op op, const OseenTensor& S, double s1, double s2, const Vec3& w) {
  if (op == Op::lambda) return (oseen_closed_form(s1, w) - oseen_closed_form(s2, w)).norm();
  const auto a = S.gradient(s1, w), b = S.gradient(s2, w);
  return std::sqrt((a[0] - b[0]).squaredNorm() + (a[1] - b[1]).squaredNorm() + (a[2] - b[2]).squaredNorm());
}

struct Core {
  Vec3 value = Vec3::Zero();
  double truncation = 0.0;
};

Core apply_core(Op op, const FieldHandle& data, double t, const Vec3& x, const PotentialQuadratureSpec& spec,
                const Envelope& env) {
  const OseenTensor S;
  const double xn = x.norm();
  const double H = spec.finite_horizon ? t : spec.t_max_factor * (1.0 + t);
  const Rule1D tr = spec.time_rule(H, xn, t);
  auto fetch = [&](double tau, const Vec3& y) {
    const FieldValue d = data(tau, y);
    if (!d.allFinite()) throw EvaluationError("non-finite data at y=" + format_point(y));
    check_envelope(env, tau, y, d.norm());
    return d;
  };

  Core out;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double s = tr.x[i];
    const double tau = t - s;
    const double ds = spec.parabolic_data_scale ? spec.data_scale * std::sqrt(std::max(tau, 0.0)) : spec.data_scale;
    const Vec3 part = two_center_integral(
        x, {std::sqrt(s), xn, ds}, spec.space,
        [&](const Vec3& y) { return apply_kernel(op, S, s, x - y, fetch(tau, y)); }, Vec3(Vec3::Zero()));
    out.value += tr.w[i] * part;
  }
  if (spec.finite_horizon) return out;

  // Tail [T, inf): with gbar the period mean and H the zero-mean primitive of
  // g - gbar, int_T^inf K g = K_T gbar + K(T) H(t - T) + int_T^inf d_sK H.
  // The last term is reported through the next integration by parts.
  const double T = H;
  const int n = spec.tail_samples;
  const double P = spec.tail_period;
  const Eigen::Vector4d tail = two_center_integral(
      x, {std::sqrt(T), xn, spec.data_scale}, spec.space,
      [&](const Vec3& y) {
        FieldValue mean = FieldValue::Zero(data.components());
        FieldValue prim = FieldValue::Zero(data.components());
        double bound = 0.0;
        for (int j = 0; j < n; ++j) {
          const double tau = t - T - P + P * j / n;
          const FieldValue d = fetch(tau, y);
          mean += d;
          double c = 0.0;
          for (int k = 1; 2 * k < n; ++k) c += std::sin(2.0 * kPi * k * j / n) / k;
          prim -= (P / (kPi * n)) * c * d;
          bound = std::max(bound, env ? env(tau, y) : d.norm());
        }
        mean /= n;
        const Vec3 w = x - y;
        Vec3 v = Vec3::Zero();
        if (op == Op::lambda) {
          v = oseen_time_tail(T, w) * Vec3(mean[0], mean[1], mean[2]);
        } else {
          const auto g = oseen_gradient_time_tail(T, w);
          for (int k = 0; k < 3; ++k) v -= g[k] * Vec3(mean[k], mean[3 + k], mean[6 + k]);
        }
        v += apply_kernel(op, S, T, w, prim);
        const double h = 1e-3 * T;
        const double dsK = (kernel_difference(op, S, T + h, T - h, w)) / (2.0 * h);
        const double q = P / (2.0 * kPi);
        Eigen::Vector4d r;
        r << v, 2.0 * q * q * dsK * bound;
        return r;
      },
      Eigen::Vector4d(Eigen::Vector4d::Zero()));
  out.value += tail.head<3>();
  out.truncation = tail[3];
  return out;
}

PotentialResult apply(Op op, const FieldHandle& data, double t, const Vec3& x, const PotentialQuadratureSpec& spec,
                      const Envelope& env) {
  spec.validate();
  if (!(t > 0.0) && spec.finite_horizon) throw DomainError("finite-horizon potentials require t > 0");
  const Core main = apply_core(op, data, t, x, spec, env);
  PotentialResult r;
  r.value = main.value;
  r.truncation_estimate = main.truncation;
  if (spec.estimate_error) {
    const Core coarse = apply_core(op, data, t, x, spec.halved(), env);
    r.quadrature_estimate = (coarse.value - main.value).norm();
  }
  return r;
}

}  // namespace

PotentialResult theta_apply(const FieldHandle& G, double t, const Vec3& x, const PotentialQuadratureSpec& spec,
                            const Envelope& envelope) {
  if (G.arity() != Arity::tensor3x3) throw DomainError("theta_apply expects a tensor field");
  return apply(Op::theta, G, t, x, spec, envelope);
}

PotentialResult lambda_apply(const FieldHandle& g, double t, const Vec3& x, const PotentialQuadratureSpec& spec,
                             const Envelope& envelope) {
  if (g.arity() != Arity::vector3) throw DomainError("lambda_apply expects a vector field");
  return apply(Op::lambda, g, t, x, spec, envelope);
}

// ---------------------------------------------------------------------------

IntEstParams::IntEstParams(double b_, double c_, double mu_, double lambda_, double t_)
    : b(b_), c(c_), mu(mu_), lambda(lambda_), t(t_) {
  validate();
}

void IntEstParams::validate() const {
  if (n != 3) throw DomainError("int_est is implemented for n = 3");
  if (!(b >= 0.0) || !(c >= 0.0)) throw DomainError("int_est requires b, c >= 0");
  if (!(b + c < n)) throw DomainError("int_est requires b + c < n");
  if (!(mu > 0.0)) throw DomainError("int_est requires mu > 0");
  if (!(lambda >= 0.0)) throw DomainError("int_est requires lambda >= 0");
  if (!(t > 0.0)) throw DomainError("int_est requires t > 0");
}

namespace {

double int_est_raw(const IntEstParams& p, const Vec3& x, const SpatialRule& rule) {
  const double st = std::sqrt(p.t);
  return two_center_integral(
      x, {p.lambda, x.norm(), st}, rule,
      [&](const Vec3& y) {
        const double d = (x - y).norm();
        double v = std::pow(y.norm() + st, -p.n - p.mu);
        if (p.b != 0.0) v *= std::pow(d + p.lambda, -p.b);
        if (p.c != 0.0) v *= std::pow(d, -p.c);
        return v;
      },
      0.0);
}

}  // namespace

double int_est_integral(const IntEstParams& p, const Vec3& x, const SpatialRule& rule) {
  p.validate();
  const double J = int_est_raw(p, x, rule);
  const double Jh = int_est_raw(p, x, rule.halved());
  if (!std::isfinite(J) || std::abs(J - Jh) > 1e-3 * std::abs(J))
    throw ConvergenceError("int_est quadrature did not converge at x=" + format_point(x) + ": J=" + std::to_string(J) +
                           ", halved rule J=" + std::to_string(Jh));
  return J;
}

IntEstResult int_est_ratio(const IntEstParams& p, const std::vector<Vec3>& x_samples, const SpatialRule& rule) {
  p.validate();
  if (x_samples.empty()) throw DomainError("int_est_ratio needs samples");
  IntEstResult r;
  r.ratio_min = std::numeric_limits<double>::infinity();
  r.ratio_max = 0.0;
  const double st = std::sqrt(p.t);
  for (const Vec3& x : x_samples) {
    if (x.squaredNorm() == 0.0) throw DomainError("int_est samples must be nonzero");
    const double xn = x.norm();
    const double rhs = std::pow(st, -p.mu) * std::pow(xn + p.lambda + st, -p.b) * std::pow(xn + st, -p.c);
    const double ratio = int_est_integral(p, x, rule) / rhs;
    r.ratios.push_back(ratio);
    r.ratio_min = std::min(r.ratio_min, ratio);
    r.ratio_max = std::max(r.ratio_max, ratio);
  }
  return r;
}

}  // namespace nsasym
