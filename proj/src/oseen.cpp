#include "nsasym/oseen.hpp"

#include "nsasym/quadrature.hpp"

#include <cmath>
#include <functional>

namespace nsasym {

namespace {

constexpr double kSeriesSwitch = 1.5;  // in z = r / (2 sqrt t)
const double kTwoOverSqrtPi = 2.0 / std::sqrt(kPi);

void check_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("Oseen kernel requires t > 0");
}

void check_x(const Vec3& x) {
  if (x.squaredNorm() == 0.0) throw EvaluationError("Oseen kernel is singular at x = 0");
}

/// Radial profile coefficients of h(z) = erf(z)/z:
///   h1 = h'/z, a = (h'' - h'/z)/z^2, b = (h''' - 3(h'' - h'/z)/z)/z^3.
struct Profile {
  double h1, a, b;
};

Profile profile(double z) {
  Profile p{0.0, 0.0, 0.0};
  if (z < kSeriesSwitch) {
    // h = (2/sqrt pi) sum (-1)^n z^{2n} / (n! (2n+1)).
    const double z2 = z * z;
    constexpr int kTerms = 40;
    double pw[kTerms + 1];
    pw[0] = 1.0;
    for (int m = 1; m <= kTerms; ++m) pw[m] = pw[m - 1] * z2;
    double an = 1.0;  // (-1)^n / n!
    for (int n = 1; n <= kTerms; ++n) {
      an *= -1.0 / n;
      const double c = an / (2.0 * n + 1.0);
      p.h1 += 2.0 * n * c * pw[n - 1];
      if (n >= 2) p.a += 2.0 * n * (2.0 * n - 2.0) * c * pw[n - 2];
      if (n >= 3) p.b += 2.0 * n * (2.0 * n - 2.0) * (2.0 * n - 4.0) * c * pw[n - 3];
    }
    p.h1 *= kTwoOverSqrtPi;
    p.a *= kTwoOverSqrtPi;
    p.b *= kTwoOverSqrtPi;
    return p;
  }
  const double E = std::erf(z);
  const double G = kTwoOverSqrtPi * std::exp(-z * z);
  const double z2 = z * z, z3 = z2 * z, z4 = z2 * z2;
  const double h1 = G / z - E / z2;
  const double h2 = -2.0 * G - 2.0 * G / z2 + 2.0 * E / z3;
  const double h3 = 4.0 * z * G + 4.0 * G / z + 6.0 * G / z3 - 6.0 * E / z4;
  const double am = h2 - h1 / z;
  p.h1 = h1 / z;
  p.a = am / z2;
  p.b = (h3 - 3.0 * am / z) / z3;
  return p;
}

Mat3 closed_form_unchecked(double t, const Vec3& x) {
  const double s = 2.0 * std::sqrt(t);
  const double z = x.norm() / s;
  const Profile p = profile(z);
  const double four_pi_s3 = 4.0 * kPi * s * s * s;
  const double gam = std::pow(4.0 * kPi * t, -1.5) * std::exp(-x.squaredNorm() / (4.0 * t));
  return (gam + p.h1 / four_pi_s3) * Mat3::Identity() + (p.a / (four_pi_s3 * s * s)) * x * x.transpose();
}

}  // namespace

double heat_kernel(double t, const Vec3& x) {
  check_t(t);
  return std::pow(4.0 * kPi * t, -1.5) * std::exp(-x.squaredNorm() / (4.0 * t));
}

double gaussian_potential(double t, double r) {
  check_t(t);
  if (r < 0.0) throw DomainError("gaussian_potential requires r >= 0");
  const double s = 2.0 * std::sqrt(t);
  const double z = r / s;
  if (z < 1e-4) return kTwoOverSqrtPi * (1.0 - z * z / 3.0) / (4.0 * kPi * s);
  return std::erf(z) / (4.0 * kPi * r);
}

Mat3 oseen_closed_form(double t, const Vec3& x) {
  check_t(t);
  check_x(x);
  return closed_form_unchecked(t, x);
}

Mat3 oseen_brute(double t, const Vec3& x, int order) {
  check_t(t);
  check_x(x);
  const double R = x.norm();
  const double L = 10.0 * std::sqrt(t);
  const Mat3 frame = frame_with_pole(x / R);
  const double theta_max = R > L ? std::asin(L / R) : kPi;
  const Rule1D rr = composite_gl(std::max(0.0, R - L), R + L, 4, order);
  const Rule1D rt = composite_gl(0.0, theta_max, 4, order);
  const int n_phi = 8;
  const double dphi = 2.0 * kPi / n_phi;

  Mat3 acc = Mat3::Zero();
  for (std::size_t a = 0; a < rr.size(); ++a) {
    const double r = rr.x[a];
    Mat3 shell = Mat3::Zero();
    for (std::size_t b = 0; b < rt.size(); ++b) {
      const double th = rt.x[b];
      const double st = std::sin(th), ct = std::cos(th);
      Mat3 ring = Mat3::Zero();
      for (int c = 0; c < n_phi; ++c) {
        const double ph = (c + 0.5) * dphi;
        const Vec3 dir = frame * Vec3(st * std::cos(ph), st * std::sin(ph), ct);
        const Vec3 w = x - r * dir;
        const double g = std::pow(4.0 * kPi * t, -1.5) * std::exp(-w.squaredNorm() / (4.0 * t));
        ring += g * (w * w.transpose() / (4.0 * t * t) - Mat3::Identity() / (2.0 * t));
      }
      shell += rt.w[b] * st * dphi * ring;
    }
    // dz / |z| = r dr sin(theta) dtheta dphi.
    acc += rr.w[a] * r * shell;
  }
  return heat_kernel(t, x) * Mat3::Identity() + acc / (4.0 * kPi);
}

Mat3 oseen_eval(double t, const Vec3& x, OseenMode mode) { return OseenTensor(mode)(t, x); }

Mat3 OseenTensor::operator()(double t, const Vec3& x) const {
  return mode_ == OseenMode::erf_closed_form ? oseen_closed_form(t, x) : oseen_brute(t, x);
}

std::array<Mat3, 3> OseenTensor::gradient(double t, const Vec3& x) const {
  check_t(t);
  check_x(x);
  const double s = 2.0 * std::sqrt(t);
  const Profile p = profile(x.norm() / s);
  const double c5 = p.a / (4.0 * kPi * std::pow(s, 5));
  const double c7 = p.b / (4.0 * kPi * std::pow(s, 7));
  const double gam = heat_kernel(t, x);
  std::array<Mat3, 3> out;
  for (int k = 0; k < 3; ++k) {
    Mat3& m = out[k];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double v = c7 * x[i] * x[j] * x[k];
        v += c5 * ((i == j ? x[k] : 0.0) + (i == k ? x[j] : 0.0) + (j == k ? x[i] : 0.0));
        if (i == j) v += -x[k] / (2.0 * t) * gam;
        m(i, j) = v;
      }
    }
  }
  return out;
}

std::vector<Mat3> oseen_derivative(double t, const Vec3& x, int ell, int k) {
  check_t(t);
  check_x(x);
  if (ell < 0 || ell > 2 || k < 0 || k > 1) throw DomainError("oseen_derivative supports ell <= 2, k <= 1");

  const double hx = (ell == 2 ? 2e-3 : 1e-4) * (x.norm() + std::sqrt(t));
  std::function<std::vector<Mat3>(double)> spatial = [&](double tt) -> std::vector<Mat3> {
    if (ell == 0) return {closed_form_unchecked(tt, x)};
    if (ell == 1) {
      std::vector<Mat3> out(3);
      for (int m = 0; m < 3; ++m) {
        const Vec3 e = hx * Vec3::Unit(m);
        out[m] = (closed_form_unchecked(tt, x + e) - closed_form_unchecked(tt, x - e)) / (2.0 * hx);
      }
      return out;
    }
    std::vector<Mat3> out(9);
    const Mat3 c = closed_form_unchecked(tt, x);
    for (int a = 0; a < 3; ++a) {
      for (int b = a; b < 3; ++b) {
        const Vec3 ea = hx * Vec3::Unit(a), eb = hx * Vec3::Unit(b);
        Mat3 v;
        if (a == b) {
          v = (closed_form_unchecked(tt, x + ea) - 2.0 * c + closed_form_unchecked(tt, x - ea)) / (hx * hx);
        } else {
          v = (closed_form_unchecked(tt, x + ea + eb) - closed_form_unchecked(tt, x + ea - eb) -
               closed_form_unchecked(tt, x - ea + eb) + closed_form_unchecked(tt, x - ea - eb)) /
              (4.0 * hx * hx);
        }
        out[a + 3 * b] = v;
        out[b + 3 * a] = v;
      }
    }
    return out;
  };
  if (k == 0) return spatial(t);
  const double ht = 1e-4 * t;
  auto plus = spatial(t + ht), minus = spatial(t - ht);
  for (std::size_t m = 0; m < plus.size(); ++m) plus[m] = (plus[m] - minus[m]) / (2.0 * ht);
  return plus;
}

double derivative_magnitude(const std::vector<Mat3>& d) {
  double s = 0.0;
  for (const auto& m : d) s += m.squaredNorm();
  return std::sqrt(s);
}

Vec3 pressure_kernel_q(const Vec3& x) {
  check_x(x);
  const double r = x.norm();
  return x / (4.0 * kPi * r * r * r);
}

namespace {

std::vector<double> log_grid(int n, double lo, double hi) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw DomainError("log grid requires n >= 2 and 0 < lo < hi");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return v;
}

}  // namespace

std::vector<DecayConstant> oseen_decay_constants(int n, double lo, double hi) {
  const auto g = log_grid(n, lo, hi);
  const Vec3 dir = Vec3::Ones().normalized();
  std::vector<DecayConstant> out{{0, 0}, {1, 0}, {2, 0}, {0, 1}};
  for (auto& c : out) {
    for (double t : g) {
      for (double r : g) {
        const double w = std::pow(r + std::sqrt(t), 3 + c.ell + 2 * c.k);
        const double v = derivative_magnitude(oseen_derivative(t, r * dir, c.ell, c.k)) * w;
        if (!std::isfinite(v)) throw EvaluationError("non-finite Oseen derivative at t=" + std::to_string(t));
        if (v > c.value) {
          c.value = v;
          c.t_at = t;
          c.r_at = r;
        }
      }
    }
  }
  return out;
}

double oseen_divergence_defect(int n, double lo, double hi) {
  const auto g = log_grid(n, lo, hi);
  const Vec3 dir = Vec3(1.0, -2.0, 0.5).normalized();
  double worst = 0.0;
  for (double t : g) {
    for (double r : g) {
      const auto d = oseen_derivative(t, r * dir, 1, 0);
      Vec3 div = Vec3::Zero();
      for (int i = 0; i < 3; ++i) div += d[i].row(i).transpose();
      worst = std::max(worst, div.norm() * std::pow(r + std::sqrt(t), 4));
    }
  }
  return worst;
}

}  // namespace nsasym
