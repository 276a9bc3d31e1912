#include "nsasym/parallel.hpp"
#include "nsasym/potentials.hpp"
#include "suites_common.hpp"

#include <algorithm>
#include <cmath>

namespace nsasym {

using detail::check_span;
using detail::log_space;
using detail::ScopedTimer;

namespace {

double bump(const Vec3& y) {
  const double r2 = y.squaredNorm();
  return r2 >= 1.0 ? 0.0 : std::pow(1.0 - r2, 4);
}

/// int (1 - |y|^2)^4 dy over the unit ball.
const double kBumpMass = 2.0 * kPi * std::tgamma(1.5) * std::tgamma(5.0) / std::tgamma(6.5);

/// e_1 (x) e_2 (1 + |y - shift|^2)^{-(1+alpha)/2}.
FieldHandle steady_G(double alpha, const Vec3& shift = Vec3::Zero()) {
  return FieldHandle::tensor_st([alpha, shift](double, const Vec3& y) {
    Mat3 E = Mat3::Zero();
    E(0, 1) = 1.0;
    return Mat3(std::pow(1.0 + (y - shift).squaredNorm(), -0.5 * (1.0 + alpha)) * E);
  });
}

PotentialQuadratureSpec periodic_spec() {
  PotentialQuadratureSpec s;
  s.t_max_factor = 4.0;
  s.time_resolution = 0.125;
  s.time_order = 4;
  return s;
}

Vec3 direction() { return Vec3(1.0, 0.3, 0.2).normalized(); }

void theta_checks(SuiteContext& ctx, Section& s, double alpha) {
  const PotentialQuadratureSpec spec;
  const auto G = steady_G(alpha);
  const Envelope env = [alpha](double, const Vec3& y) { return std::pow(1.0 + y.squaredNorm(), -0.5 * (1.0 + alpha)); };
  const std::vector<double> radii = log_space(2.0, 50.0, 6);
  const auto res = parallel_map<PotentialResult>(radii.size(), [&](std::size_t i) {
    return theta_apply(G, 1.0, radii[i] * direction(), spec, env);
  });
  double cmin = 1e300, cmax = 0.0, rel_err = 0.0;
  CsvTable csv({"r", "weighted_magnitude", "error_estimate"});
  csv.meta("alpha", alpha);
  csv.meta("weight", "(1+|x|^2)^(alpha/2)");
  Json constants = Json::array();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double w = std::pow(1.0 + radii[i] * radii[i], 0.5 * alpha);
    const double c = res[i].value.norm() * w;
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
    rel_err = std::max(rel_err, res[i].error_estimate() / res[i].value.norm());
    csv.row({radii[i], c, res[i].error_estimate() * w});
    constants.push_back(c);
  }
  check_span(s, "theta_weighted_decay", cmin, cmax, 0.01, 1.0);
  s.check_max("theta_relative_error_estimate", rel_err, 1e-2);
  s.record("theta_decay_constants", constants);
  ctx.write_csv("potentials_theta.csv", csv);

  PotentialQuadratureSpec quiet = spec;
  quiet.estimate_error = false;
  const Vec3 shift(0.5, -0.25, 0.75);
  double trans = 0.0;
  for (const Vec3& x : {Vec3(1.0, 0.0, 0.0), Vec3(0.3, 2.0, -1.0), Vec3(-4.0, 1.0, 2.0)}) {
    const Vec3 a = theta_apply(steady_G(alpha, shift), 1.0, x + shift, quiet).value;
    const Vec3 b = theta_apply(G, 1.0, x, quiet).value;
    trans = std::max(trans, (a - b).norm() / b.norm());
  }
  s.check_max("theta_translation_equivariance", trans, 1e-4);

  auto G2 = FieldHandle::tensor_st([](double t, const Vec3& y) {
    return Mat3(std::cos(t) * std::pow(1.0 + y.squaredNorm(), -1.5) * Mat3::Identity());
  });
  auto sum = FieldHandle::tensor_st([G, G2](double t, const Vec3& y) {
    return Mat3(G.tensor_at(t, y) + 2.0 * G2.tensor_at(t, y));
  });
  double lin = 0.0;
  for (const Vec3& x : {Vec3(1.0, 2.0, 0.5), Vec3(-0.3, 0.2, 0.1), Vec3(6.0, -2.0, 3.0)}) {
    const Vec3 rhs = theta_apply(G, 1.0, x, quiet).value + 2.0 * theta_apply(G2, 1.0, x, quiet).value;
    lin = std::max(lin, (theta_apply(sum, 1.0, x, quiet).value - rhs).norm() / rhs.norm());
  }
  s.check_max("theta_linearity", lin, 1e-10);

  const Vec3 x(2.0, 1.0, -1.0);
  const auto base = theta_apply(G, 1.0, x, spec, env);
  auto fine = spec.doubled();
  fine.estimate_error = false;
  const double change = (base.value - theta_apply(G, 1.0, x, fine).value).norm();
  s.check_max("theta_doubling_within_estimate", change / base.error_estimate(), 10.0);
  s.record("theta_doubling_change", change);

  const auto Gz = FieldHandle::zero(Arity::tensor3x3, FieldDomain::space_time);
  s.check_max("theta_zero_data", theta_apply(Gz, 1.0, Vec3(1, 2, 3), spec).value.norm(), 0.0);
}

void lambda_checks(SuiteContext& ctx, Section& s) {
  const PotentialQuadratureSpec spec;
  auto g = FieldHandle::vector_st([](double, const Vec3& y) { return Vec3(bump(y), 0.0, 0.0); });
  const std::vector<double> radii = log_space(2.0, 50.0, 6);
  const Vec3 dir(0.0, 0.6, 0.8);
  const auto steady = parallel_map<double>(radii.size(), [&](std::size_t i) {
    return lambda_apply(g, 1.0, radii[i] * dir, spec).value.norm() * radii[i];
  });
  check_span(s, "lambda_weighted_decay", *std::min_element(steady.begin(), steady.end()),
             *std::max_element(steady.begin(), steady.end()), 1e-4, 0.05);
  const double stokeslet = kBumpMass / (8.0 * kPi);
  s.check_max("lambda_stokeslet_far_field", std::abs(steady.back() - stokeslet) / stokeslet, 1e-3);
  s.record("lambda_decay_constants", steady);

  PotentialQuadratureSpec quiet = spec;
  quiet.estimate_error = false;
  auto g2 = FieldHandle::vector_st(
      [](double t, const Vec3& y) { return Vec3(0.0, std::cos(t) * std::pow(1.0 + y.squaredNorm(), -2.0), 0.0); });
  auto sum = FieldHandle::vector_st([g, g2](double t, const Vec3& y) {
    return Vec3(g.vector_at(t, y) + 2.0 * g2.vector_at(t, y));
  });
  double lin = 0.0;
  for (const Vec3& x : {Vec3(1.0, 2.0, 0.5), Vec3(-0.3, 0.2, 0.1), Vec3(6.0, -2.0, 3.0)}) {
    const Vec3 rhs = lambda_apply(g, 1.0, x, quiet).value + 2.0 * lambda_apply(g2, 1.0, x, quiet).value;
    lin = std::max(lin, (lambda_apply(sum, 1.0, x, quiet).value - rhs).norm() / rhs.norm());
  }
  s.check_max("lambda_linearity", lin, 1e-10);

  const auto pspec = periodic_spec();
  auto zero_mean = FieldHandle::vector_st(
      [](double t, const Vec3& y) { return Vec3(std::sin(2 * kPi * t) * bump(y), 0.0, 0.0); });
  auto with_mean = FieldHandle::vector_st(
      [](double t, const Vec3& y) { return Vec3((1.0 + std::sin(2 * kPi * t)) * bump(y), 0.0, 0.0); });
  const auto periodic = parallel_map<std::pair<double, double>>(radii.size(), [&](std::size_t i) {
    const Vec3 x = radii[i] * dir;
    const double r2 = radii[i] * radii[i];
    return std::pair{lambda_apply(zero_mean, 1.3, x, pspec).value.norm() * r2,
                     lambda_apply(with_mean, 1.3, x, pspec).value.norm() * r2};
  });
  double zmax = 0.0;
  Json zc = Json::array(), mc = Json::array();
  for (const auto& [z, m] : periodic) {
    zmax = std::max(zmax, z);
    zc.push_back(z);
    mc.push_back(m);
  }
  s.check_max("lambda_zero_mean_x2_constant", zmax, 0.05);
  s.check_max("lambda_zero_mean_non_increasing", periodic.back().first / periodic.front().first, 1.0);
  s.check_min("lambda_nonzero_mean_growth", periodic.back().second / periodic.front().second, 3.0);
  s.record("lambda_zero_mean_x2_constants", zc);
  s.record("lambda_nonzero_mean_x2_constants", mc);

  CsvTable csv({"r", "steady_weighted_r", "zero_mean_weighted_r2", "nonzero_mean_weighted_r2"});
  csv.meta("source", "(1-|y|^2)^4 on the unit ball, e1 direction");
  for (std::size_t i = 0; i < radii.size(); ++i)
    csv.row({radii[i], steady[i], periodic[i].first, periodic[i].second});
  ctx.write_csv("potentials_lambda.csv", csv);
}

void intest_checks(SuiteContext& ctx, Section& s, double eta, int n_samples) {
  std::vector<Vec3> xs;
  for (double r : log_space(0.01, 100.0, n_samples)) xs.push_back(r * Vec3(1.0, 2.0, 2.0) / 3.0);
  struct Case {
    std::string name;
    double b, c;
  };
  const std::vector<Case> cases = {{"b1_c0", 1.0, 0.0}, {"b2_c0", 2.0, 0.0}, {"b0_c1eta", 0.0, 1.0 + eta},
                                   {"b0_c2eta", 0.0, 2.0 + eta}};
  CsvTable csv({"b", "c", "lambda", "r", "ratio"});
  csv.meta("mu", 1.0);
  csv.meta("t", 1.0);
  csv.meta("eta", eta);
  for (const auto& cs : cases)
    for (double lambda : {0.0, 1.0}) {
      const auto res = int_est_ratio(IntEstParams(cs.b, cs.c, 1.0, lambda, 1.0), xs);
      check_span(s, "int_est_ratio_" + cs.name + "_lambda" + std::to_string(int(lambda)), res.ratio_min, res.ratio_max,
                 0.01, 100.0);
      for (std::size_t i = 0; i < xs.size(); ++i) csv.row({cs.b, cs.c, lambda, xs[i].norm(), res.ratios[i]});
    }
  ctx.write_csv("potentials_intest.csv", csv);

  std::vector<Vec3> ys, half;
  for (double r : {0.05, 0.7, 3.0, 40.0}) {
    ys.push_back(r * Vec3(0.0, 0.6, 0.8));
    half.push_back(ys.back() / 2.0);
  }
  double dev = 0.0;
  for (const auto& cs : cases) {
    const auto a = int_est_ratio(IntEstParams(cs.b, cs.c, 1.0, 2.0, 4.0), ys);
    const auto b = int_est_ratio(IntEstParams(cs.b, cs.c, 1.0, 1.0, 1.0), half);
    for (std::size_t i = 0; i < ys.size(); ++i) dev = std::max(dev, std::abs(a.ratios[i] - b.ratios[i]) / b.ratios[i]);
  }
  s.check_max("int_est_scaling_reduction", dev, 1e-6);
  const double exact = 4.0 * kPi / 3.0;
  s.check_max("int_est_closed_form_example",
              std::abs(int_est_integral(IntEstParams(0.0, 0.0, 1.0, 0.0, 1.0), Vec3(0.3, 0.1, 0.0)) - exact) / exact,
              1e-7);
}

}  // namespace

void run_potentials(SuiteContext& ctx) {
  const Params& P = ctx.params;
  const std::string which = P.text("case");
  const double eta = P.real("eta"), alpha = P.real("alpha");
  const int n_samples = static_cast<int>(P.integer("n_samples"));
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("eta", "key 'eta' must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("alpha", "key 'alpha' must lie in (0, 2)");
  if (n_samples < 2) throw ConfigError("n_samples", "key 'n_samples' must be at least 2");
  Section& s = ctx.report->section("potentials");
  if (which == "all" || which == "theta" || which == "lambda") {
    ScopedTimer t(ctx, "potentials.decay");
    if (which != "lambda") theta_checks(ctx, s, alpha);
    if (which != "theta") lambda_checks(ctx, s);
  }
  if (which == "all" || which == "intest") {
    ScopedTimer t(ctx, "potentials.int_est");
    intest_checks(ctx, s, eta, n_samples);
  }
}

}  // namespace nsasym
