#include "nsasym/decomp.hpp"
#include "nsasym/parallel.hpp"
#include "suites_common.hpp"

#include <algorithm>
#include <cmath>

namespace nsasym {

using detail::ScopedTimer;

namespace {

FieldHandle f_rational() {
  return FieldHandle::scalar([](const Vec3& x) { return std::pow(1.0 + x.squaredNorm(), -3.0); });
}

FieldHandle f_odd() {
  return FieldHandle::scalar([](const Vec3& x) { return x[0] * std::pow(1.0 + x.squaredNorm(), -4.0); });
}

double fd_div(const FieldHandle& u, const Vec3& x, double h) {
  double d = 0.0;
  for (int j = 0; j < 3; ++j) {
    Vec3 e = Vec3::Zero();
    e[j] = h;
    d += (u.vector_at(0.0, x + e)[j] - u.vector_at(0.0, x - e)[j]) / (2.0 * h);
  }
  return d;
}

Vec3 random_in_ball(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec3 x;
  do {
    x = Vec3(U(rng), U(rng), U(rng));
  } while (x.norm() > 1.0);
  return radius * x;
}

const PlanarData kFlatData = [](double a, double b) {
  return Vec3(std::sin(kPi * a) * std::cos(kPi * b), 0.0, 0.7 * std::sin(kPi * a) * std::sin(kPi * b));
};

GraphChart cosine_chart() {
  return {[](double a, double b) { return 0.1 * std::cos(kPi * a) * std::cos(kPi * b); },
          [](double a, double b) {
            return Eigen::Vector2d(-0.1 * kPi * std::sin(kPi * a) * std::cos(kPi * b),
                                   -0.1 * kPi * std::cos(kPi * a) * std::sin(kPi * b));
          }};
}

DecompOptions quick() {
  DecompOptions o;
  o.decay_radii = 4;
  return o;
}

void force_checks(SuiteContext& ctx, Section& s, const std::string& field, double R, int samples) {
  const double a = 6.0, M = 1.0;
  const FieldHandle f = field == "odd" ? f_odd() : f_rational();
  const auto res = decompose_force(f, R, a, M);
  const auto& d = *res.detail;

  auto rng = ctx.rng("decomp.reconstruction");
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Vec3> xs;
  for (int i = 0; i < samples; ++i) xs.push_back(random_in_ball(rng, 30.0 * std::cbrt(U(rng))));
  const auto rows = parallel_map<std::vector<double>>(xs.size(), [&](std::size_t i) {
    const Vec3& x = xs[i];
    const double h = 1e-4 * std::max(1.0, x.norm());
    const double fx = f(x)[0], f0 = res.f0.scalar_at(0.0, x), div = fd_div(res.F, x, h);
    return std::vector<double>{x[0], x[1], x[2], x.norm(), fx, f0, div, fx - f0 - div};
  });
  double worst = 0.0;
  CsvTable csv({"x1", "x2", "x3", "r", "f", "f0", "div_F", "residual"});
  csv.meta("field", field);
  csv.meta("R", R);
  csv.meta("a", a);
  csv.meta("M", M);
  for (const auto& r : rows) {
    worst = std::max(worst, std::abs(r.back()));
    csv.row(r);
  }
  ctx.write_csv("decompose.csv", csv);
  s.check_max("reconstruction_residual", worst, 1e-5);
  s.check_max("mass_defect", res.mass_defect, 1e-6);
  if (field == "rational") {
    // int (1 + |x|^2)^{-3} dx = pi^2 / 4.
    const double exact = kPi * kPi / 4.0;
    s.check_max("total_integral_oracle", std::abs(d.total_integral()[0] - exact) / exact, 1e-10);
  } else {
    s.check_max("total_integral_oracle", std::abs(d.total_integral()[0]), 1e-12);
  }

  double ratio = 0.0;
  for (double r : {1.0, 10.0, 100.0}) {
    const Vec3 x = r * Vec3(0.0, 0.6, 0.8);
    ratio = std::max(ratio, res.F.vector_at(0.0, x).norm() * std::pow(1.0 + r * r, 0.5 * (a - 1.0)) / res.decay_constant);
  }
  s.check_range("decay_constant", res.decay_constant, 1e-12, 10.0);
  s.check_max("decay_certificate_spot_ratio", ratio, 1.5);

  double piece = 0.0;
  for (int k = 1; k <= 5; ++k) piece = std::max(piece, std::abs(d.piece_integral(k)[0]));
  s.check_max("piece_zero_integrals", piece, 1e-8);

  const double L = d.dyadic_scale();
  s.check_true("f0_support_exact", res.f0.scalar_at(0.0, Vec3(R, 0.0, 0.0)) == 0.0 &&
                                       res.f0.scalar_at(0.0, Vec3(0.0, 3.0 * R, 0.0)) == 0.0);
  s.check_true("piece_support_exact", d.piece(3, Vec3(8.0 * L * 0.24, 0.0, 0.0))[0] == 0.0 &&
                                          d.piece(3, Vec3(8.0 * L * 2.01, 0.0, 0.0))[0] == 0.0);
  const Vec3 x(0.7, -0.2, 1.3);
  s.check_max("analytic_vs_fd_divergence", std::abs(d.divergence_F(x)[0] - fd_div(res.F, x, 1e-4)), 1e-7);

  const auto f1 = f_rational(), f2 = f_odd();
  auto sum = FieldHandle::scalar([f1, f2](const Vec3& y) { return f1(y)[0] + 2.0 * f2(y)[0]; });
  const auto ra = decompose_force(f1, R, a, 1.0, quick());
  const auto rb = decompose_force(f2, R, a, 1.0, quick());
  const auto rc = decompose_force(sum, R, a, 3.0, quick());
  double lin = 0.0;
  for (const Vec3& y : {Vec3(0.3, 0.1, -0.2), Vec3(2.0, 1.0, 0.5), Vec3(-7.0, 3.0, 9.0)}) {
    const Vec3 l = ra.F.vector_at(0.0, y) + 2.0 * rb.F.vector_at(0.0, y);
    lin = std::max(lin, (rc.F.vector_at(0.0, y) - l).norm() / l.norm());
  }
  s.check_max("linearity", lin, 1e-10);

  s.record("field", field);
  s.record("support_radius", res.support_radius);
  s.record("decay_constant", res.decay_constant);
  s.record("mass_defect", res.mass_defect);
  s.record("dyadic_depth", res.dyadic_depth);
}

/// Max |div E| over random interior points and max trace mismatch.
std::pair<double, double> extension_errors(const FieldHandle& E, const PlanarData& data,
                                           const std::function<double(double, double)>& h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-0.8, 0.8), Z(0.01, 0.3);
  double div = 0.0, trace = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double a = U(rng), b = U(rng);
    div = std::max(div, std::abs(fd_div(E, Vec3(a, b, h(a, b) + Z(rng)), 1e-6)));
  }
  for (int i = 0; i < 50; ++i) {
    const double a = U(rng), b = U(rng);
    trace = std::max(trace, (E.vector_at(0.0, Vec3(a, b, h(a, b))) - data(a, b)).norm());
  }
  return {div, trace};
}

void flat_checks(SuiteContext& ctx, Section& s) {
  const auto ext = extend_flat(kFlatData);
  auto rng = ctx.rng("decomp.flat");
  const auto [div, trace] = extension_errors(ext.E, kFlatData, [](double, double) { return 0.0; }, rng);
  s.check_max("flat_divergence", div, 1e-5);
  s.check_max("flat_trace", trace, 1e-6);
  s.check_true("flat_support_exact", ext.E.vector_at(0.0, Vec3(0.2, 0.3, 0.2501)).norm() == 0.0 &&
                                         ext.E.vector_at(0.0, Vec3(1.126, 0.0, 0.1)).norm() == 0.0 &&
                                         ext.E.vector_at(0.0, Vec3(0.0, -1.126, 0.05)).norm() == 0.0 &&
                                         ext.support.half_width == 1.125 && ext.support.height == 0.25);

  PlanarData other = [](double a, double b) { return Vec3(0.0, a * b * (1 - a * a), std::sin(kPi * a) * b * b); };
  PlanarData sum = [other](double a, double b) { return Vec3(kFlatData(a, b) + 2.0 * other(a, b)); };
  const auto e2 = extend_flat(other), e3 = extend_flat(sum);
  double lin = 0.0;
  for (const Vec3& x : {Vec3(0.1, 0.2, 0.05), Vec3(-0.5, 0.7, 0.15), Vec3(0.9, -0.9, 0.2)}) {
    const Vec3 l = ext.E.vector_at(0.0, x) + 2.0 * e2.E.vector_at(0.0, x);
    lin = std::max(lin, (e3.E.vector_at(0.0, x) - l).norm() / (1.0 + l.norm()));
  }
  s.check_max("flat_linearity", lin, 1e-12);

  PlanarData with_flux = [](double a, double b) {
    return Vec3(0.0, 0.0, std::cos(0.5 * kPi * a) * std::cos(0.5 * kPi * b));
  };
  bool rejected = false;
  try {
    extend_flat(with_flux);
  } catch (const ContractError&) {
    rejected = true;
  }
  s.check_true("flat_flux_contract", rejected);
}

void graph_checks(SuiteContext& ctx, Section& s) {
  const GraphChart flat{[](double, double) { return 0.0; }, [](double, double) { return Eigen::Vector2d(0.0, 0.0); }};
  const auto a = extend_graph(kFlatData, flat);
  const auto b = extend_flat(kFlatData);
  double same = 0.0;
  for (const Vec3& x : {Vec3(0.1, 0.2, 0.05), Vec3(-0.5, 0.7, 0.15)})
    same = std::max(same, (a.E.vector_at(0.0, x) - b.E.vector_at(0.0, x)).norm());
  s.check_max("graph_reduces_to_flat", same, 0.0);

  const auto chart = cosine_chart();
  PlanarData data = [chart](double p, double q) {
    Vec3 v = kFlatData(p, q);
    v[2] += v[0] * chart.grad_h(p, q)[0];
    return v;
  };
  const auto ext = extend_graph(data, chart);
  auto rng = ctx.rng("decomp.graph");
  const auto [div, trace] = extension_errors(ext.E, data, chart.h, rng);
  s.check_max("graph_divergence", div, 1e-5);
  s.check_max("graph_trace", trace, 1e-6);
  s.check_true("graph_support_exact", ext.E.vector_at(0.0, Vec3(0.2, 0.3, chart.h(0.2, 0.3) + 0.2501)).norm() == 0.0 &&
                                          ext.E.vector_at(0.0, Vec3(1.126, 0.0, 0.1)).norm() == 0.0);

  const GraphChart tall{[](double, double) { return 0.3; }, [](double, double) { return Eigen::Vector2d(0.0, 0.0); }};
  bool rejected = false;
  try {
    extend_graph(kFlatData, tall);
  } catch (const DomainError&) {
    rejected = true;
  }
  s.check_true("graph_domain_error", rejected);
}

void harmonic_checks(Section& s) {
  const std::vector<BoundarySphere> spheres{{Vec3(0, 0, 0), 1.0}, {Vec3(5, 0, 0), 1.0}};
  double norm = 0.0;
  for (std::size_t l = 0; l < 2; ++l) {
    const Vec3 xl = spheres[l].center;
    auto gradH0 = [xl](const Vec3& x) {
      const Vec3 d = x - xl;
      return Vec3(-d / std::pow(d.norm(), 3));
    };
    const auto hp = harmonic_part(gradH0, spheres);
    for (std::size_t k = 0; k < 2; ++k) norm = std::max(norm, std::abs(4.0 * kPi * hp.g[k] - 4.0 * kPi * (k == l)));
  }
  s.check_max("harmonic_flux_normalization", norm, 1e-10);

  auto outflow = [spheres](const Vec3& x) {
    const auto& sp = (x - spheres[0].center).norm() < 2.0 ? spheres[0] : spheres[1];
    return Vec3(-(x - sp.center).normalized());
  };
  const auto hp = harmonic_part(outflow, spheres);
  const SphereRule rule(32, 64);
  double residual = 0.0;
  for (const auto& sp : spheres) {
    double r = 0.0;
    for (const auto& n : rule.nodes()) {
      const Vec3 x = sp.center + sp.radius * n.direction;
      r += n.weight * sp.radius * sp.radius * (outflow(x) - hp.gradient.vector_at(0.0, x)).dot(-n.direction);
    }
    residual = std::max(residual, std::abs(r));
  }
  s.check_max("harmonic_residual_flux", residual, 1e-8);

  double lap = 0.0;
  for (const Vec3& x : {Vec3(2.5, 0.3, 0.0), Vec3(-1.0, 1.0, 1.0), Vec3(5.0, 0.0, 1.6)}) {
    const double h = 1e-3;
    double l = 0.0;
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e[j] = h;
      l += (hp.H.scalar_at(0.0, x + e) - 2.0 * hp.H.scalar_at(0.0, x) + hp.H.scalar_at(0.0, x - e)) / (h * h);
    }
    lap = std::max(lap, std::abs(l));
  }
  s.check_max("harmonic_laplacian", lap, 1e-6);
  s.record("harmonic_outflow_g", hp.g);
}

}  // namespace

void run_decompose(SuiteContext& ctx) {
  const Params& P = ctx.params;
  const std::string part = P.text("part");
  const double R = P.real("R");
  const int samples = static_cast<int>(P.integer("samples"));
  if (!(R > 0.0)) throw ConfigError("R", "key 'R' must be > 0");
  if (samples < 1) throw ConfigError("samples", "key 'samples' must be at least 1");
  Section& s = ctx.report->section("decomp");
  if (part == "all" || part == "force") {
    ScopedTimer t(ctx, "decomp.force");
    force_checks(ctx, s, P.text("field"), R, samples);
  }
  if (part != "force") {
    ScopedTimer t(ctx, "decomp.extension");
    if (part == "all" || part == "flat") flat_checks(ctx, s);
    if (part == "all" || part == "graph") graph_checks(ctx, s);
    if (part == "all" || part == "harmonic") harmonic_checks(s);
  }
}

}  // namespace nsasym
