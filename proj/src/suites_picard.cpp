#include "nsasym/oseen.hpp"
#include "nsasym/parallel.hpp"
#include "nsasym/perturbed.hpp"
#include "suites_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace nsasym {

using detail::check_span;
using detail::random_point;
using detail::ScopedTimer;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

/// (eps / (1 + amp)) (1 + amp sin(2 pi log|x| / log period)) (-x2, x1, 0) / |x|^2.
FieldHandle modulated_swirl(double eps, double amp, double period) {
  return FieldHandle::vector([=](const Vec3& x) {
    const double r2 = x.squaredNorm();
    if (r2 == 0.0) return Vec3(Vec3::Zero());
    const double m = 1.0 + amp * std::sin(2.0 * kPi * std::log(std::sqrt(r2)) / std::log(period));
    return Vec3((eps / (1.0 + amp)) * m * Vec3(-x[1], x[0], 0.0) / r2);
  });
}

PerturbedProblem make_problem(const Params& P) {
  const double eps = P.real("eps"), eta = P.real("eta");
  const std::string preset = P.text("preset");
  if (preset == "ss") return ss_problem(eps, eta);
  if (preset == "dss") return dss_problem(eps, eta);
  const double amp = P.real("custom_amplitude"), period = P.real("custom_period"), frac = P.real("custom_u_fraction");
  if (!(amp >= 0.0 && amp < 1.0)) throw ConfigError("custom_amplitude", "key 'custom_amplitude' must lie in [0, 1)");
  if (!(period > 1.0)) throw ConfigError("custom_period", "key 'custom_period' must be > 1");
  if (!(frac >= 0.0 && frac <= 1.0)) throw ConfigError("custom_u_fraction", "key 'custom_u_fraction' must lie in [0, 1]");
  const FieldHandle U = frac > 0.0 ? landau_perturbation(frac * eps) : FieldHandle::zero(Arity::vector3);
  return PerturbedProblem(U, U, modulated_swirl(eps, amp, period), eta, eps, true);
}

PicardGrid make_grid(const Params& P) {
  PicardGrid g;
  const std::string mode = P.text("mode");
  g.mode = mode == "general" ? TimeMode::general
           : mode == "self_similar" ? TimeMode::self_similar
                                    : TimeMode::discrete_self_similar;
  g.n_t = static_cast<int>(P.integer("n_t"));
  g.t_min = P.real("t_min");
  g.t_max = P.real("t_max");
  g.dss_lambda = P.real("dss_lambda");
  g.n_rho = static_cast<int>(P.integer("n_rho"));
  g.rho_min = P.real("rho_min");
  g.rho_max = P.real("rho_max");
  g.n_theta = static_cast<int>(P.integer("n_theta"));
  g.n_phi = static_cast<int>(P.integer("n_phi"));
  try {
    g.validate();
  } catch (const DomainError& e) {
    throw ConfigError("mode", std::string("grid keys rejected: ") + e.what());
  }
  return g;
}

std::vector<Vec3> probe_points(SuiteContext& ctx, const std::string& stream, int n) {
  auto rng = ctx.rng(stream);
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) pts.push_back(random_point(rng, 0.25, 4.0));
  return pts;
}

/// Solve invariants of one converged (or failed) run.
void solve_invariants(Section& s, const std::optional<PicardResult>& r, double eps, double tol, int max_iter) {
  if (!r) {
    s.check_true("converged", false);
    for (const char* n : {"iterations", "contraction_factor_max", "y1_norm_over_2C1eps", "fixed_point_residual"})
      s.check_max(n, kNaN, 0.0);
    return;
  }
  const PicardState& st = r->state;
  s.check_true("converged", st.converged);
  s.check_max("iterations", st.iterations, max_iter);
  s.check_max("contraction_factor_max", max_of(st.contraction_factors), 0.5);
  const double C1 = st.linear_norm / eps;
  s.check_max("y1_norm_over_2C1eps", st.solution()->y1_norm() / (2.0 * C1 * eps), 1.0);
  s.check_max("fixed_point_residual", st.residual, 2.0 * tol);
  s.record("C1", C1);
  s.record("y1_norm", st.solution()->y1_norm());
  s.record("y2_norm", st.y2_norms.at(st.returned));
  s.record("bilinear_constant", st.nonlinear_norm / (eps * st.solution()->y1_norm()));
  s.record("contraction_factors", st.contraction_factors);
  s.record("distances", st.distances);
  s.record("y1_norms", st.y1_norms);
}

void write_field_csv(SuiteContext& ctx, const PicardResult& r, const std::string& preset) {
  const GridField& w = *r.state.solution();
  CsvTable csv({"t", "rho", "theta", "x1", "x2", "x3", "w1", "w2", "w3", "weighted_norm"});
  csv.meta("preset", preset);
  csv.meta("eta", w.eta());
  for (std::size_t i = 0; i < w.weighted().size(); ++i) {
    const auto [t, x] = w.node(i);
    const Vec3 v = w(t, x);
    const double rr = x.norm();
    csv.row({t, rr / std::sqrt(t), std::acos(std::clamp(x[2] / rr, -1.0, 1.0)), x[0], x[1], x[2], v[0], v[1], v[2],
             w.weighted()[i].norm()});
  }
  ctx.write_csv("picard_field.csv", csv);

  const PicardState& st = r.state;
  CsvTable it({"k", "y1_norm", "y2_norm", "distance", "contraction"});
  for (std::size_t k = 0; k < st.y1_norms.size(); ++k)
    it.row({double(k), st.y1_norms[k], st.y2_norms[k], k >= 1 && k - 1 < st.distances.size() ? st.distances[k - 1] : kNaN,
            k >= 2 && k - 2 < st.contraction_factors.size() ? st.contraction_factors[k - 2] : kNaN});
  ctx.write_csv("picard_iterations.csv", it);
}

/// Every perturbed-module check beyond the main solve.
void full_checks(SuiteContext& ctx, Section& s, const Params& P, const PicardGrid& grid, const PicardOptions& opt,
                 const std::optional<PicardResult>& main_result) {
  const double eps = P.real("eps"), eta = P.real("eta"), tol = opt.tol;
  const PerturbedProblem p = ss_problem(eps, eta);

  s.check_max("w0_divergence_defect", p.div_defect(), 1e-10);
  s.check_max("smallness_over_eps", std::max({p.U_norm(), p.U_tilde_norm(), p.w0_norm()}) / eps, 1.0 + 1e-9);
  s.check_true("gradient_certificate", p.has_gradient_certificate());

  const PerturbedProblem zero = zero_problem(eta);
  s.check_max("linear_part_zero_data", linear_part(zero, 1.0, Vec3(0.3, 0.1, 0.2)).norm(), 0.0);
  {
    double C = 0.0;
    for (double t : {1e-2, 1e-1, 1.0, 10.0})
      for (double r : {0.05, 0.5, 5.0, 50.0}) {
        const Vec3 x = r * Vec3(0.6, 0.0, 0.8);
        C = std::max(C, linear_part(p, t, x).norm() * (r + std::sqrt(t)) / eps);
      }
    s.check_range("linear_part_decay_constant", C, 0.1, 2.0);
  }
  {
    const FieldHandle wL = FieldHandle::vector_st([&](double t, const Vec3& x) { return linear_part(p, t, x); });
    double d = 0.0;
    for (double r : {0.2, 1.0, 4.0}) {
      const Vec3 x = r * Vec3(0.3, -0.5, 0.81).normalized();
      d = std::max(d, std::abs(fd_divergence(wL, 0.5, x, 1e-4 * r)));
    }
    s.check_max("linear_part_divergence", d, 1e-5);
  }
  {
    const FieldHandle z = FieldHandle::zero(Arity::vector3, FieldDomain::space_time);
    s.check_max("nonlinear_part_zero_data", nonlinear_part(p, z, 0.0, 1.0, Vec3(0.3, 0.2, 0.5), opt.quadrature).norm(),
                0.0);
  }
  {
    auto rng = ctx.rng("picard.kernel_estimate");
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<std::pair<double, Vec3>> samples;
    for (int i = 0; i < 20; ++i) {
      const double t = std::exp(2.0 * U(rng));
      samples.emplace_back(t, random_point(rng, std::exp(-2.0), std::exp(2.0)));
    }
    const auto ratios = parallel_map<double>(samples.size(), [&](std::size_t i) {
      const auto& [t, x] = samples[i];
      const double r = x.norm();
      return model_integral(t, x, eta, 1, SpatialRule{8, 4.0, 12, 12}, 6) /
             (std::pow(r + std::sqrt(t), eta - 1.0) * std::pow(r, -eta));
    });
    check_span(s, "kernel_estimate_ratio", *std::min_element(ratios.begin(), ratios.end()),
               *std::max_element(ratios.begin(), ratios.end()), 0.01, 100.0);
  }

  // The self-similar reference: the main run when it is SS general, else a fresh one.
  PicardGrid ss_grid = grid;
  ss_grid.mode = TimeMode::general;
  std::optional<PicardResult> general;
  if (main_result && P.text("preset") == "ss" && grid.mode == TimeMode::general)
    general = main_result;
  else
    general = picard_solve(p, ss_grid, opt);
  PicardGrid fast_grid = ss_grid;
  fast_grid.mode = TimeMode::self_similar;
  fast_grid.n_t = 1;
  const PicardResult fast = picard_solve(p, fast_grid, opt);
  {
    const auto& a = general->state.solution()->weighted();
    const auto& b = fast.state.solution()->weighted();
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i % b.size()]).norm());
    s.check_max("fast_path_vs_general_path", d / fast.state.solution()->y1_norm(), 1e-10);
  }
  const auto pts = probe_points(ctx, "picard.self_similarity", 50);
  s.check_max("self_similarity_lambda2", check_self_similarity(general->w, 2.0, {0.5, 1.0}, pts, eta), 10.0 * tol);

  {
    const FieldHandle ny = nystrom_field(p, fast.state);
    const int n = static_cast<int>(P.integer("div_samples"));
    const auto xs = probe_points(ctx, "picard.divergence", n);
    auto rng = ctx.rng("picard.divergence_times");
    std::uniform_real_distribution<double> logt(std::log(0.5), std::log(2.0));
    std::vector<double> ts;
    for (int i = 0; i < n; ++i) ts.push_back(std::exp(logt(rng)));
    const auto divs = parallel_map<double>(xs.size(), [&](std::size_t i) {
      return std::abs(fd_divergence(ny, ts[i], xs[i], 1e-4 * xs[i].norm()));
    });
    s.check_max("nystrom_divergence", max_of(divs), 1e-4);
  }

  {
    PicardGrid small = fast_grid;
    small.n_rho = 7;
    small.rho_min = 0.125;
    small.rho_max = 8.0;
    small.n_theta = 5;
    PicardOptions o = opt;
    const PicardResult e1 = picard_solve(p, small, o);
    const PicardResult e2 = picard_solve(ss_problem(0.5 * eps, eta), small, o);
    const PicardResult e4 = picard_solve(ss_problem(0.25 * eps, eta), small, o);
    const double r12 = e1.state.solution()->y1_norm() / e2.state.solution()->y1_norm();
    const double r24 = e2.state.solution()->y1_norm() / e4.state.solution()->y1_norm();
    check_span(s, "eps_halving_norm_ratio", std::min(r12, r24), std::max(r12, r24), 1.8, 2.2);
    s.check_true("eps_halving_iterations_non_increasing",
                 e2.state.iterations <= e1.state.iterations && e4.state.iterations <= e2.state.iterations);

    // Largest eps in {0.1 2^-k} whose contraction factors stay below 0.9.
    double eps_max = 0.0;
    o.max_iter = 12;
    for (int k = 0; k < 8 && eps_max == 0.0; ++k) {
      const double e = 0.1 * std::pow(2.0, -k);
      try {
        const PicardResult r = picard_solve(ss_problem(e, eta), small, o);
        if (max_of(r.state.contraction_factors) < 0.9) eps_max = e;
      } catch (const ConvergenceError&) {
      }
    }
    s.record("eps_max", eps_max);
    bool diverged = false;
    PicardGrid tiny = small;
    tiny.n_rho = 5;
    tiny.rho_min = 0.25;
    tiny.rho_max = 4.0;
    o.max_iter = 8;
    try {
      picard_solve(ss_problem(20.0, eta), tiny, o);
    } catch (const DivergenceError&) {
      diverged = true;
    }
    s.check_true("large_data_divergence_error", diverged);
  }

  {
    // DSS contrast on a reduced general-path grid.
    const PerturbedProblem d = dss_problem(eps, eta);
    const FieldHandle w0 = d.w0();
    const FieldHandle w0t = FieldHandle::vector_st([w0](double, const Vec3& x) { return w0.vector_at(0.0, x); });
    const double w2 = check_self_similarity(w0t, 2.0, {1.0}, pts, eta);
    const double w3 = check_self_similarity(w0t, 3.0, {1.0}, pts, eta);
    s.check_max("dss_data_lambda2_defect", w2, 1e-15);
    s.check_min("dss_data_lambda3_defect", w3, 1e-3);
    PicardGrid g = grid;
    g.mode = TimeMode::discrete_self_similar;
    g.dss_lambda = 2.0;
    g.n_t = 3;
    g.n_rho = 9;
    g.n_theta = 7;
    const PicardResult r = picard_solve(d, g, opt);
    const double s2 = check_self_similarity(r.w, 2.0, {0.5, 1.0}, pts, eta);
    const double s3 = check_self_similarity(r.w, 3.0, {0.5, 1.0}, pts, eta);
    s.check_min("dss_contrast", s3 / std::max(s2, 1e-16), 5.0);
    s.record("dss_lambda2_deviation", s2);
    s.record("dss_lambda3_deviation", s3);
    s.record("dss_iterations", r.state.iterations);
  }

  {
    const double oracle = 4.0 * kPi / 3.0 * std::log(2.0);
    const LogWitness w = log_correction_witness(p, {2, 3, 4, 5, 6});
    bool increasing = w.monotone;
    for (std::size_t i = 1; i < w.differences.size(); ++i) increasing = increasing && w.differences[i] > w.differences[i - 1];
    s.check_true("log_witness_monotone", increasing);
    s.check_range("log_witness_at_parabolic", w.at_parabolic, 0.5, 20.0);
    const LogWitness deep = log_correction_witness(p, {10, 11, 12});
    s.check_max("log_witness_slope_vs_oracle", std::abs(deep.slope - oracle) / oracle, 0.005);
    s.record("log_witness_differences", w.differences);
    s.record("log_witness_deep_slope", deep.slope);
  }

  {
    const Vec3 a(0.3, -0.5, 0.8);
    const auto F = [&](const Vec3& y) { return Mat3(a * a.transpose() * std::exp(-y.squaredNorm())); };
    const auto newton = [](const Vec3& y) { return std::pow(kPi, 1.5) * gaussian_potential(0.25, y.norm()); };
    double err = 0.0;
    for (double r : {0.3, 1.0, 2.5}) {
      const Vec3 x = r * Vec3(0.6, 0.0, 0.8);
      const double h = 1e-3;
      const double expected = (newton(x + h * a) - 2.0 * newton(x) + newton(x - h * a)) / (h * h);
      err = std::max(err, std::abs(pressure_from_flux(F, x, {1.0}) - expected) / std::abs(expected));
    }
    s.check_max("pressure_gaussian_oracle", err, 2e-3);
    const FieldHandle w = fast.w;
    const FieldHandle pf = FieldHandle::scalar_st([&](double t, const Vec3& x) { return pressure(p, w, t, x); });
    const double c = weak_lq_norm(pf, 1.5, RadialSphericalGrid(GridSpec{0.125, 8.0, 8, 6, 4}), 1.0);
    s.check_range("pressure_weak_l32_constant_over_eps", c / eps, 1e-12, 1e3);
  }
}

}  // namespace

void run_picard(SuiteContext& ctx) {
  ScopedTimer total(ctx, "perturbed");
  const Params& P = ctx.params;
  const double eps = P.real("eps"), eta = P.real("eta");
  if (!(eps > 0.0)) throw ConfigError("eps", "key 'eps' must be > 0");
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("eta", "key 'eta' must lie in (0, 1)");
  PicardOptions opt;
  opt.tol = P.real("tol");
  opt.max_iter = static_cast<int>(P.integer("max_iter"));
  if (!(opt.tol > 0.0)) throw ConfigError("tol", "key 'tol' must be > 0");
  if (opt.max_iter < 1) throw ConfigError("max_iter", "key 'max_iter' must be at least 1");
  if (P.integer("div_samples") < 1) throw ConfigError("div_samples", "key 'div_samples' must be at least 1");
  const PicardGrid grid = make_grid(P);
  const std::string preset = P.text("preset");
  const PerturbedProblem problem = make_problem(P);
  Section& s = ctx.report->section("perturbed");

  std::optional<PicardResult> result;
  try {
    result = picard_solve(problem, grid, opt);
  } catch (const ConvergenceError& e) {
    s.record("solver_error", e.what());
  }
  solve_invariants(s, result, eps, opt.tol, opt.max_iter);
  if (result) {
    write_field_csv(ctx, *result, preset);
    if (preset == "ss" && grid.mode != TimeMode::discrete_self_similar && P.text("checks") == "solve") {
      const auto pts = probe_points(ctx, "picard.self_similarity", 50);
      s.check_max("self_similarity_lambda2", check_self_similarity(result->w, 2.0, {0.5, 1.0}, pts, eta), 10.0 * opt.tol);
    }
  }
  s.record("preset", preset);
  s.record("grid_nodes", grid.size());
  if (P.text("checks") == "full") full_checks(ctx, s, P, grid, opt, result);
}

}  // namespace nsasym
