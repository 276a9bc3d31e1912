#include "nsasym/suites.hpp"

#include "nsasym/report.hpp"
#include "suites_common.hpp"

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>

namespace nsasym {

namespace {

ParamSpec real(const std::string& name, const std::string& def, const std::string& help) {
  return {name, ParamType::real, def, help, {}};
}
ParamSpec integer(const std::string& name, const std::string& def, const std::string& help) {
  return {name, ParamType::integer, def, help, {}};
}
ParamSpec choice(const std::string& name, std::vector<std::string> choices, const std::string& help) {
  const std::string def = choices.front();
  return {name, ParamType::choice, def, help, std::move(choices)};
}

std::vector<ParamSpec> common_params() {
  const char* env = std::getenv(kOutputDirEnv);
  const std::string out = env && *env ? env : "nsasym-output";
  return {integer("seed", "42", "seed of all random sample points"),
          integer("jobs", "1", "worker threads inside a suite"),
          {"output_dir", ParamType::text, out, std::string("directory for report.json and CSV files (default $") +
                                                   kOutputDirEnv + " or ./nsasym-output)", {}}};
}

const std::map<std::string, std::vector<ParamSpec>>& registry() {
  static const std::map<std::string, std::vector<ParamSpec>> r = {
      {"landau",
       {real("A", "2.0", "profile parameter A > 1"), real("r_min", "0.5", "smallest grid radius"),
        real("r_max", "50", "largest grid radius"), integer("n_r", "32", "number of radii"),
        integer("n_theta", "16", "polar nodes"), integer("n_phi", "32", "azimuthal nodes"),
        real("h_rel", "1e-4", "relative FD step")}},
      {"kernel",
       {integer("n", "20", "log grid size per axis"), real("lo", "0.01", "lower end of the (t, |x|) grid"),
        real("hi", "100", "upper end of the (t, |x|) grid")}},
      {"potentials",
       {choice("case", {"all", "theta", "lambda", "intest"}, "which potential check to run"),
        real("eta", "0.25", "eta of the int-est test matrix"), real("alpha", "1.5", "decay exponent of the Theta data"),
        integer("n_samples", "30", "log-spaced |x| samples for int-est")}},
      {"decompose",
       {choice("part", {"all", "force", "flat", "graph", "harmonic"}, "which construction to run"),
        choice("field", {"rational", "odd"}, "test force: (1+|x|^2)^-3 or x1 (1+|x|^2)^-4"),
        real("R", "1.0", "support radius of f0"), integer("samples", "50", "random reconstruction samples")}},
      {"picard",
       {real("eps", "0.01", "smallness parameter"), real("eta", "0.25", "weight exponent in (0, 1)"),
        choice("preset", {"ss", "dss", "custom"}, "data preset"),
        choice("mode", {"general", "self_similar", "discrete_self_similar"}, "time discretization"),
        integer("n_t", "3", "time slices (per period in DSS mode)"), real("t_min", "0.25", "first time slice"),
        real("t_max", "4.0", "last time slice"), real("dss_lambda", "2.0", "DSS factor of the grid"),
        integer("n_rho", "13", "parabolic radii"), real("rho_min", "0.125", "smallest |x|/sqrt t"),
        real("rho_max", "8.0", "largest |x|/sqrt t"), integer("n_theta", "9", "polar angles including the poles"),
        integer("n_phi", "0", "azimuths (0 for axisymmetric data)"), real("tol", "1e-7", "Picard tolerance"),
        integer("max_iter", "30", "Picard iteration limit"),
        choice("checks", {"solve", "full"}, "solve only, or every perturbed-module check"),
        integer("div_samples", "50", "samples of the divergence check"),
        real("custom_amplitude", "0.3", "custom preset: modulation amplitude of w0"),
        real("custom_period", "2.0", "custom preset: multiplicative period of the modulation"),
        real("custom_u_fraction", "1.0", "custom preset: sup |x||U| as a fraction of eps")}},
      {"flux",
       {choice("preset", {"landau", "perturbed", "zero"}, "input fields"), real("A", "2.0", "Landau parameter"),
        {"radii", ParamType::real_list, "2,4,8", "radii ladder", {}}, integer("time_nodes", "1", "time nodes"),
        real("period", "1.0", "averaging window"), integer("n_theta", "32", "polar nodes of the sphere rule"),
        integer("n_phi", "64", "azimuthal nodes of the sphere rule"),
        real("spread_tol", "1e-3", "relative spread that flags the ladder")}},
      {"verify-all", {}},
  };
  return r;
}

}  // namespace

std::mt19937_64 SuiteContext::rng(const std::string& stream) const {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  for (unsigned char c : stream) words.push_back(c);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

std::string SuiteContext::path(const std::string& file) const {
  return (std::filesystem::path(output_dir) / file).string();
}

void SuiteContext::record_time(const std::string& key, double seconds) const {
  if (timings) (*timings)[key] = seconds;
}

void SuiteContext::write_csv(const std::string& file, const CsvTable& table) {
  table.write(path(file));
  files.push_back(file);
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"landau", "kernel", "potentials", "decompose",
                                             "picard", "flux",   "verify-all"};
  return s;
}

std::string subcommand_help(const std::string& subcommand) {
  static const std::map<std::string, std::string> h = {
      {"landau", "Landau solution: |b|(A) inversion, velocity/pressure samples and residuals"},
      {"kernel", "Oseen tensor: closed form vs quadrature, identities and decay constants"},
      {"potentials", "Space-time potentials Theta, Lambda and the convolution estimate"},
      {"decompose", "Force decomposition, divergence-free extensions and the harmonic part"},
      {"picard", "Picard solver for the perturbed system with (D)SS data"},
      {"flux", "Momentum flux integrals and extraction of b"},
      {"verify-all", "Every module suite on its defaults"},
  };
  return h.at(subcommand);
}

std::vector<ParamSpec> params_for(const std::string& subcommand) {
  const auto& r = registry();
  const auto it = r.find(subcommand);
  if (it == r.end()) throw ConfigError("subcommand", "unknown subcommand '" + subcommand + "'");
  std::vector<ParamSpec> out = common_params();
  out.insert(out.end(), it->second.begin(), it->second.end());
  return out;
}

void run_subcommand(const std::string& subcommand, SuiteContext& ctx) {
  static const std::map<std::string, std::function<void(SuiteContext&)>> runners = {
      {"landau", run_landau}, {"kernel", run_kernel},   {"potentials", run_potentials},
      {"decompose", run_decompose}, {"picard", run_picard}, {"flux", run_flux},
  };
  if (subcommand != "verify-all") {
    runners.at(subcommand)(ctx);
    return;
  }
  const Params own = ctx.params;
  const auto run_defaults = [&](const std::string& name, const std::map<std::string, std::string>& overrides,
                                const std::function<void(SuiteContext&)>& fn) {
    std::map<std::string, std::string> flags = overrides;
    for (const char* k : {"seed", "jobs", "output_dir"}) flags[k] = own.values().at(k);
    ctx.params = resolve_params(params_for(name), {}, flags);
    fn(ctx);
  };
  {
    detail::ScopedTimer t(ctx, "fields");
    ctx.params = own;
    run_fields(ctx);
  }
  run_defaults("landau", {}, run_landau);
  run_defaults("flux", {}, run_flux);
  run_defaults("kernel", {}, run_kernel);
  run_defaults("potentials", {}, run_potentials);
  run_defaults("decompose", {}, run_decompose);
  run_defaults("picard", {{"checks", "full"}}, run_picard);
  ctx.params = own;
}

}  // namespace nsasym
