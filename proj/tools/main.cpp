#include "CLI11.hpp"
#include "nsasym/config.hpp"
#include "nsasym/parallel.hpp"
#include "nsasym/report.hpp"
#include "nsasym/suites.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct Invocation {
  std::string config_file;
  std::map<std::string, std::string> flags;
};

std::string param_help(const nsasym::ParamSpec& p) {
  std::string h = p.help + " [default " + p.default_value + "]";
  if (!p.choices.empty()) {
    h += " {";
    for (std::size_t i = 0; i < p.choices.size(); ++i) h += (i ? "|" : "") + p.choices[i];
    h += "}";
  }
  return h;
}

int config_error(const std::string& message, const CLI::App* sub, const CLI::App& app) {
  std::cerr << "error: " << message << "\n\n" << (sub ? sub->help() : app.help());
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace nsasym;
  CLI::App app{"Numerical verification of Navier-Stokes solutions with Landau asymptotics"};
  app.name("nsasym");
  app.require_subcommand(1);
  app.set_version_flag("--version", "nsasym 0.1.0");

  std::map<std::string, Invocation> inv;
  std::map<std::string, CLI::App*> subs;
  for (const std::string& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name, subcommand_help(name));
    subs[name] = sub;
    Invocation& in = inv[name];
    sub->add_option("--config", in.config_file, "flat `key = value` file; flags override its values");
    for (const ParamSpec& p : params_for(name)) {
      const std::string key = p.name;
      sub->add_option_function<std::string>(
             "--" + key, [&in, key](const std::string& v) { in.flags[key] = v; }, param_help(p))
          ->type_name(p.type == ParamType::integer ? "INT"
                      : p.type == ParamType::real  ? "FLOAT"
                      : p.type == ParamType::real_list ? "LIST"
                                                       : "TEXT");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const CLI::App* active = nullptr;
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) active = sub;
    std::string msg = e.what();
    if (active) msg += "; valid keys: " + valid_keys(params_for(active->get_name()));
    return config_error(msg, active, app);
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  const CLI::App* sub = subs.at(subcommand);
  const Invocation& in = inv.at(subcommand);

  Report report;
  Json timings = Json::object();
  SuiteContext ctx;
  try {
    std::map<std::string, std::string> file_values;
    if (!in.config_file.empty()) file_values = read_config_file(in.config_file);
    ctx.params = resolve_params(params_for(subcommand), file_values, in.flags);
    const std::int64_t seed = ctx.params.integer("seed");
    const std::int64_t jobs = ctx.params.integer("jobs");
    if (seed < 0) throw ConfigError("seed", "key 'seed' must be non-negative");
    if (jobs < 1) throw ConfigError("jobs", "key 'jobs' must be at least 1");
    ctx.seed = static_cast<std::uint64_t>(seed);
    ctx.output_dir = ctx.params.text("output_dir");
    set_jobs(static_cast<int>(jobs));
    std::filesystem::create_directories(ctx.output_dir);

    report.set_meta("tool", "nsasym");
    report.set_meta("version", "0.1.0");
    report.set_meta("subcommand", subcommand);
    Json config = Json::object();
    for (const auto& [k, v] : ctx.params.values())
      if (k != "output_dir" && k != "jobs") config[k] = v;
    report.set_meta("config", config);
    ctx.report = &report;
    ctx.timings = &timings;
    run_subcommand(subcommand, ctx);
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    if (msg.find("'" + e.key() + "'") == std::string::npos) msg += " (key '" + e.key() + "')";
    return config_error(msg, sub, app);
  } catch (const std::filesystem::filesystem_error& e) {
    return config_error(std::string("cannot create output directory: ") + e.what(), sub, app);
  } catch (const std::exception& e) {
    std::cerr << "error: " << subcommand << " aborted: " << e.what() << "\n";
    return kExitFail;
  }

  try {
    report.write(ctx.path("report.json"), utc_timestamp());
    std::ofstream t(ctx.path("timings.json"));
    t << timings.dump(2) << '\n';
    if (!t) throw std::runtime_error("cannot write " + ctx.path("timings.json"));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }

  const auto failed = report.failures();
  std::cout << subcommand << ": " << report.invariant_count() - failed.size() << "/" << report.invariant_count()
            << " invariants pass; report " << ctx.path("report.json") << "\n";
  if (failed.empty()) return kExitPass;
  std::cout << "failing invariants:\n";
  for (const auto& f : failed) std::cout << "  " << f << "\n";
  return kExitFail;
}
