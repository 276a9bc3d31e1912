#pragma once

#include "nsasym/config.hpp"
#include "nsasym/report.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace nsasym {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "NSASYM_OUTPUT_DIR";

/// State shared by the suites of one CLI run.
struct SuiteContext {
  Params params;
  std::uint64_t seed = 42;
  std::string output_dir = ".";
  Report* report = nullptr;
  Json* timings = nullptr;  ///< seconds per timed block; kept out of report.json
  std::vector<std::string> files;  ///< files written, relative to output_dir

  /// Generator for one named sample set, determined by (seed, stream).
  std::mt19937_64 rng(const std::string& stream) const;
  std::string path(const std::string& file) const;
  void record_time(const std::string& key, double seconds) const;
  void write_csv(const std::string& file, const class CsvTable& table);
};

/// landau, kernel, potentials, decompose, picard, flux, verify-all.
const std::vector<std::string>& subcommands();
std::string subcommand_help(const std::string& subcommand);

/// Parameters of a subcommand, including seed, jobs and output_dir.
std::vector<ParamSpec> params_for(const std::string& subcommand);

/// Runs the subcommand and fills ctx.report. Throws ConfigError on
/// parameters that are well-typed but unusable.
void run_subcommand(const std::string& subcommand, SuiteContext& ctx);

/// Individual module suites; verify-all runs all of them on their defaults.
void run_fields(SuiteContext& ctx);
void run_landau(SuiteContext& ctx);
void run_kernel(SuiteContext& ctx);
void run_potentials(SuiteContext& ctx);
void run_decompose(SuiteContext& ctx);
void run_picard(SuiteContext& ctx);
void run_flux(SuiteContext& ctx);

}  // namespace nsasym
