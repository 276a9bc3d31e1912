// Runs `verify-all --seed 42` twice and prints one line per acceptance criterion.

#include "json.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Run {
  int exit_code = -1;
  Json report;
  Json timings;
  std::string text;  ///< report.json without its timestamp line
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run_verify_all(const std::string& cli, const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cmd = "\"" + cli + "\" verify-all --seed 42 --output_dir \"" + dir.string() + "\" > \"" +
                          (dir / "stdout.txt").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (fs::exists(dir / "report.json")) {
    const std::string raw = slurp(dir / "report.json");
    r.report = Json::parse(raw);
    std::istringstream lines(raw);
    for (std::string line; std::getline(lines, line);)
      if (line.find("\"timestamp\"") == std::string::npos) r.text += line + "\n";
  }
  if (fs::exists(dir / "timings.json")) r.timings = Json::parse(slurp(dir / "timings.json"));
  return r;
}

/// Pass flag of section/name, with a note when it is missing or failing.
bool invariant_passes(const Json& report, const std::string& section, const std::string& name, std::string& note) {
  if (!report.contains("sections") || !report["sections"].contains(section)) {
    note += " missing:" + section;
    return false;
  }
  int found = 0;
  bool pass = false;
  for (const auto& inv : report["sections"][section]["invariants"])
    if (inv["name"] == name) {
      ++found;
      pass = inv["pass"].get<bool>();
    }
  if (found != 1) {
    note += " " + section + "/" + name + (found ? " repeated" : " missing");
    return false;
  }
  if (!pass) note += " " + section + "/" + name + " failed";
  return pass;
}

bool within_budget(const Json& timings, const std::string& key, double budget, std::string& note) {
  if (!timings.contains(key)) {
    note += " no timing " + key;
    return false;
  }
  const double t = timings[key].get<double>();
  std::ostringstream os;
  os << " " << key << "=" << t << "s/" << budget << "s";
  note += os.str();
  return t < budget;
}

struct Criterion {
  int id;
  std::string title;
  std::string section;
  std::vector<std::string> invariants;
  std::vector<std::pair<std::string, double>> budgets;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: nsasym_acceptance <nsasym executable> <work directory>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path work = argv[2];

  const Run a = run_verify_all(cli, work / "run1");
  const Run b = run_verify_all(cli, work / "run2");

  const std::vector<Criterion> criteria = {
      {1, "Landau inversion roundtrip", "landau", {"inversion_roundtrip"}, {{"landau.roundtrip", 1.0}}},
      {2,
       "Landau PDE residual",
       "landau",
       {"residual_momentum", "residual_divergence", "residual_fd_order"},
       {{"landau.residual", 30.0}}},
      {3,
       "Flux identity",
       "flux",
       {"flux_identity_per_radius", "extracted_b_error", "radius_spread", "rotation_equivariance"},
       {{"flux", 30.0}}},
      {4,
       "Oseen tensor",
       "oseen",
       {"closed_form_vs_brute_quadrature", "symmetry", "trace_identity", "column_divergence", "decay_constants_finite",
        "decay_constant_refinement_drift"},
       {{"oseen", 120.0}}},
      {5,
       "Potential decay",
       "potentials",
       {"theta_weighted_decay", "lambda_weighted_decay", "lambda_zero_mean_x2_constant",
        "lambda_zero_mean_non_increasing", "lambda_nonzero_mean_growth"},
       {{"potentials.decay", 300.0}}},
      {6,
       "Convolution estimate",
       "potentials",
       {"int_est_ratio_b1_c0_lambda0", "int_est_ratio_b1_c0_lambda1", "int_est_ratio_b2_c0_lambda0",
        "int_est_ratio_b2_c0_lambda1", "int_est_ratio_b0_c1eta_lambda0", "int_est_ratio_b0_c1eta_lambda1",
        "int_est_ratio_b0_c2eta_lambda0", "int_est_ratio_b0_c2eta_lambda1", "int_est_scaling_reduction"},
       {{"potentials.int_est", 120.0}}},
      {7,
       "Force decomposition",
       "decomp",
       {"reconstruction_residual", "mass_defect", "decay_constant", "decay_certificate_spot_ratio",
        "piece_zero_integrals"},
       {{"decomp.force", 60.0}}},
      {8,
       "Extensions and harmonic part",
       "decomp",
       {"flat_divergence", "flat_trace", "flat_support_exact", "graph_divergence", "graph_trace", "graph_support_exact",
        "harmonic_flux_normalization"},
       {{"decomp.extension", 60.0}}},
      {9,
       "Picard solver",
       "perturbed",
       {"converged", "iterations", "contraction_factor_max", "y1_norm_over_2C1eps", "fixed_point_residual",
        "self_similarity_lambda2", "dss_contrast", "log_witness_monotone"},
       {{"perturbed", 1800.0}}},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    std::string note;
    bool pass = a.exit_code == 0;
    if (!pass) note += " verify-all exit " + std::to_string(a.exit_code);
    for (const auto& name : c.invariants) pass = invariant_passes(a.report, c.section, name, note) && pass;
    for (const auto& [key, budget] : c.budgets) pass = within_budget(a.timings, key, budget, note) && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " -" << note << "\n";
    failed += !pass;
  }

  {
    std::string note = " exit codes " + std::to_string(a.exit_code) + "," + std::to_string(b.exit_code);
    const bool same = !a.text.empty() && a.text == b.text;
    note += same ? ", reports identical" : ", reports differ";
    const bool pass = a.exit_code == 0 && b.exit_code == 0 && same;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion 10: Determinism -" << note << "\n";
    failed += !pass;
  }
  if (a.report.contains("summary"))
    std::cout << "verify-all: " << a.report["summary"]["passed"] << "/" << a.report["summary"]["invariants"]
              << " invariants pass\n";
  return failed == 0 ? 0 : 1;
}
