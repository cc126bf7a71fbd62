// Configuration-driven scenario runner wiring transforms, solver and
// diagnostics into reproducible experiments.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlwave/io.hpp"

namespace nlwave {

enum class Scenario { Linear, PrototypeNull, QuasiCaseA, QuasiCaseB, NonnullContrast, Custom };

std::string scenario_name(Scenario s);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        lineno(line) {}
  int lineno;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::Linear;
  int grid_n = 128;
  double half_width = 20.0 * M_PI;
  double dt = 0.0;  // 0: use the default 0.4 h
  double t_end = 20.0;
  int report_every = 5;
  double amplitude = 0.01;
  double data_width = 1.5;
  double amplitude2 = 0.0;   // optional second data scale (broad + narrow presets)
  double data_width2 = 0.0;  // required when amplitude2 != 0
  std::string tensor_path;
  std::string quasi_path;
  double picard_tol = 1e-10;
  int picard_max = 50;
  bool dealias = true;
  std::uint64_t seed = 0;
  double noise_amp = 0.0;  // seeded smooth perturbation, relative to amplitude
  std::string output_path = "run.csv";
  std::string checkpoint_path;  // final-state dump on completion, if set
  FieldFormat field_format = FieldFormat::Csv;

  std::vector<std::string> warnings;  // non-fatal validation notes

  double spacing() const { return 2.0 * half_width / grid_n; }
  double effective_dt() const { return dt > 0.0 ? dt : 0.4 * spacing(); }

  void validate();  // throws ConfigError; fills warnings
};

// Parse a flat key=value file; '#' starts a comment. Unknown keys are
// rejected with the offending line number.
ScenarioConfig load_config(const std::string& path);

struct RunSummary {
  Scenario scenario = Scenario::Linear;
  bool completed = false;
  std::optional<double> failure_time;
  std::optional<DecayFit> fit_e1, fit_e2;
  double e1_initial = 0.0, e1_final = 0.0;
  double ks_min = 0.0, ks_max = 0.0;          // over reports with t >= 1
  double good_deriv_max = 0.0;
  double lemma31_t1 = 0.0, lemma31_max = 0.0;  // first report at t >= 1, max after
  int max_picard_iters = 0;
  bool picard_ambiguous = false;
  double wall_time_s = 0.0;
  std::vector<std::string> notes;
};

struct RunResult {
  RunSummary summary;
  std::vector<EnergyReport<double>> reports;
};

// Build the scenario's initial-value problem (data plus tensor).
FullyNonlinearIVP<double> build_scenario_ivp(const ScenarioConfig& cfg);

// Run the experiment: evolve, collect reports, write the CSV and the summary
// text file. NonConvergence is recorded in the summary, not rethrown.
RunResult run(const ScenarioConfig& cfg);

// Write the report table (exact column order) and a text summary next to it
// (path + ".summary.txt"). Throws std::invalid_argument on an empty log and
// IoError on unwritable paths.
void emit_tables(const std::vector<EnergyReport<double>>& reports,
                 const RunSummary& summary, const std::string& csv_path);

}  // namespace nlwave
