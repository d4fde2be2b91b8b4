#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavesel/metrics.hpp"
#include "wavesel/simulate.hpp"

namespace wavesel {

/// Generating process for the simulated patterns: an inhomogeneous Poisson
/// process, or a Thomas cluster process at moderate (kappa=80, sigma=0.12)
/// or high (kappa=30, sigma=0.06) clustering.
enum class ScenarioKind { Poisson, ThomasModerate, ThomasHigh };

const char* scenario_kind_name(ScenarioKind k);
ScenarioKind scenario_kind_from_name(const std::string& name);

struct ScenarioConfig {
  std::string name = "scenario";
  ScenarioKind kind = ScenarioKind::Poisson;
  std::vector<double> mu_targets = {100.0, 500.0};
  int p_n = 50;            ///< candidate predictors (first 10 carry signal)
  int j0 = 0;
  int J = 2;
  int dummy_count = 256;   ///< requested dummy points (rounded up to a square)
  int replicates = 20;
  std::uint64_t master_seed = 1;
  std::vector<Method> methods = {Method::LLI, Method::LLS, Method::Lasso, Method::Scad,
                                 Method::AL};
  GrfSpec grf;             ///< covariate field model (per-task seeds derived)
  double thomas_kappa = 80.0;
  double thomas_sigma = 0.12;
  int rmspe_grid = 64;
  std::string output_dir = "runs";
  double scad_shape = 3.7;
  PathSpec path;
  SolverControl control;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parse a scenario configuration from JSON text.  Malformed JSON raises
/// ConfigError with the line number; semantic errors name the field and the
/// accepted values.
ScenarioConfig parse_scenario_config(const std::string& json_text);
ScenarioConfig load_scenario_config(const std::string& path);

/// One (mu, replicate, method) run.  `ok == false` rows carry only `error`.
struct ReplicateRecord {
  double mu = 0.0;
  int replicate = 0;  ///< 1-based
  Method method = Method::LLI;
  std::uint64_t seed = 0;  ///< task seed shared by all methods of the replicate
  int n_points = 0;
  bool ok = false;
  std::string error;
  EvaluationReport report;
  SelectionDiagnostics diagnostics;
};

struct ScenarioRunResult {
  int tasks = 0;   ///< (mu, replicate) pairs simulated
  int runs = 0;    ///< method-level runs attempted
  int errors = 0;  ///< method-level runs that threw
  std::string output_dir;
  std::vector<ReplicateRecord> records;  ///< deterministic order
};

/// Run every (mu target x replicate x method) combination and write
/// replicates.csv, errors.csv, summary.csv, and one JSON per run into
/// config.output_dir.  Tasks are distributed over a worker pool sized by the
/// WAVESEL_WORKERS environment variable (hardware concurrency by default);
/// outputs are byte-deterministic regardless of worker count.  `progress`,
/// when given, receives one line per finished task.
ScenarioRunResult run_scenario(const ScenarioConfig& config, std::ostream* progress = nullptr);

/// replicates.csv rows: scenario,mu_n,method,seed,rmspe,tpr_global,tpr_local,
/// runtime_s (tpr_local empty for global methods).  summary.csv aggregates
/// means per (mu, method) over successful runs.
void write_replicates_csv(std::ostream& os, const std::string& scenario,
                          const std::vector<ReplicateRecord>& records);
void write_errors_csv(std::ostream& os, const std::string& scenario,
                      const std::vector<ReplicateRecord>& records);
void write_summary_csv(std::ostream& os, const std::string& scenario,
                       const std::vector<double>& mu_targets, const std::vector<Method>& methods,
                       const std::vector<ReplicateRecord>& records);

}  // namespace wavesel
