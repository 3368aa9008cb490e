#pragma once

// Config parsing, gamma sweeps with repetitions, result files and the CLI.

#include <string>
#include <vector>

#include <json.hpp>

#include "qroute/experiment.hpp"

namespace qroute {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr const char* kResultsHeader = "gamma,rep,F,P_est,P_theory,p1_theory,shots_kept";
inline constexpr const char* kSummaryHeader =
    "gamma,mean_F,two_sigma_F,mean_P_est,two_sigma_P,P_theory,p1_theory,shots_kept_total";

struct SweepRow {
  double gamma = 0.0;
  double mean_F = 0.0, two_sigma_F = 0.0;
  double mean_P_est = 0.0, two_sigma_P = 0.0;
  double P_theory = 0.0, p1_theory = 0.0;
  std::uint64_t shots_kept_total = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<ExperimentResult> results;  // grid-major, then repetition
};

/// Defaults applied, unknown keys rejected, ConfigError names the field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Mean and two sample standard deviations per grid point.
std::vector<SweepRow> summarize(const ExperimentConfig& config, const std::vector<ExperimentResult>& results);

std::string results_csv(const std::vector<ExperimentResult>& results);
std::string summary_csv(const std::vector<SweepRow>& rows);

/// Runs every (gamma, repetition) and writes results.csv, summary.csv,
/// ideal.json, density/*.json, manifest.json and timing.txt under
/// config.output_dir. IoError before any simulation if the directory is not
/// writable.
SweepReport run_sweep(const ExperimentConfig& config);

/// Writes through a temporary file and rename.
void write_atomic(const std::string& path, const std::string& content);

/// Command-line entry point; returns the process exit status.
int cli(int argc, char** argv);

}  // namespace qroute
