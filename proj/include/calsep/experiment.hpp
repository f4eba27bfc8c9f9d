#pragma once

// Benchmark sweeps: instances x restarts, best-of-restart by KL, CSV rows.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "calsep/clinsepal.hpp"
#include "calsep/linsepal_admm.hpp"
#include "calsep/linsepal_pg.hpp"

namespace calsep {

inline constexpr const char* kVersion = "0.1.0";

enum class Method { linsepal_admm, linsepal_pg, clinsepal, clinsepal_full };

Method parse_method(const std::string& name);
std::string to_string(Method m);

struct ExperimentConfig {
  Method method = Method::clinsepal;
  Eigen::Index l = 4;
  Eigen::Index h = 2;
  int n_instances = 1;
  int n_restarts = 1;
  // "full" or "partial"
  std::string prior_mode = "full";
  double prior_fraction = 0.0;
  std::uint64_t seed = 0;
  std::string output;
  // 0 keeps population covariances.
  long n_samples = 0;
  double threshold = 1e-4;

  // External instance; when sigma_l_path is set the generator is bypassed
  // and n_instances must be 1.
  std::string sigma_l_path;
  std::string sigma_h_path;
  std::string b_path;
  std::string v_star_path;

  AdmmConfig admm;
  PgConfig pg;
  CLinConfig clin = CLinConfig::partial_defaults();
  CLinConfig clin_full = CLinConfig::full_defaults();

  void validate() const;
};

// Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct RunRow {
  int sim_id = 0;
  int restart_id = 0;
  std::string method;
  Eigen::Index l = 0;
  Eigen::Index h = 0;
  std::string prior_mode;
  bool constructive = false;
  double kl = 0.0;  // NaN when undefined
  double frob_abs_dist = 0.0;
  double f1 = 0.0;
  int iters = 0;
  bool converged = false;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
  bool best = false;
  std::string error;
};

struct ExperimentSummary {
  int instances = 0;
  double constructive_fraction = 0.0;
  double f1_one_fraction = 0.0;
  double median_best_kl = 0.0;
  double max_best_kl = 0.0;
};

struct ExperimentResult {
  std::vector<RunRow> rows;
  ExperimentSummary summary;
  double wall_ms = 0.0;
};

std::string prior_mode_label(const ExperimentConfig& cfg);

// Covariance pair of instance sim_id, generated or loaded.
CovariancePair instance_covariances(const ExperimentConfig& cfg, int sim_id);

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 1);

ExperimentSummary summarize(const std::vector<RunRow>& rows);

std::string csv_header();
std::string format_row(const RunRow& row);
void write_rows_csv(const std::filesystem::path& path, const std::vector<RunRow>& rows);
void write_meta_json(const std::filesystem::path& path, const ExperimentConfig& cfg,
                     const ExperimentResult& result);

}  // namespace calsep
