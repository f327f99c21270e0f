#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "kmlab/lloyd.hpp"
#include "kmlab/models.hpp"

namespace kmlab {

enum class FRule { sqrt_pmin_n, fixed };

struct ExperimentConfig {
  Model model;
  int k = 2;
  std::vector<long long> n_grid = {128, 256, 512, 1024, 2048, 4096, 8192};
  int replicates = 200;
  int restarts = 20;
  std::uint64_t base_seed = 1;
  long long n_mc = 100000;  // Monte-Carlo size where no exact integrator exists
  FRule f_rule = FRule::sqrt_pmin_n;
  double fixed_f = 0.0;
  int threads = 1;

  void validate() const;  // n_grid strictly increasing, replicates >= 1
};

// Key-value experiment configuration; the `model` key names a model spec
// file resolved relative to the config file.
ExperimentConfig load_experiment_config(const std::string& path);

struct RateRow {
  long long n = 0;
  int replicates = 0;
  std::uint64_t base_seed = 0;
  double mean_excess_distortion = 0.0;
  double std_error = 0.0;
  double mean_classif_risk = 0.0;
  double std_error_classif = 0.0;
  double clusterable_fraction = 0.0;
  bool has_excess = false;
  bool has_classif = false;
  bool has_clusterable = false;
  bool warning = false;  // model outside the study's hypotheses
};

// Seed for replicate `rep` at sample size `n`; documented so any single
// replicate can be re-run in isolation.
std::uint64_t replicate_seed(std::uint64_t base_seed, long long n, int rep);

// Excess distortion of the multi-start ERM against the model's exact
// optimum, aggregated over replicates. Requires ground truth.
std::vector<RateRow> rate_study(const ExperimentConfig& config);

// Population classification risk of the Lloyd output against the Bayes
// (mixture-means) partition.
std::vector<RateRow> classif_study(const ExperimentConfig& config);

// Fraction of replicates whose sample passes the clusterability check with
// f = sqrt(p_min n) (or a fixed f).
std::vector<RateRow> clusterability_study(const ExperimentConfig& config);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_band = 0.0;  // 95% normal-approximation half width
  int rows_used = 0;
  std::vector<long long> excluded_n;  // rows dropped for nonpositive means
};

// Ordinary least squares on (log n, log column). Throws InputError with
// fewer than 3 usable rows. Column is one of mean_excess_distortion,
// mean_classif_risk, clusterable_fraction.
SlopeFit fit_loglog_slope(std::span<const RateRow> rows, const std::string& column);

std::string to_csv(std::span<const RateRow> rows);
std::vector<RateRow> parse_csv(std::istream& in);

// Static log-log line plot; CSV remains the contract, this is convenience.
void write_svg_loglog(std::ostream& out, std::span<const RateRow> rows,
                      const std::string& column, const std::string& title);

}  // namespace kmlab
