#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ptq/hawkes.hpp"
#include "ptq/queries.hpp"

namespace ptq {

// Synthetic-experiment protocol: random Hawkes models, random queries, both
// estimators across a ladder of sample counts, judged against a
// high-sample ground truth.
struct ExperimentConfig {
  // random model population
  int mark_count = 4;
  double interaction_strength = 1.0;
  int model_count = 1;
  RandomHawkesConfig model_config;

  // query generation
  std::string query_type = "hitting_time";  // hitting_time | nth_mark | a_before_b | restricted
  double query_horizon = 1.0;               // offset past origin
  double set_fraction = 1.0 / 3.0;          // |A| relative to K
  long nth_mark_n = 8;
  double precision = 0.01;
  double a_before_b_horizon = 100.0;  // naive truncation for A-before-B

  std::vector<long> ladder = {2, 4, 10, 25, 50, 250, 1000};
  long ground_truth_samples = 5000;
  int repetitions = 1;
  std::uint64_t master_seed = 1;

  QueryConfig query;

  void validate() const;
};

struct BenchRecord {
  std::string query_id;
  std::string estimator;  // "naive" | "importance" | "truth"
  long n_samples = 0;
  double estimate = 0.0;
  double truth = 0.0;
  double variance = 0.0;
  double efficiency = 0.0;  // truth(1-truth) / importance variance
  long long wall_ns = 0;
  std::uint64_t seed = 0;
};

// High-sample reference value: importance sampling for unbiased query
// classes, naive for the (truncation-biased) A-before-B estimator.
EstimateResult ground_truth(const IntensityModel& model,
                            const EventSequence& history, double origin,
                            const QuerySpec& spec, const ExperimentConfig& cfg,
                            std::uint64_t seed);

// pi(1-pi) / Var_imp, per-sample variances.
double relative_efficiency(double truth, double imp_variance);

struct MeanRae {
  std::string estimator;
  long n_samples = 0;
  double mean_rae = 0.0;
  long count = 0;
  long excluded_zero_truth = 0;
};
std::vector<MeanRae> mean_rae(const std::vector<BenchRecord>& records);

// Random query over K marks matching cfg.query_type; deterministic in seed.
QuerySpec random_query(const ExperimentConfig& cfg, std::uint64_t seed);

// Full protocol over the random-model population.
std::vector<BenchRecord> run_experiment(const ExperimentConfig& cfg);
// Same ladder sweep for one externally supplied model.
std::vector<BenchRecord> run_experiment(const IntensityModel& model,
                                        const EventSequence& history,
                                        double origin,
                                        const ExperimentConfig& cfg);

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records);

// ---------------------------------------------------------------------------
// Interaction-strength timing sweep
// ---------------------------------------------------------------------------

struct SweepRecord {
  double strength = 0.0;
  int model_index = 0;
  double naive_ns_mean = 0.0;
  double naive_ns_median = 0.0;
  double restricted_ns_mean = 0.0;
  double restricted_ns_median = 0.0;

  double ratio_mean() const { return naive_ns_mean / restricted_ns_mean; }
};

// Mean/median wall-clock per generated sample, naive vs restricted (random
// hitting-time mask), for models_per_strength fresh models at each strength.
std::vector<SweepRecord> interaction_sweep(int mark_count,
                                           const std::vector<double>& strengths,
                                           int models_per_strength,
                                           int trajectories_per_model,
                                           double horizon, std::uint64_t seed);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& rows);

}  // namespace ptq
