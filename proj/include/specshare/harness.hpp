#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "specshare/env.hpp"
#include "specshare/policy.hpp"
#include "specshare/train.hpp"

namespace specshare {

// CSV a sweep point contributes a row (or rows) to.
enum class Figure {
  return_comparison,
  link_rates,
  feedback_count,
  feedback_bits,
  seed_study,
  feedback_interval,
  input_noise,
  feedback_noise,
};

std::string to_string(Figure figure);
Figure figure_from_string(const std::string& name);

// One evaluation point. Noise ratios are power ratios in dB relative to each component;
// nullopt disables the noise.
struct ExperimentSpec {
  Figure figure = Figure::return_comparison;
  FeedbackMode mode = FeedbackMode::real;
  int feedback_count = 3;   // N_k
  int bits_per_value = 0;   // N_b
  std::size_t batch_size = 512;
  int feedback_interval = 1;  // F
  std::optional<double> input_noise_db;
  std::optional<double> feedback_noise_db;
  std::uint64_t train_seed = 1;
  std::vector<std::uint64_t> test_seeds{1001};
  int train_episodes = 2000;
  int train_steps = 1000;
  int test_episodes = 2000;  // per test seed
  int test_steps = 1000;
  int trace_episode = 0;     // episode of the first test seed recorded in link_rates

  int feedback_bits() const;  // per link; 0 without feedback
  void validate() const;
};

struct SeedSummary {
  std::uint64_t seed = 0;
  double average_return = 0.0;  // policy, per episode
  double arp = 0.0;             // policy vs optimal under this seed
};

struct LinkRateSample {
  int step = 0;
  int link = 0;
  double rate = 0.0;
};

struct EvalReport {
  std::vector<double> policy_returns;
  std::vector<double> optimal_returns;  // empty when the optimum was not computed
  std::vector<double> random_returns;
  std::vector<std::uint64_t> episode_seeds;  // test seed of each episode
  std::vector<SeedSummary> seeds;
  std::vector<LinkRateSample> link_rate_trace;
  double policy_arp = 0.0;
  double random_arp = 0.0;
  // Interval evaluation: F = 1 returns of the same policy and the ratio of means.
  std::vector<double> reference_returns;
  double normalized_return = 1.0;

  std::vector<double> normalized(const std::vector<double>& returns) const;
};

// mean(policy) / mean(optimal) * 100. Throws std::invalid_argument on empty or unequal
// inputs and std::domain_error on a zero optimal mean.
double arp(const std::vector<double>& policy_returns, const std::vector<double>& optimal_returns);

// v <- v + n, n ~ N(0, v^2 10^{ratio/10}), per pre-normalization component.
Observation add_input_noise(const Observation& observation, std::optional<double> ratio_db, Rng& rng);
FeedbackVector add_feedback_noise(const FeedbackVector& feedback, std::optional<double> ratio_db, Rng& rng);

// Greedy (epsilon = 0) test episodes. Each step scores the policy, the brute-force optimum and
// a uniform random allocation on the same realization; the policy's action drives the world.
// `policy` may be null only for FeedbackMode::none, in which case the BS acts randomly.
EvalReport evaluate(const CompositeNet* policy, const EnvConfig& env_config, const ExperimentSpec& spec,
                    bool compute_optimal = true);

// Feedback recomputed every F steps; between refreshes the BS reuses the stale feedback.
// Normalizes against the same policy evaluated with F = 1 on the same seeds.
EvalReport run_interval_eval(const CompositeNet& policy, const EnvConfig& env_config, const ExperimentSpec& spec);

struct SweepPlan {
  EnvConfig env;
  TrainConfig train;  // defaults; each experiment overrides mode, widths, batch, seed and budget
  std::vector<ExperimentSpec> experiments;
};

struct SweepResult {
  std::vector<std::string> files;  // CSVs and plot scripts written
};

using SweepProgress = std::function<void(const std::string&)>;

// Trains (memoized per distinct training setup) and evaluates every spec, then writes one CSV
// per figure present plus a matplotlib script beside it. I/O failures throw with the path.
SweepResult sweep(const SweepPlan& plan, const std::string& out_dir, const SweepProgress& progress = {});

TrainConfig train_config_for(const TrainConfig& defaults, const ExperimentSpec& spec);

std::string csv_header(Figure figure);

void write_return_comparison_csv(const EvalReport& report, const std::string& path);

}  // namespace specshare
