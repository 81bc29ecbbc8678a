#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "specshare/env.hpp"
#include "specshare/nn.hpp"
#include "specshare/policy.hpp"

namespace specshare {

// Joint observation stored as concatenated per-link feature vectors (K blocks of 2N+1).
struct Transition {
  std::vector<double> state;
  std::size_t action = 0;
  double reward = 0.0;  // already multiplied by TrainConfig::reward_scale
  std::vector<double> next_state;
};

std::vector<double> joint_features(const std::vector<Observation>& observations);

// FIFO ring buffer; uniform sampling with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::vector<const Transition*> sample(std::size_t count, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  // i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

struct TrainConfig {
  double gamma = 0.05;
  double learning_rate = 1e-3;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-7;
  double huber_delta = 1.0;
  std::size_t batch_size = 512;
  std::size_t target_sync_every = 500;  // N_u, environment steps
  int steps_per_episode = 1000;         // T
  int episodes = 2000;                  // L
  double epsilon_start = 1.0;
  double epsilon_end = 0.02;
  double epsilon_decay_fraction = 0.8;  // of all training steps
  std::size_t replay_capacity = 1'000'000;
  std::size_t warmup = 0;               // 0 means batch_size
  double reward_scale = 1e-7;           // bits/s -> training units
  bool learn = true;
  std::uint64_t seed = 1;
  PolicyShape policy;

  std::size_t warmup_size() const { return warmup == 0 ? batch_size : warmup; }
  double epsilon_at(std::size_t step, std::size_t total_steps) const;
  void validate() const;
};

struct CompositeOptimizer {
  std::vector<nn::RmsPropState> encoders;
  nn::RmsPropState qnet;

  static CompositeOptimizer for_network(const CompositeNet& net, const nn::RmsPropConfig& config);
};

// y_j = R_j + gamma * max_a' Q_target(o'_j, a') through the target encoders and qnet.
std::vector<double> bellman_targets(const std::vector<const Transition*>& batch, const CompositeNet& net,
                                    double gamma);

// Mean Huber loss of (Q(o_j, a_j), y_j) before the update; applies one RMSProp step to all
// online networks. Target networks are left untouched.
double train_step(CompositeNet& net, CompositeOptimizer& optimizer,
                  const std::vector<const Transition*>& batch, double gamma, double huber_delta = 1.0);

// Loss and gradients without updating, for checks.
struct LossAndGradients {
  double loss;
  CompositeGradients gradients;
};
LossAndGradients loss_and_gradients(const CompositeNet& net, const std::vector<const Transition*>& batch,
                                    const std::vector<double>& targets, double huber_delta = 1.0);

std::size_t epsilon_greedy(const CompositeNet& net, const std::vector<Observation>& observations,
                           double epsilon, Rng& rng);

struct EpisodeLog {
  int episode = 0;
  double episode_return = 0.0;  // sum of rewards, bits/s
  double epsilon = 0.0;         // at the episode's last step
  double loss_mean = 0.0;       // over gradient steps taken in the episode (0 if none)
};

struct TrainResult {
  CompositeNet net;
  std::vector<EpisodeLog> episodes;

  std::vector<double> returns() const;
};

using EpisodeCallback = std::function<void(const EpisodeLog&, const CompositeNet&)>;

TrainResult run_training(const EnvConfig& env_config, const TrainConfig& config,
                         const EpisodeCallback& on_episode = {});

void write_training_log(const std::vector<EpisodeLog>& log, const std::string& path);

}  // namespace specshare
