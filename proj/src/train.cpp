#include "specshare/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace specshare {

std::vector<double> joint_features(const std::vector<Observation>& observations) {
  std::vector<double> out;
  for (const auto& o : observations) {
    const auto f = o.features();
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay index out of range");
  const std::size_t oldest = items_.size() < capacity_ ? 0 : next_;
  return items_[(oldest + i) % items_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
  if (items_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const Transition*> out(count);
  for (auto& p : out) p = &items_[pick(rng)];
  return out;
}

double TrainConfig::epsilon_at(std::size_t step, std::size_t total_steps) const {
  const double horizon = epsilon_decay_fraction * static_cast<double>(total_steps);
  if (horizon <= 0.0 || static_cast<double>(step) >= horizon) return epsilon_end;
  return epsilon_start + (epsilon_end - epsilon_start) * static_cast<double>(step) / horizon;
}

void TrainConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (batch_size > replay_capacity) throw ConfigError("batch_size exceeds replay capacity");
  if (target_sync_every == 0) throw ConfigError("target_sync_every must be positive");
  if (episodes < 0 || steps_per_episode < 1) throw ConfigError("episodes >= 0 and steps_per_episode >= 1 required");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0))
    throw ConfigError("epsilon values must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(huber_delta > 0.0)) throw ConfigError("huber_delta must be positive");
  policy.validate();
}

CompositeOptimizer CompositeOptimizer::for_network(const CompositeNet& net, const nn::RmsPropConfig& config) {
  CompositeOptimizer opt;
  for (const auto& e : net.encoders) opt.encoders.push_back(nn::RmsPropState::for_network(e, config));
  opt.qnet = nn::RmsPropState::for_network(net.qnet, config);
  return opt;
}

namespace {

// Per-link feature blocks for a batch: obs[k] is (2N+1) x batch.
std::vector<nn::Matrix> link_batches(const std::vector<const Transition*>& batch, int num_pairs, int width,
                                     bool next) {
  std::vector<nn::Matrix> obs(num_pairs, nn::Matrix(width, static_cast<Eigen::Index>(batch.size())));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& v = next ? batch[j]->next_state : batch[j]->state;
    if (static_cast<int>(v.size()) != num_pairs * width) throw std::invalid_argument("transition width mismatch");
    for (int k = 0; k < num_pairs; ++k) {
      for (int i = 0; i < width; ++i) obs[k](i, static_cast<Eigen::Index>(j)) = v[k * width + i];
    }
  }
  return obs;
}

}  // namespace

std::vector<double> bellman_targets(const std::vector<const Transition*>& batch, const CompositeNet& net,
                                    double gamma) {
  const auto& s = net.shape;
  const auto cache = composite_forward(net.target_encoders, net.target_qnet,
                                       link_batches(batch, s.num_pairs, s.observation_width(), true));
  const nn::Vector best = cache.q().colwise().maxCoeff().transpose();
  std::vector<double> y(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) y[j] = batch[j]->reward + gamma * best(static_cast<Eigen::Index>(j));
  return y;
}

LossAndGradients loss_and_gradients(const CompositeNet& net, const std::vector<const Transition*>& batch,
                                    const std::vector<double>& targets, double huber_delta) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  if (targets.size() != batch.size()) throw std::invalid_argument("one target per transition required");
  const auto& s = net.shape;
  const auto cache = composite_forward(net.encoders, net.qnet,
                                       link_batches(batch, s.num_pairs, s.observation_width(), false));
  const nn::Matrix& q = cache.q();
  nn::Matrix dq = nn::Matrix::Zero(q.rows(), q.cols());
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const auto row = static_cast<Eigen::Index>(batch[j]->action);
    if (row >= q.rows()) throw std::invalid_argument("transition action out of range");
    const auto h = nn::huber(q(row, col), targets[j], huber_delta);
    loss += h.loss * scale;
    dq(row, col) = h.gradient * scale;
  }
  return {loss, composite_backward(net, cache, dq)};
}

double train_step(CompositeNet& net, CompositeOptimizer& optimizer, const std::vector<const Transition*>& batch,
                  double gamma, double huber_delta) {
  const auto targets = bellman_targets(batch, net, gamma);
  auto lg = loss_and_gradients(net, batch, targets, huber_delta);
  nn::rmsprop_step(net.qnet, lg.gradients.qnet, optimizer.qnet);
  for (std::size_t k = 0; k < net.encoders.size(); ++k) {
    nn::rmsprop_step(net.encoders[k], lg.gradients.encoders[k], optimizer.encoders[k]);
  }
  return lg.loss;
}

std::size_t epsilon_greedy(const CompositeNet& net, const std::vector<Observation>& observations, double epsilon,
                           Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, net.shape.num_actions() - 1);
    return pick(rng);
  }
  return greedy_action(net, observations);
}

std::vector<double> TrainResult::returns() const {
  std::vector<double> r;
  for (const auto& e : episodes) r.push_back(e.episode_return);
  return r;
}

TrainResult run_training(const EnvConfig& env_config, const TrainConfig& config, const EpisodeCallback& on_episode) {
  env_config.validate();
  config.validate();
  PolicyShape shape = config.policy;
  shape.num_pairs = env_config.num_pairs;
  shape.num_channels = env_config.num_channels;

  // Independent streams for initialization, exploration/replay sampling and the world.
  std::seed_seq seq{config.seed, std::uint64_t{0x5eed}};
  std::vector<std::uint64_t> seeds(3);
  seq.generate(seeds.begin(), seeds.end());
  Rng init_rng(seeds[0]);
  Rng agent_rng(seeds[1]);

  TrainResult result{make_composite(shape, init_rng), {}};
  CompositeNet& net = result.net;
  CompositeOptimizer optimizer = CompositeOptimizer::for_network(
      net, nn::RmsPropConfig{config.learning_rate, config.rmsprop_decay, config.rmsprop_epsilon});
  ReplayBuffer buffer(config.replay_capacity);
  Environment env(env_config, seeds[2]);

  const std::size_t total_steps =
      static_cast<std::size_t>(config.episodes) * static_cast<std::size_t>(config.steps_per_episode);
  std::size_t global_step = 0;
  for (int episode = 0; episode < config.episodes; ++episode) {
    if (episode > 0) env.reset();
    EpisodeLog log;
    log.episode = episode;
    double loss_sum = 0.0;
    int loss_count = 0;
    std::vector<double> state = joint_features(env.observations());
    for (int t = 0; t < config.steps_per_episode; ++t) {
      const double epsilon = config.epsilon_at(global_step, total_steps);
      const std::size_t action = epsilon_greedy(net, env.observations(), epsilon, agent_rng);
      const StepOutcome out =
          env.step(action_decode(action, env_config.num_pairs, env_config.num_channels));
      std::vector<double> next_state = joint_features(out.observations);
      log.episode_return += out.reward;
      log.epsilon = epsilon;
      if (config.learn) {
        buffer.push(Transition{state, action, out.reward * config.reward_scale, next_state});
        if (buffer.size() >= config.warmup_size()) {
          const auto batch = buffer.sample(config.batch_size, agent_rng);
          loss_sum += train_step(net, optimizer, batch, config.gamma, config.huber_delta);
          ++loss_count;
        }
      }
      state = std::move(next_state);
      ++global_step;
      if (global_step % config.target_sync_every == 0) sync_target(net);
    }
    log.loss_mean = loss_count > 0 ? loss_sum / loss_count : 0.0;
    result.episodes.push_back(log);
    if (on_episode) on_episode(log, net);
  }
  return result;
}

void write_training_log(const std::vector<EpisodeLog>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "episode,return,epsilon,loss_mean\n" << std::setprecision(17);
  for (const auto& e : log) out << e.episode << ',' << e.episode_return << ',' << e.epsilon << ',' << e.loss_mean << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace specshare
