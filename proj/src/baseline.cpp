#include "specshare/baseline.hpp"

#include <stdexcept>
#include <string>

#include "specshare/action_codec.hpp"

namespace specshare {

OracleResult brute_force(const ChannelRealization& realization, const EnvConfig& config,
                         bool keep_table) {
  const std::size_t actions = num_joint_actions(config.num_pairs, config.num_channels);
  if (config.num_channels > 1 && actions > kBruteForceActionLimit) {
    throw std::length_error("brute_force: " + std::to_string(actions) +
                            " joint actions exceed the enumeration limit");
  }
  OracleResult result;
  if (keep_table) result.reward_table.reserve(actions);
  for (std::size_t a = 0; a < actions; ++a) {
    const double r = sum_rate(action_decode(a, config.num_pairs, config.num_channels), realization, config);
    if (keep_table) result.reward_table.push_back(r);
    if (a == 0 || r > result.best_reward) {
      result.best_reward = r;
      result.best_action = a;
    }
  }
  return result;
}

std::size_t random_policy(Rng& rng, int num_pairs, int num_channels) {
  std::uniform_int_distribution<std::size_t> pick(0, num_joint_actions(num_pairs, num_channels) - 1);
  return pick(rng);
}

}  // namespace specshare
