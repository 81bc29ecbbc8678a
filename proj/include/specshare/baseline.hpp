#pragma once

#include <cstddef>
#include <vector>

#include "specshare/env.hpp"

namespace specshare {

inline constexpr std::size_t kBruteForceActionLimit = 1'000'000;

struct OracleResult {
  std::size_t best_action = 0;
  double best_reward = 0.0;
  std::vector<double> reward_table;  // filled only on request
};

// Exhaustive search over all N^K joint allocations under a fixed realization. Ties go to
// the lowest index. Refuses (std::length_error) above kBruteForceActionLimit actions.
OracleResult brute_force(const ChannelRealization& realization, const EnvConfig& config,
                         bool keep_table = false);

// Uniform over the N^K joint actions.
std::size_t random_policy(Rng& rng, int num_pairs, int num_channels);

}  // namespace specshare
