#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "specshare/channel.hpp"
#include "specshare/env.hpp"

namespace fixtures {

using specshare::Allocation;
using specshare::ChannelRealization;
using specshare::EnvConfig;
using specshare::LinkGain;
using specshare::Rng;

inline LinkGain gain(double linear) {
  LinkGain g;
  g.composite_linear = linear;
  return g;
}

// Realization with log-uniform gains in [1e-14, 1e-6].
inline ChannelRealization random_realization(int K, int N, Rng& rng) {
  std::uniform_real_distribution<double> exponent(-14.0, -6.0);
  auto draw = [&] { return gain(std::pow(10.0, exponent(rng))); };
  ChannelRealization r;
  r.num_pairs = K;
  r.num_channels = N;
  for (int i = 0; i < K * N; ++i) r.direct_links.push_back(draw());
  for (int i = 0; i < K * K * N; ++i) r.cross_links.push_back(draw());
  for (int i = 0; i < N; ++i) r.cue_bs_links.push_back(draw());
  for (int i = 0; i < N * K; ++i) r.cue_rx_links.push_back(draw());
  return r;
}

inline Allocation random_allocation(int K, int N, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, N - 1);
  std::vector<int> c(K);
  for (int& x : c) x = pick(rng);
  return Allocation(c, N);
}

// Scalar SINR/Shannon evaluation in milliwatts with natural logs. Gains are read straight
// from the flat vectors so the realization accessors are not exercised.
inline double oracle_rate(int k, int n, const std::vector<int>& channel_of, const ChannelRealization& r,
                          const EnvConfig& c) {
  if (channel_of[k] != n) return 0.0;
  const int K = r.num_pairs, N = r.num_channels;
  const double p_k = std::pow(10.0, c.v2v_power_dbm / 10.0);
  const double p_n = std::pow(10.0, c.v2i_power_dbm / 10.0);
  const double noise = std::pow(10.0, c.noise_dbm / 10.0);
  double interference = p_n * r.cue_rx_links[n * K + k].composite_linear;
  for (int l = 0; l < K; ++l) {
    if (l != k && channel_of[l] == n) interference += p_k * r.cross_links[(l * K + k) * N + n].composite_linear;
  }
  const double sinr = p_k * r.direct_links[k * N + n].composite_linear / (interference + noise);
  return c.bandwidth_hz * std::log(1.0 + sinr) / std::log(2.0);
}

inline double oracle_sum_rate(const std::vector<int>& channel_of, const ChannelRealization& r, const EnvConfig& c) {
  double total = 0.0;
  for (int k = 0; k < r.num_pairs; ++k)
    for (int n = 0; n < r.num_channels; ++n) total += oracle_rate(k, n, channel_of, r, c);
  return total;
}

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace fixtures
