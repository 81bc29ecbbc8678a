#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "specshare/channel.hpp"

namespace specshare {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnvConfig {
  double area_width = 1299.0;   // m
  double area_height = 750.0;   // m
  int grid_blocks_x = 3;        // blocks per axis; roads run along block edges
  int grid_blocks_y = 3;
  double turn_probability = 0.4;  // split evenly between left and right
  int num_pairs = 4;              // K
  int num_channels = 4;           // N, one CUE per channel
  double v2v_power_dbm = 10.0;    // P_k
  double v2i_power_dbm = 23.0;    // P_n
  double noise_dbm = -114.0;      // sigma^2
  double bandwidth_hz = 1e6;      // B
  double carrier_ghz = 2.0;
  double step_seconds = 0.1;
  double pairing_radius = 50.0;   // m, tx-rx separation at drop
  // Radius of the neighbourhood (around a random intersection) in which all vehicles of
  // an episode are dropped. Non-positive drops over the whole grid.
  double drop_radius = 100.0;
  double min_speed_kmh = 10.0;
  double max_speed_kmh = 15.0;
  std::uint64_t seed = 1;

  std::size_t num_actions() const;
  void validate() const;
};

struct Vehicle {
  Position position;
  double heading_x = 1.0;  // unit vector along one of the grid axes
  double heading_y = 0.0;
  double speed_kmh = 10.0;
};

struct Topology {
  std::vector<Vehicle> transmitters;  // K
  std::vector<Vehicle> receivers;     // K, receivers[k] pairs with transmitters[k]
  std::vector<Vehicle> cues;          // N, CUE n owns channel n
  Position bs_position;

  int num_pairs() const { return static_cast<int>(transmitters.size()); }
  int num_channels() const { return static_cast<int>(cues.size()); }
};

// One channel index per D2D pair; equivalent to a K x N one-hot matrix.
class Allocation {
 public:
  Allocation() = default;
  Allocation(std::vector<int> channels, int num_channels);

  // Rows must be one-hot; throws std::invalid_argument otherwise.
  static Allocation from_matrix(const std::vector<std::vector<int>>& rho);

  int rho(int k, int n) const { return channels_.at(k) == n ? 1 : 0; }
  int channel(int k) const { return channels_.at(k); }
  int num_pairs() const { return static_cast<int>(channels_.size()); }
  int num_channels() const { return num_channels_; }
  const std::vector<int>& channels() const { return channels_; }

  bool operator==(const Allocation&) const = default;

 private:
  std::vector<int> channels_;
  int num_channels_ = 0;
};

// Gains of every link in one time step. Layout:
//   direct(k, n)     h_k^n      tx k -> rx k on channel n
//   cross(l, k, n)   h_{l,k}^n  tx l -> rx k on channel n (l != k)
//   cue_to_bs(n)     g_n        CUE n -> BS on channel n
//   cue_to_rx(n, k)  g_k^n      CUE n -> rx k on channel n
struct ChannelRealization {
  int num_pairs = 0;
  int num_channels = 0;
  std::vector<LinkGain> direct_links;
  std::vector<LinkGain> cross_links;
  std::vector<LinkGain> cue_bs_links;
  std::vector<LinkGain> cue_rx_links;

  const LinkGain& direct(int k, int n) const { return direct_links.at(k * num_channels + n); }
  const LinkGain& cross(int l, int k, int n) const {
    return cross_links.at((l * num_pairs + k) * num_channels + n);
  }
  const LinkGain& cue_to_bs(int n) const { return cue_bs_links.at(n); }
  const LinkGain& cue_to_rx(int n, int k) const { return cue_rx_links.at(n * num_pairs + k); }
};

// Per-link large-scale shadowing, frequency flat, evolved with distance moved.
struct ShadowField {
  std::vector<ShadowState> direct;   // K
  std::vector<ShadowState> cross;    // K x K (diagonal unused)
  std::vector<ShadowState> cue_bs;   // N
  std::vector<ShadowState> cue_rx;   // N x K
};

struct Observation {
  std::vector<double> gains_db;         // N, own direct gain per channel
  std::vector<double> interference_db;  // N, I_k^n in dBm
  double power_dbm = 0.0;

  // Affinely scaled network input of length 2N + 1.
  std::vector<double> features() const;
  std::size_t size() const { return gains_db.size() + interference_db.size() + 1; }
};

inline constexpr double kGainOffsetDb = 120.0;
inline constexpr double kGainScaleDb = 60.0;
inline constexpr double kInterferenceOffsetDb = 120.0;
inline constexpr double kInterferenceScaleDb = 60.0;
inline constexpr double kPowerScaleDbm = 23.0;

struct StepOutcome {
  std::vector<double> per_link_rate;  // bits/s
  double reward = 0.0;                // bits/s
  std::vector<Observation> observations;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

Topology drop_vehicles(const EnvConfig& config, Rng& rng);
Topology move_vehicles(const Topology& topology, const EnvConfig& config, double dt, Rng& rng);

ShadowField initial_shadow_field(const Topology& topology, Rng& rng);

// Evolves `shadows` by the displacement between `previous` and `current` topologies and
// draws fresh fast fading. Pass previous == current for the first realization of an episode.
ChannelRealization realize_channels(const Topology& previous, const Topology& current,
                                    ShadowField& shadows, const EnvConfig& config, Rng& rng);

// I_k^n in watts, excluding noise.
double interference(int k, int n, const Allocation& allocation,
                    const ChannelRealization& realization, const EnvConfig& config);

// r_k^n in bits/s.
double rate(int k, int n, const Allocation& allocation, const ChannelRealization& realization,
            const EnvConfig& config);

std::vector<double> link_rates(const Allocation& allocation, const ChannelRealization& realization,
                               const EnvConfig& config);

double sum_rate(const Allocation& allocation, const ChannelRealization& realization,
                const EnvConfig& config);

Observation build_observation(int k, const ChannelRealization& realization,
                              const Allocation& last_allocation, const EnvConfig& config);

void check_allocation(const Allocation& allocation, const EnvConfig& config);

// Single-threaded V2X world. Owns its RNG, topology, shadowing and current channels.
class Environment {
 public:
  explicit Environment(EnvConfig config);
  Environment(EnvConfig config, std::uint64_t seed);

  // New episode: fresh vehicle drop, shadowing and channels, random initial allocation.
  void reset();

  StepOutcome step(const Allocation& allocation);

  const EnvConfig& config() const { return config_; }
  const Topology& topology() const { return topology_; }
  const ChannelRealization& realization() const { return realization_; }
  const Allocation& last_allocation() const { return last_allocation_; }
  const std::vector<Observation>& observations() const { return observations_; }

  double reward(const Allocation& allocation) const;

 private:
  void rebuild_observations();

  EnvConfig config_;
  Rng rng_;
  Topology topology_;
  ShadowField shadows_;
  ChannelRealization realization_;
  Allocation last_allocation_;
  std::vector<Observation> observations_;
};

}  // namespace specshare
