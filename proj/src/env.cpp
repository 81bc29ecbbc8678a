#include "specshare/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace specshare {

namespace {

constexpr double kSnapTolerance = 1e-9;

std::vector<double> road_coordinates(double extent, int blocks) {
  std::vector<double> coords(blocks + 1);
  for (int i = 0; i <= blocks; ++i) coords[i] = extent * i / blocks;
  coords.back() = extent;
  return coords;
}

struct Grid {
  std::vector<double> xs;  // vertical roads
  std::vector<double> ys;  // horizontal roads
  double width;
  double height;

  explicit Grid(const EnvConfig& c)
      : xs(road_coordinates(c.area_width, c.grid_blocks_x)),
        ys(road_coordinates(c.area_height, c.grid_blocks_y)),
        width(c.area_width),
        height(c.area_height) {}

  bool feasible(const Position& node, double hx, double hy) const {
    if (hx > 0.5) return node.x < width - kSnapTolerance;
    if (hx < -0.5) return node.x > kSnapTolerance;
    if (hy > 0.5) return node.y < height - kSnapTolerance;
    return node.y > kSnapTolerance;
  }

  // Distance along the heading to the next intersection strictly ahead, or +inf.
  double distance_to_next(const Vehicle& v) const {
    const bool along_x = std::abs(v.heading_x) > 0.5;
    const auto& coords = along_x ? xs : ys;
    const double pos = along_x ? v.position.x : v.position.y;
    const double dir = along_x ? v.heading_x : v.heading_y;
    double best = std::numeric_limits<double>::infinity();
    for (double c : coords) {
      const double d = (c - pos) * dir;
      if (d > kSnapTolerance) best = std::min(best, d);
    }
    return best;
  }

  Position snap(const Position& p) const {
    auto nearest = [](const std::vector<double>& cs, double v) {
      return *std::min_element(cs.begin(), cs.end(), [v](double a, double b) {
        return std::abs(a - v) < std::abs(b - v);
      });
    };
    return Position{nearest(xs, p.x), nearest(ys, p.y)};
  }

  bool on_node(const Position& p) const {
    const Position s = snap(p);
    return std::abs(s.x - p.x) < 1e-6 && std::abs(s.y - p.y) < 1e-6;
  }
};

void turn_at_node(Vehicle& v, const Grid& grid, double turn_probability, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  const double sx = v.heading_x, sy = v.heading_y;
  const double lx = -sy, ly = sx;
  const double rx = sy, ry = -sx;
  struct Dir {
    double x, y;
  };
  std::vector<Dir> order;
  if (u < 0.5 * turn_probability) {
    order = {{lx, ly}, {rx, ry}, {sx, sy}};
  } else if (u < turn_probability) {
    order = {{rx, ry}, {lx, ly}, {sx, sy}};
  } else {
    // Straight; if blocked, the same draw picks the fallback turn side.
    order = u < 0.5 * (1.0 + turn_probability) ? std::vector<Dir>{{sx, sy}, {lx, ly}, {rx, ry}}
                                                : std::vector<Dir>{{sx, sy}, {rx, ry}, {lx, ly}};
  }
  order.push_back({-sx, -sy});
  for (const Dir& d : order) {
    if (grid.feasible(v.position, d.x, d.y)) {
      v.heading_x = d.x;
      v.heading_y = d.y;
      return;
    }
  }
}

void advance(Vehicle& v, const Grid& grid, double travel, double turn_probability, Rng& rng) {
  // A vehicle parked on a node facing out of the area turns before moving.
  if (grid.on_node(v.position) && !grid.feasible(v.position, v.heading_x, v.heading_y)) {
    v.position = grid.snap(v.position);
    turn_at_node(v, grid, turn_probability, rng);
  }
  while (travel > 0.0) {
    const double to_node = grid.distance_to_next(v);
    if (travel < to_node) {
      v.position.x += v.heading_x * travel;
      v.position.y += v.heading_y * travel;
      break;
    }
    v.position.x += v.heading_x * to_node;
    v.position.y += v.heading_y * to_node;
    v.position = grid.snap(v.position);
    travel -= to_node;
    turn_at_node(v, grid, turn_probability, rng);
  }
}

double kmh_to_ms(double kmh) { return kmh / 3.6; }

// Uniform position on the road network, or on the arms of one intersection when
// `hotspot` is set. The heading lies along the chosen road.
Vehicle place_vehicle(const Grid& grid, const EnvConfig& config, const Position* hotspot,
                      Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vehicle v;
  bool along_x = false;
  if (hotspot == nullptr) {
    const double vertical_len = grid.xs.size() * grid.height;
    const double horizontal_len = grid.ys.size() * grid.width;
    double s = unit(rng) * (vertical_len + horizontal_len);
    if (s < vertical_len) {
      const auto road = std::min<std::size_t>(static_cast<std::size_t>(s / grid.height),
                                              grid.xs.size() - 1);
      v.position = {grid.xs[road], std::clamp(s - road * grid.height, 0.0, grid.height)};
    } else {
      s -= vertical_len;
      const auto road = std::min<std::size_t>(static_cast<std::size_t>(s / grid.width),
                                              grid.ys.size() - 1);
      v.position = {std::clamp(s - road * grid.width, 0.0, grid.width), grid.ys[road]};
      along_x = true;
    }
  } else {
    struct Arm {
      double x, y;
    };
    std::vector<Arm> arms;
    for (Arm a : {Arm{1, 0}, Arm{-1, 0}, Arm{0, 1}, Arm{0, -1}}) {
      if (grid.feasible(*hotspot, a.x, a.y)) arms.push_back(a);
    }
    const Arm arm = arms[std::min<std::size_t>(static_cast<std::size_t>(unit(rng) * arms.size()),
                                               arms.size() - 1)];
    const double offset = unit(rng) * config.drop_radius;
    v.position = {std::clamp(hotspot->x + arm.x * offset, 0.0, grid.width),
                  std::clamp(hotspot->y + arm.y * offset, 0.0, grid.height)};
    along_x = std::abs(arm.x) > 0.5;
  }
  const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
  v.heading_x = along_x ? sign : 0.0;
  v.heading_y = along_x ? 0.0 : sign;
  v.speed_kmh = config.min_speed_kmh + unit(rng) * (config.max_speed_kmh - config.min_speed_kmh);
  return v;
}

Vehicle place_receiver(const Vehicle& tx, const Grid& grid, double radius, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vehicle rx = tx;
  const double magnitude = radius * (1.0 - unit(rng));  // (0, radius]
  const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
  const bool along_x = std::abs(tx.heading_x) > 0.5;
  double& coord = along_x ? rx.position.x : rx.position.y;
  const double base = along_x ? tx.position.x : tx.position.y;
  const double extent = along_x ? grid.width : grid.height;
  coord = base + sign * magnitude;
  if (coord < 0.0 || coord > extent) coord = base - sign * magnitude;
  coord = std::clamp(coord, 0.0, extent);
  return rx;
}

double displacement(const Vehicle& a, const Vehicle& b) { return distance(a.position, b.position); }

double v2i_pathloss_db(const Position& vehicle, const Position& bs) {
  const double ground = distance(vehicle, bs);
  const double dh = channel::kBsAntennaHeight - channel::kVehicleAntennaHeight;
  const double d_km = std::sqrt(ground * ground + dh * dh) / 1000.0;
  return channel::pathloss_v2i(d_km) - channel::kVehicleAntennaGainDbi -
         channel::kBsAntennaGainDbi + channel::kBsNoiseFigureDb;
}

double v2v_pathloss_db(const Position& tx, const Position& rx, double carrier_ghz) {
  return channel::pathloss_v2v(tx, rx, carrier_ghz) - 2.0 * channel::kVehicleAntennaGainDbi +
         channel::kVehicleNoiseFigureDb;
}

ShadowState v2v_shadow(Rng& rng) {
  return channel::initial_shadowing(channel::kV2vShadowStdDb, channel::kV2vDecorrelationM, rng);
}

ShadowState v2i_shadow(Rng& rng) {
  return channel::initial_shadowing(channel::kV2iShadowStdDb, channel::kV2iDecorrelationM, rng);
}

}  // namespace

std::size_t EnvConfig::num_actions() const {
  std::size_t count = 1;
  for (int k = 0; k < num_pairs; ++k) count *= static_cast<std::size_t>(num_channels);
  return count;
}

void EnvConfig::validate() const {
  if (num_pairs < 1 || num_channels < 1) throw ConfigError("num_pairs and num_channels must be >= 1");
  if (!(area_width > 0.0) || !(area_height > 0.0)) throw ConfigError("area must be positive");
  if (grid_blocks_x < 1 || grid_blocks_y < 1) throw ConfigError("grid needs at least one block per axis");
  if (!(turn_probability >= 0.0 && turn_probability <= 1.0))
    throw ConfigError("turn_probability must lie in [0, 1]");
  if (!(pairing_radius > 0.0) || pairing_radius > 0.5 * std::min(area_width, area_height))
    throw ConfigError("pairing_radius " + std::to_string(pairing_radius) +
                      " is infeasible for the simulation area");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be positive");
  if (!(step_seconds > 0.0)) throw ConfigError("step_seconds must be positive");
  if (!(carrier_ghz > 0.0)) throw ConfigError("carrier_ghz must be positive");
  if (!(min_speed_kmh > 0.0) || max_speed_kmh < min_speed_kmh)
    throw ConfigError("speed range is invalid");
}

Allocation::Allocation(std::vector<int> channels, int num_channels)
    : channels_(std::move(channels)), num_channels_(num_channels) {
  if (num_channels_ < 1) throw std::invalid_argument("allocation needs at least one channel");
  for (int c : channels_) {
    if (c < 0 || c >= num_channels_) {
      throw std::invalid_argument("allocation channel " + std::to_string(c) + " out of range");
    }
  }
}

Allocation Allocation::from_matrix(const std::vector<std::vector<int>>& rho) {
  if (rho.empty()) throw std::invalid_argument("allocation matrix is empty");
  const int n = static_cast<int>(rho.front().size());
  std::vector<int> channels;
  for (const auto& row : rho) {
    if (static_cast<int>(row.size()) != n) throw std::invalid_argument("ragged allocation matrix");
    int ones = 0, chosen = -1;
    for (int c = 0; c < n; ++c) {
      if (row[c] == 1) {
        ++ones;
        chosen = c;
      } else if (row[c] != 0) {
        throw std::invalid_argument("allocation entries must be 0 or 1");
      }
    }
    if (ones != 1) throw std::invalid_argument("each allocation row must select exactly one channel");
    channels.push_back(chosen);
  }
  return Allocation(std::move(channels), n);
}

std::vector<double> Observation::features() const {
  std::vector<double> f;
  f.reserve(size());
  for (double g : gains_db) f.push_back((g + kGainOffsetDb) / kGainScaleDb);
  for (double i : interference_db) f.push_back((i + kInterferenceOffsetDb) / kInterferenceScaleDb);
  f.push_back(power_dbm / kPowerScaleDbm);
  return f;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

Topology drop_vehicles(const EnvConfig& config, Rng& rng) {
  config.validate();
  const Grid grid(config);
  Topology t;
  t.bs_position = {0.5 * config.area_width, 0.5 * config.area_height};

  Position hotspot;
  const Position* focus = nullptr;
  if (config.drop_radius > 0.0) {
    std::uniform_int_distribution<std::size_t> pick_x(0, grid.xs.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_y(0, grid.ys.size() - 1);
    const std::size_t ix = pick_x(rng);
    hotspot = {grid.xs[ix], grid.ys[pick_y(rng)]};
    focus = &hotspot;
  }
  for (int k = 0; k < config.num_pairs; ++k) {
    Vehicle tx = place_vehicle(grid, config, focus, rng);
    Vehicle rx = place_receiver(tx, grid, config.pairing_radius, rng);
    t.transmitters.push_back(tx);
    t.receivers.push_back(rx);
  }
  for (int n = 0; n < config.num_channels; ++n) {
    t.cues.push_back(place_vehicle(grid, config, focus, rng));
  }
  return t;
}

Topology move_vehicles(const Topology& topology, const EnvConfig& config, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("move_vehicles: dt must be positive");
  const Grid grid(config);
  Topology next = topology;
  auto move_all = [&](std::vector<Vehicle>& vs) {
    for (Vehicle& v : vs) advance(v, grid, kmh_to_ms(v.speed_kmh) * dt, config.turn_probability, rng);
  };
  move_all(next.transmitters);
  move_all(next.receivers);
  move_all(next.cues);
  return next;
}

ShadowField initial_shadow_field(const Topology& topology, Rng& rng) {
  const int K = topology.num_pairs();
  const int N = topology.num_channels();
  ShadowField f;
  for (int k = 0; k < K; ++k) f.direct.push_back(v2v_shadow(rng));
  for (int i = 0; i < K * K; ++i) f.cross.push_back(v2v_shadow(rng));
  for (int n = 0; n < N; ++n) f.cue_bs.push_back(v2i_shadow(rng));
  for (int i = 0; i < N * K; ++i) f.cue_rx.push_back(v2v_shadow(rng));
  return f;
}

ChannelRealization realize_channels(const Topology& previous, const Topology& current,
                                    ShadowField& shadows, const EnvConfig& config, Rng& rng) {
  const int K = current.num_pairs();
  const int N = current.num_channels();
  ChannelRealization r;
  r.num_pairs = K;
  r.num_channels = N;

  auto moved = [](const Vehicle& a0, const Vehicle& a1, const Vehicle& b0, const Vehicle& b1) {
    return displacement(a0, a1) + displacement(b0, b1);
  };

  r.direct_links.reserve(K * N);
  for (int k = 0; k < K; ++k) {
    ShadowState& s = shadows.direct[k];
    s = channel::update_shadowing(
        s, moved(previous.transmitters[k], current.transmitters[k], previous.receivers[k],
                 current.receivers[k]),
        rng);
    const double pl =
        v2v_pathloss_db(current.transmitters[k].position, current.receivers[k].position,
                        config.carrier_ghz);
    for (int n = 0; n < N; ++n) {
      r.direct_links.push_back(channel::make_link_gain(pl, s.value_db, channel::sample_fast_fading(rng)));
    }
  }

  r.cross_links.resize(static_cast<std::size_t>(K) * K * N);
  for (int l = 0; l < K; ++l) {
    for (int k = 0; k < K; ++k) {
      if (l == k) continue;
      ShadowState& s = shadows.cross[l * K + k];
      s = channel::update_shadowing(
          s, moved(previous.transmitters[l], current.transmitters[l], previous.receivers[k],
                   current.receivers[k]),
          rng);
      const double pl = v2v_pathloss_db(current.transmitters[l].position,
                                        current.receivers[k].position, config.carrier_ghz);
      for (int n = 0; n < N; ++n) {
        r.cross_links[(l * K + k) * N + n] =
            channel::make_link_gain(pl, s.value_db, channel::sample_fast_fading(rng));
      }
    }
  }

  r.cue_bs_links.reserve(N);
  for (int n = 0; n < N; ++n) {
    ShadowState& s = shadows.cue_bs[n];
    s = channel::update_shadowing(s, displacement(previous.cues[n], current.cues[n]), rng);
    const double pl = v2i_pathloss_db(current.cues[n].position, current.bs_position);
    r.cue_bs_links.push_back(channel::make_link_gain(pl, s.value_db, channel::sample_fast_fading(rng)));
  }

  r.cue_rx_links.reserve(N * K);
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k) {
      ShadowState& s = shadows.cue_rx[n * K + k];
      s = channel::update_shadowing(
          s, moved(previous.cues[n], current.cues[n], previous.receivers[k], current.receivers[k]),
          rng);
      const double pl = v2v_pathloss_db(current.cues[n].position, current.receivers[k].position,
                                        config.carrier_ghz);
      r.cue_rx_links.push_back(channel::make_link_gain(pl, s.value_db, channel::sample_fast_fading(rng)));
    }
  }
  return r;
}

void check_allocation(const Allocation& allocation, const EnvConfig& config) {
  if (allocation.num_pairs() != config.num_pairs || allocation.num_channels() != config.num_channels) {
    throw std::invalid_argument("allocation shape " + std::to_string(allocation.num_pairs()) + "x" +
                                std::to_string(allocation.num_channels()) +
                                " does not match the environment");
  }
}

double interference(int k, int n, const Allocation& allocation,
                    const ChannelRealization& realization, const EnvConfig& config) {
  const double p_v2v = dbm_to_watts(config.v2v_power_dbm);
  double total = 0.0;
  for (int l = 0; l < realization.num_pairs; ++l) {
    if (l == k) continue;
    total += allocation.rho(l, n) * p_v2v * realization.cross(l, k, n).composite_linear;
  }
  total += dbm_to_watts(config.v2i_power_dbm) * realization.cue_to_rx(n, k).composite_linear;
  return total;
}

double rate(int k, int n, const Allocation& allocation, const ChannelRealization& realization,
            const EnvConfig& config) {
  if (allocation.rho(k, n) == 0) return 0.0;
  const double signal = dbm_to_watts(config.v2v_power_dbm) * realization.direct(k, n).composite_linear;
  const double sinr =
      signal / (interference(k, n, allocation, realization, config) + dbm_to_watts(config.noise_dbm));
  return config.bandwidth_hz * std::log2(1.0 + sinr);
}

std::vector<double> link_rates(const Allocation& allocation, const ChannelRealization& realization,
                               const EnvConfig& config) {
  std::vector<double> rates(realization.num_pairs, 0.0);
  for (int k = 0; k < realization.num_pairs; ++k) {
    for (int n = 0; n < realization.num_channels; ++n) {
      rates[k] += rate(k, n, allocation, realization, config);
    }
  }
  return rates;
}

double sum_rate(const Allocation& allocation, const ChannelRealization& realization,
                const EnvConfig& config) {
  const auto rates = link_rates(allocation, realization, config);
  return std::accumulate(rates.begin(), rates.end(), 0.0);
}

Observation build_observation(int k, const ChannelRealization& realization,
                              const Allocation& last_allocation, const EnvConfig& config) {
  Observation o;
  for (int n = 0; n < realization.num_channels; ++n) {
    o.gains_db.push_back(10.0 * std::log10(realization.direct(k, n).composite_linear));
    o.interference_db.push_back(
        watts_to_dbm(interference(k, n, last_allocation, realization, config)));
  }
  o.power_dbm = config.v2v_power_dbm;
  return o;
}

Environment::Environment(EnvConfig config) : Environment(config, config.seed) {}

Environment::Environment(EnvConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
  config_.validate();
  reset();
}

void Environment::reset() {
  topology_ = drop_vehicles(config_, rng_);
  shadows_ = initial_shadow_field(topology_, rng_);
  realization_ = realize_channels(topology_, topology_, shadows_, config_, rng_);
  std::uniform_int_distribution<int> pick(0, config_.num_channels - 1);
  std::vector<int> channels(config_.num_pairs);
  for (int& c : channels) c = pick(rng_);
  last_allocation_ = Allocation(std::move(channels), config_.num_channels);
  rebuild_observations();
}

StepOutcome Environment::step(const Allocation& allocation) {
  check_allocation(allocation, config_);
  StepOutcome out;
  out.per_link_rate = link_rates(allocation, realization_, config_);
  out.reward = std::accumulate(out.per_link_rate.begin(), out.per_link_rate.end(), 0.0);

  Topology next = move_vehicles(topology_, config_, config_.step_seconds, rng_);
  realization_ = realize_channels(topology_, next, shadows_, config_, rng_);
  topology_ = std::move(next);
  last_allocation_ = allocation;
  rebuild_observations();
  out.observations = observations_;
  return out;
}

double Environment::reward(const Allocation& allocation) const {
  check_allocation(allocation, config_);
  return sum_rate(allocation, realization_, config_);
}

void Environment::rebuild_observations() {
  observations_.clear();
  for (int k = 0; k < config_.num_pairs; ++k) {
    observations_.push_back(build_observation(k, realization_, last_allocation_, config_));
  }
}

}  // namespace specshare
