#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "specshare/env.hpp"

using namespace specshare;
using fixtures::gain;

namespace {

bool on_road(const Position& p, const EnvConfig& c) {
  auto near_line = [](double v, double extent, int blocks) {
    for (int i = 0; i <= blocks; ++i)
      if (std::abs(v - extent * i / blocks) < 1e-6) return true;
    return false;
  };
  return near_line(p.x, c.area_width, c.grid_blocks_x) || near_line(p.y, c.area_height, c.grid_blocks_y);
}

bool in_bounds(const Position& p, const EnvConfig& c) {
  return p.x >= -1e-9 && p.x <= c.area_width + 1e-9 && p.y >= -1e-9 && p.y <= c.area_height + 1e-9;
}

std::vector<const Vehicle*> all_vehicles(const Topology& t) {
  std::vector<const Vehicle*> out;
  for (const auto* group : {&t.transmitters, &t.receivers, &t.cues})
    for (const auto& v : *group) out.push_back(&v);
  return out;
}

}  // namespace

TEST(Drop, DefaultConfigPlacesTwelveVehiclesOnRoads) {
  EnvConfig c;
  Rng rng(1);
  const Topology t = drop_vehicles(c, rng);
  EXPECT_EQ(t.transmitters.size(), 4u);
  EXPECT_EQ(t.receivers.size(), 4u);
  EXPECT_EQ(t.cues.size(), 4u);
  EXPECT_EQ(all_vehicles(t).size(), 12u);
  for (const Vehicle* v : all_vehicles(t)) {
    EXPECT_TRUE(in_bounds(v->position, c));
    EXPECT_TRUE(on_road(v->position, c));
    EXPECT_GE(v->speed_kmh, 10.0);
    EXPECT_LE(v->speed_kmh, 15.0);
  }
  EXPECT_DOUBLE_EQ(t.bs_position.x, c.area_width / 2);
  EXPECT_DOUBLE_EQ(t.bs_position.y, c.area_height / 2);
}

TEST(Drop, PairsWithinRadiusForManySeeds) {
  for (double drop_radius : {100.0, 0.0}) {
    EnvConfig c;
    c.drop_radius = drop_radius;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Rng rng(seed);
      const Topology t = drop_vehicles(c, rng);
      for (int k = 0; k < c.num_pairs; ++k) {
        EXPECT_LE(distance(t.transmitters[k].position, t.receivers[k].position), c.pairing_radius + 1e-9);
      }
      for (const Vehicle* v : all_vehicles(t)) EXPECT_TRUE(in_bounds(v->position, c) && on_road(v->position, c));
    }
  }
}

TEST(Drop, Deterministic) {
  EnvConfig c;
  Rng a(42), b(42);
  const Topology ta = drop_vehicles(c, a), tb = drop_vehicles(c, b);
  const auto va = all_vehicles(ta), vb = all_vehicles(tb);
  for (std::size_t i = 0; i < va.size(); ++i) {
    EXPECT_EQ(va[i]->position.x, vb[i]->position.x);
    EXPECT_EQ(va[i]->position.y, vb[i]->position.y);
    EXPECT_EQ(va[i]->speed_kmh, vb[i]->speed_kmh);
  }
}

TEST(Drop, InfeasiblePairingRadiusIsConfigError) {
  EnvConfig c;
  c.pairing_radius = 500.0;
  Rng rng(1);
  EXPECT_THROW(drop_vehicles(c, rng), ConfigError);
  EnvConfig bad;
  bad.num_pairs = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Mobility, StraightSegmentDisplacement) {
  EnvConfig c;
  Topology t;
  Vehicle v;
  v.position = {200.0, 0.0};  // bottom road, far from the nodes at 0 and 433
  v.heading_x = 1.0;
  v.heading_y = 0.0;
  v.speed_kmh = 15.0;
  t.cues.push_back(v);
  Rng rng(1);
  const Topology next = move_vehicles(t, c, 0.1, rng);
  EXPECT_NEAR(distance(next.cues[0].position, v.position), 15.0 / 3.6 * 0.1, 1e-12);
  EXPECT_NEAR(next.cues[0].position.x - 200.0, 0.41666666666666669, 1e-12);
  EXPECT_EQ(next.cues[0].heading_x, 1.0);
  EXPECT_EQ(next.cues[0].heading_y, 0.0);
  EXPECT_THROW(move_vehicles(t, c, 0.0, rng), std::invalid_argument);
}

TEST(Mobility, LongRunStaysOnGrid) {
  EnvConfig c;
  c.drop_radius = 0.0;
  Rng rng(9);
  Topology t = drop_vehicles(c, rng);
  for (int step = 0; step < 10'000; ++step) {
    const Topology next = move_vehicles(t, c, c.step_seconds, rng);
    const auto before = all_vehicles(t), after = all_vehicles(next);
    for (std::size_t i = 0; i < after.size(); ++i) {
      ASSERT_TRUE(in_bounds(after[i]->position, c)) << "step " << step;
      ASSERT_TRUE(on_road(after[i]->position, c)) << "step " << step;
      // Path length along the grid bounds the Euclidean displacement.
      ASSERT_LE(distance(before[i]->position, after[i]->position),
                after[i]->speed_kmh / 3.6 * c.step_seconds + 1e-9);
    }
    t = next;
  }
}

TEST(Mobility, TurnsHappen) {
  EnvConfig c;
  c.drop_radius = 0.0;
  c.num_pairs = 8;
  Rng rng(4);
  Topology t = drop_vehicles(c, rng);
  int heading_changes = 0;
  for (int step = 0; step < 20'000; ++step) {
    const Topology next = move_vehicles(t, c, 1.0, rng);
    for (int k = 0; k < c.num_pairs; ++k) {
      if (next.transmitters[k].heading_x != t.transmitters[k].heading_x) ++heading_changes;
    }
    t = next;
  }
  EXPECT_GT(heading_changes, 10);
}

TEST(Channels, HandComposedGains) {
  EnvConfig c;
  c.num_pairs = 2;
  c.num_channels = 2;
  Topology t;
  auto at = [](double x, double y) {
    Vehicle v;
    v.position = {x, y};
    return v;
  };
  t.transmitters = {at(100, 0), at(300, 0)};
  t.receivers = {at(110, 0), at(300, 40)};
  t.cues = {at(649.5, 0), at(0, 375)};
  t.bs_position = {649.5, 375};
  Rng rng(3);
  ShadowField shadows = initial_shadow_field(t, rng);
  const ShadowField before = shadows;
  const ChannelRealization r = realize_channels(t, t, shadows, c, rng);

  // Zero displacement keeps every shadow value.
  for (int k = 0; k < 2; ++k) EXPECT_EQ(shadows.direct[k].value_db, before.direct[k].value_db);

  // Link budget: V2V loses PL - 2*3 dBi + 9 dB, V2I loses PL - 3 - 8 + 5 dB.
  const double pl_direct0 = 40.0 * std::log10(10.0) + 9.45 - 2 * 17.3 * std::log10(0.5) +
                            2.7 * std::log10(0.4) - 6.0 + 9.0;
  const double pl_direct1 = 40.0 * std::log10(40.0) + 9.45 - 2 * 17.3 * std::log10(0.5) +
                            2.7 * std::log10(0.4) - 6.0 + 9.0;
  const double d_bs0 = std::sqrt(375.0 * 375.0 + 23.5 * 23.5) / 1000.0;
  const double pl_bs0 = 128.1 + 37.6 * std::log10(d_bs0) - 3.0 - 8.0 + 5.0;
  for (int n = 0; n < 2; ++n) {
    EXPECT_NEAR(r.direct(0, n).pathloss_db, pl_direct0, 1e-10);
    EXPECT_NEAR(r.direct(1, n).pathloss_db, pl_direct1, 1e-10);
  }
  EXPECT_NEAR(r.cue_to_bs(0).pathloss_db, pl_bs0, 1e-10);

  auto check = [](const LinkGain& g) {
    const double expected = std::pow(10.0, -(g.pathloss_db + g.shadow_db) / 10.0) * g.fast_fading_power;
    EXPECT_NEAR(g.composite_linear / expected, 1.0, 1e-12);
    EXPECT_GT(g.composite_linear, 0.0);
    EXPECT_TRUE(std::isfinite(g.composite_linear));
  };
  for (const auto& g : r.direct_links) check(g);
  for (const auto& g : r.cue_bs_links) check(g);
  for (const auto& g : r.cue_rx_links) check(g);
  for (int l = 0; l < 2; ++l)
    for (int k = 0; k < 2; ++k)
      if (l != k)
        for (int n = 0; n < 2; ++n) check(r.cross(l, k, n));
  EXPECT_EQ(r.direct(0, 0).shadow_db, before.direct[0].value_db);
}

TEST(Channels, DeterministicGivenSeed) {
  EnvConfig c;
  Rng a(5), b(5);
  const Topology t = drop_vehicles(c, a);
  drop_vehicles(c, b);
  ShadowField sa = initial_shadow_field(t, a), sb = initial_shadow_field(t, b);
  const auto ra = realize_channels(t, t, sa, c, a), rb = realize_channels(t, t, sb, c, b);
  for (std::size_t i = 0; i < ra.direct_links.size(); ++i)
    EXPECT_EQ(ra.direct_links[i].composite_linear, rb.direct_links[i].composite_linear);
  for (std::size_t i = 0; i < ra.cue_rx_links.size(); ++i)
    EXPECT_EQ(ra.cue_rx_links[i].composite_linear, rb.cue_rx_links[i].composite_linear);
}

TEST(Interference, SinglePairIsV2iOnly) {
  EnvConfig c;
  c.num_pairs = 1;
  c.num_channels = 2;
  Rng rng(2);
  const auto r = fixtures::random_realization(1, 2, rng);
  const Allocation a({0}, 2);
  for (int n = 0; n < 2; ++n) {
    EXPECT_DOUBLE_EQ(interference(0, n, a, r, c), std::pow(10.0, -0.7) * r.cue_to_rx(n, 0).composite_linear);
  }
}

TEST(Interference, ThreePairsHandSum) {
  EnvConfig c;
  c.num_pairs = 3;
  c.num_channels = 2;
  ChannelRealization r;
  r.num_pairs = 3;
  r.num_channels = 2;
  r.direct_links.assign(6, gain(1e-8));
  r.cross_links.assign(18, gain(0.0));
  r.cue_bs_links.assign(2, gain(1e-9));
  r.cue_rx_links.assign(6, gain(0.0));
  // Victim link 0 on channel 1; links 1 and 2 share channel 1.
  r.cross_links[(1 * 3 + 0) * 2 + 1] = gain(3e-10);
  r.cross_links[(2 * 3 + 0) * 2 + 1] = gain(5e-11);
  r.cross_links[(1 * 3 + 0) * 2 + 0] = gain(7e-3);  // other channel: must not count
  r.cue_rx_links[1 * 3 + 0] = gain(2e-12);
  r.cue_rx_links[0 * 3 + 0] = gain(9e-3);  // CUE 0 owns channel 0 only
  const Allocation a({1, 1, 1}, 2);
  const double expected = 0.01 * 3e-10 + 0.01 * 5e-11 + 0.19952623149688797 * 2e-12;
  EXPECT_NEAR(interference(0, 1, a, r, c) / expected, 1.0, 1e-12);
  // Others elsewhere: V2I term only.
  const Allocation apart({1, 0, 0}, 2);
  EXPECT_NEAR(interference(0, 1, apart, r, c) / (0.19952623149688797 * 2e-12), 1.0, 1e-12);
}

TEST(Rate, UnselectedChannelIsZero) {
  EnvConfig c;
  c.num_pairs = 2;
  c.num_channels = 2;
  Rng rng(1);
  const auto r = fixtures::random_realization(2, 2, rng);
  const Allocation a({0, 0}, 2);
  EXPECT_EQ(rate(0, 1, a, r, c), 0.0);
  EXPECT_GT(rate(0, 0, a, r, c), 0.0);
}

TEST(Rate, UnitSinrGivesBandwidth) {
  EnvConfig c;
  c.num_pairs = 1;
  c.num_channels = 1;
  ChannelRealization r;
  r.num_pairs = 1;
  r.num_channels = 1;
  const double noise_w = std::pow(10.0, -14.4);
  const double g = 1e-10;
  const double i_w = std::pow(10.0, -0.7) * g;
  r.direct_links = {gain((i_w + noise_w) / 0.01)};
  r.cross_links = {gain(0.0)};
  r.cue_bs_links = {gain(1.0)};
  r.cue_rx_links = {gain(g)};
  EXPECT_NEAR(rate(0, 0, Allocation({0}, 1), r, c), c.bandwidth_hz, 1e-6);
}

TEST(Rate, MatchesScalarOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    EnvConfig c;
    c.num_pairs = 1 + trial % 4;
    c.num_channels = 1 + (trial / 4) % 4;
    c.bandwidth_hz = 1e6 * (1 + trial % 3);
    const auto r = fixtures::random_realization(c.num_pairs, c.num_channels, rng);
    const auto a = fixtures::random_allocation(c.num_pairs, c.num_channels, rng);
    for (int k = 0; k < c.num_pairs; ++k)
      for (int n = 0; n < c.num_channels; ++n)
        EXPECT_LE(fixtures::rel_err(rate(k, n, a, r, c), fixtures::oracle_rate(k, n, a.channels(), r, c)), 1e-12);
    EXPECT_LE(fixtures::rel_err(sum_rate(a, r, c), fixtures::oracle_sum_rate(a.channels(), r, c)), 1e-12);
  }
}

TEST(Rate, InterfererGainNeverHelps) {
  EnvConfig c;
  c.num_pairs = 3;
  c.num_channels = 2;
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    auto r = fixtures::random_realization(3, 2, rng);
    const Allocation a({0, 0, 1}, 2);
    double prev = rate(0, 0, a, r, c);
    for (int i = 0; i < 10; ++i) {
      r.cross_links[(1 * 3 + 0) * 2 + 0].composite_linear *= 3.0;
      const double now = rate(0, 0, a, r, c);
      EXPECT_LE(now, prev);
      prev = now;
    }
  }
}

TEST(Observation, DbValuesAndScaling) {
  EnvConfig c;
  c.num_pairs = 2;
  c.num_channels = 4;
  Rng rng(6);
  const auto r = fixtures::random_realization(2, 4, rng);
  const Allocation last({2, 2}, 4);
  const Observation o = build_observation(0, r, last, c);
  ASSERT_EQ(o.size(), 9u);
  const auto f = o.features();
  ASSERT_EQ(f.size(), 9u);
  for (int n = 0; n < 4; ++n) {
    const double g_db = 10.0 * std::log10(r.direct_links[n].composite_linear);
    double i_mw = std::pow(10.0, 2.3) * r.cue_rx_links[n * 2 + 0].composite_linear;
    if (n == 2) i_mw += 10.0 * r.cross_links[(1 * 2 + 0) * 4 + 2].composite_linear;
    const double i_dbm = 10.0 * std::log10(i_mw);
    EXPECT_NEAR(o.gains_db[n], g_db, 1e-9);
    EXPECT_NEAR(o.interference_db[n], i_dbm, 1e-9);
    EXPECT_NEAR(f[n], (g_db + 120.0) / 60.0, 1e-10);
    EXPECT_NEAR(f[4 + n], (i_dbm + 120.0) / 60.0, 1e-10);
    EXPECT_TRUE(std::isfinite(f[4 + n]));
  }
  EXPECT_DOUBLE_EQ(o.power_dbm, 10.0);
  EXPECT_NEAR(f[8], 10.0 / 23.0, 1e-15);
}

TEST(Allocation, MatrixValidation) {
  const auto a = Allocation::from_matrix({{0, 1, 0}, {1, 0, 0}});
  EXPECT_EQ(a.channels(), (std::vector<int>{1, 0}));
  EXPECT_EQ(a.rho(0, 1), 1);
  EXPECT_EQ(a.rho(0, 0), 0);
  EXPECT_THROW(Allocation::from_matrix({{1, 1, 0}}), std::invalid_argument);
  EXPECT_THROW(Allocation::from_matrix({{0, 0, 0}}), std::invalid_argument);
  EXPECT_THROW(Allocation::from_matrix({{2, 0}}), std::invalid_argument);
  EXPECT_THROW(Allocation({3}, 2), std::invalid_argument);
}

TEST(Environment, StepContract) {
  EnvConfig c;
  Environment env(c, 77);
  const ChannelRealization before = env.realization();
  const Allocation a({0, 1, 2, 3}, 4);
  const double expected = fixtures::oracle_sum_rate(a.channels(), before, c);
  const StepOutcome out = env.step(a);
  double sum = 0.0;
  for (double r : out.per_link_rate) {
    EXPECT_GE(r, 0.0);
    sum += r;
  }
  EXPECT_LE(fixtures::rel_err(out.reward, sum), 1e-12);
  // Rates use the realization before the move.
  EXPECT_LE(fixtures::rel_err(out.reward, expected), 1e-12);
  ASSERT_EQ(out.observations.size(), 4u);
  for (const auto& o : out.observations) EXPECT_EQ(o.features().size(), 9u);
  // Next observations use the new channels and the just-taken allocation.
  for (int k = 0; k < 4; ++k) {
    const Observation o = build_observation(k, env.realization(), a, c);
    EXPECT_EQ(o.interference_db, out.observations[k].interference_db);
  }
  EXPECT_EQ(env.last_allocation(), a);
  EXPECT_THROW(env.step(Allocation({0, 1}, 4)), std::invalid_argument);
}

TEST(Environment, DeterministicTrajectories) {
  EnvConfig c;
  Environment a(c, 5), b(c, 5);
  for (int episode = 0; episode < 3; ++episode) {
    if (episode > 0) {
      a.reset();
      b.reset();
    }
    for (int t = 0; t < 50; ++t) {
      const Allocation alloc({t % 4, (t / 4) % 4, 1, 2}, 4);
      const auto oa = a.step(alloc), ob = b.step(alloc);
      ASSERT_EQ(oa.reward, ob.reward);
      ASSERT_EQ(oa.observations[2].gains_db, ob.observations[2].gains_db);
    }
  }
}

TEST(Environment, RewardMatchesStep) {
  EnvConfig c;
  Environment env(c, 3);
  const Allocation alloc({1, 1, 0, 3}, 4);
  const double r = env.reward(alloc);
  EXPECT_EQ(env.step(alloc).reward, r);
}
