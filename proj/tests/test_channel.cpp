#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "specshare/channel.hpp"

using namespace specshare;
namespace ch = specshare::channel;

TEST(Pathloss, V2iClosedForm) {
  // Values computed offline with an independent calculator.
  EXPECT_NEAR(ch::pathloss_v2i(0.3247), 109.73173405233764, 1e-12);
  EXPECT_DOUBLE_EQ(ch::pathloss_v2i(1.0), 128.1);
  EXPECT_NEAR(ch::pathloss_v2i(0.1), 128.1 - 37.6, 1e-12);
}

TEST(Pathloss, V2iRejectsNonPositive) {
  EXPECT_THROW(ch::pathloss_v2i(0.0), std::domain_error);
  EXPECT_THROW(ch::pathloss_v2i(-1.0), std::domain_error);
  EXPECT_THROW(ch::pathloss_v2i(NAN), std::domain_error);
}

TEST(Pathloss, V2vBothSlopes) {
  EXPECT_NEAR(ch::breakpoint_distance(2.0), 20.0 / 3.0, 1e-12);
  EXPECT_NEAR(ch::pathloss_v2v(10.0, 2.0), 58.79119982655925, 1e-10);
  EXPECT_NEAR(ch::pathloss_v2v(5.0, 2.0), 48.90781892498688, 1e-10);
}

TEST(Pathloss, V2vFloorAndMonotone) {
  EXPECT_DOUBLE_EQ(ch::pathloss_v2v(0.0, 2.0), ch::pathloss_v2v(ch::kMinLinkDistance, 2.0));
  EXPECT_DOUBLE_EQ(ch::pathloss_v2v(1.0, 2.0), ch::pathloss_v2v(3.0, 2.0));
  double prev = ch::pathloss_v2v(3.0, 2.0);
  for (double d = 3.05; d < 1500.0; d += 0.05) {
    const double pl = ch::pathloss_v2v(d, 2.0);
    EXPECT_GE(pl, prev) << "d = " << d;
    prev = pl;
  }
}

TEST(Pathloss, V2vFromPositions) {
  EXPECT_DOUBLE_EQ(ch::pathloss_v2v(Position{0, 0}, Position{6, 8}, 2.0), ch::pathloss_v2v(10.0, 2.0));
}

TEST(FastFading, UnitMeanAndExponentialTail) {
  Rng rng(11);
  const int n = 1'000'000;
  double sum = 0.0;
  int above = 0;
  for (int i = 0; i < n; ++i) {
    const double x = ch::sample_fast_fading(rng);
    ASSERT_GE(x, 0.0);
    sum += x;
    if (x > 1.0) ++above;
  }
  EXPECT_NEAR(sum / n, 1.0, 0.01);
  EXPECT_NEAR(static_cast<double>(above) / n, std::exp(-1.0), 0.01);
}

TEST(Shadowing, ZeroMoveKeepsValue) {
  Rng rng(3);
  ShadowState s{4.2, 10.0, 3.0};
  EXPECT_DOUBLE_EQ(ch::update_shadowing(s, 0.0, rng).value_db, 4.2);
}

TEST(Shadowing, LargeMoveForgets) {
  Rng rng(5);
  const int n = 200'000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = ch::update_shadowing(ShadowState{50.0, 10.0, 3.0}, 1e6, rng).value_db;
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(sq / n - mean * mean, 9.0, 0.9);
}

TEST(Shadowing, StationaryAndAutocorrelated) {
  Rng rng(7);
  const double step = 2.0, dcorr = 10.0, sigma = 3.0;
  const int n = 100'000;
  std::vector<double> v(n);
  ShadowState s = ch::initial_shadowing(sigma, dcorr, rng);
  for (int i = 0; i < n; ++i) {
    v[i] = s.value_db;
    s = ch::update_shadowing(s, step, rng);
  }
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= n;
  EXPECT_NEAR(var, sigma * sigma, 0.1 * sigma * sigma);
  for (int lag : {1, 3, 6}) {
    double c = 0.0;
    for (int i = 0; i + lag < n; ++i) c += (v[i] - mean) * (v[i + lag] - mean);
    c /= (n - lag) * var;
    EXPECT_NEAR(c, std::exp(-lag * step / dcorr), 0.05) << "lag " << lag;
  }
}

TEST(CompositeGain, HandValues) {
  EXPECT_DOUBLE_EQ(ch::composite_gain(0.0, 0.0, 1.0), 1.0);
  EXPECT_NEAR(ch::composite_gain(10.0, 0.0, 1.0), 0.1, 1e-15);
  EXPECT_NEAR(ch::composite_gain(90.5, 3.2, 0.7) / 2.9860566316111416e-10, 1.0, 1e-12);
  const auto g = ch::make_link_gain(90.5, 3.2, 0.7);
  EXPECT_DOUBLE_EQ(g.composite_linear, ch::composite_gain(90.5, 3.2, 0.7));
  EXPECT_DOUBLE_EQ(g.pathloss_db, 90.5);
  EXPECT_DOUBLE_EQ(g.shadow_db, 3.2);
  EXPECT_DOUBLE_EQ(g.fast_fading_power, 0.7);
}
