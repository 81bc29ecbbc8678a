#include "specshare/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace specshare {

double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

namespace channel {

double pathloss_v2i(double distance_km) {
  if (!std::isfinite(distance_km) || distance_km <= 0.0) {
    throw std::domain_error("pathloss_v2i: distance must be finite and positive, got " +
                            std::to_string(distance_km));
  }
  return 128.1 + 37.6 * std::log10(distance_km);
}

double breakpoint_distance(double carrier_ghz) {
  const double h_eff = kVehicleAntennaHeight - 1.0;
  return 4.0 * h_eff * h_eff * carrier_ghz * 1e9 / kSpeedOfLight;
}

double pathloss_v2v(double distance_m, double carrier_ghz) {
  const double d = std::max(distance_m, kMinLinkDistance);
  const double h_eff = kVehicleAntennaHeight - 1.0;
  const double freq_term = std::log10(carrier_ghz / 5.0);
  if (d < breakpoint_distance(carrier_ghz)) {
    return 22.7 * std::log10(d) + 41.0 + 20.0 * freq_term;
  }
  return 40.0 * std::log10(d) + 9.45 - 17.3 * std::log10(h_eff) - 17.3 * std::log10(h_eff) +
         2.7 * freq_term;
}

double pathloss_v2v(const Position& tx, const Position& rx, double carrier_ghz) {
  return pathloss_v2v(distance(tx, rx), carrier_ghz);
}

ShadowState initial_shadowing(double std_dev, double decorrelation_distance, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return ShadowState{std_dev * normal(rng), decorrelation_distance, std_dev};
}

ShadowState update_shadowing(const ShadowState& state, double moved_distance, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double a = std::exp(-moved_distance / state.decorrelation_distance);
  ShadowState next = state;
  // The draw is taken even when a == 1 so RNG consumption does not depend on motion.
  const double z = normal(rng);
  next.value_db = a * state.value_db + std::sqrt(1.0 - a * a) * state.std_dev * z;
  return next;
}

double sample_fast_fading(Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const double re = normal(rng);
  const double im = normal(rng);
  return re * re + im * im;
}

double composite_gain(double pathloss_db, double shadow_db, double fast_power) {
  return std::pow(10.0, -(pathloss_db + shadow_db) / 10.0) * fast_power;
}

LinkGain make_link_gain(double pathloss_db, double shadow_db, double fast_power) {
  return LinkGain{pathloss_db, shadow_db, fast_power,
                  composite_gain(pathloss_db, shadow_db, fast_power)};
}

}  // namespace channel
}  // namespace specshare
