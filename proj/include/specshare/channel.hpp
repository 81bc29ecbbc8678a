#pragma once

#include <random>

namespace specshare {

using Rng = std::mt19937_64;

struct Position {
  double x = 0.0;  // meters
  double y = 0.0;  // meters
};

double distance(const Position& a, const Position& b);

// Log-normal shadowing carried between steps as a Gauss-Markov process.
struct ShadowState {
  double value_db = 0.0;
  double decorrelation_distance = 10.0;  // meters
  double std_dev = 3.0;                  // dB
};

struct LinkGain {
  double pathloss_db = 0.0;  // link-budget loss, antenna gains and noise figure included
  double shadow_db = 0.0;
  double fast_fading_power = 1.0;
  double composite_linear = 1.0;
};

namespace channel {

// Geometry and radio constants of the urban scenario.
inline constexpr double kVehicleAntennaHeight = 1.5;  // m
inline constexpr double kBsAntennaHeight = 25.0;      // m
inline constexpr double kVehicleAntennaGainDbi = 3.0;
inline constexpr double kBsAntennaGainDbi = 8.0;
inline constexpr double kVehicleNoiseFigureDb = 9.0;
inline constexpr double kBsNoiseFigureDb = 5.0;
inline constexpr double kMinLinkDistance = 3.0;  // m
inline constexpr double kSpeedOfLight = 3.0e8;   // m/s

inline constexpr double kV2iShadowStdDb = 8.0;
inline constexpr double kV2iDecorrelationM = 50.0;
inline constexpr double kV2vShadowStdDb = 3.0;
inline constexpr double kV2vDecorrelationM = 10.0;

// 128.1 + 37.6 log10(d), d in km. Throws std::domain_error unless d is finite and positive.
double pathloss_v2i(double distance_km);

// WINNER+ B1 Manhattan LoS, two-slope form. Distances below kMinLinkDistance are clamped.
//   d < d_bp : 22.7 log10(d) + 41.0 + 20 log10(fc / 5 GHz)
//   d >= d_bp: 40 log10(d) + 9.45 - 17.3 log10(h'_tx) - 17.3 log10(h'_rx) + 2.7 log10(fc / 5 GHz)
// with effective heights h' = h - 1 m and d_bp = 4 h'_tx h'_rx fc / c.
double pathloss_v2v(double distance_m, double carrier_ghz);
double pathloss_v2v(const Position& tx, const Position& rx, double carrier_ghz);

double breakpoint_distance(double carrier_ghz);

ShadowState initial_shadowing(double std_dev, double decorrelation_distance, Rng& rng);

// a = exp(-moved / d_corr); value <- a * value + sqrt(1 - a^2) * sigma * z.
ShadowState update_shadowing(const ShadowState& state, double moved_distance, Rng& rng);

// |h|^2 for h ~ CN(0, 1); exponential with unit mean.
double sample_fast_fading(Rng& rng);

double composite_gain(double pathloss_db, double shadow_db, double fast_power);

LinkGain make_link_gain(double pathloss_db, double shadow_db, double fast_power);

}  // namespace channel
}  // namespace specshare
