#pragma once

// Calibration-table devices used across the tests, built directly from T1/T2
// so that they do not depend on the config parser.

#include <cmath>
#include <limits>
#include <numbers>

#include "sdid/device.hpp"

namespace sdid::testing {

inline constexpr double kUs = 1e-6;
inline constexpr double kNoT1 = std::numeric_limits<double>::infinity();

inline double nu_khz(double zz_4nu_khz) { return 2.0 * std::numbers::pi * 1e3 * zz_4nu_khz / 4.0; }

// Control T2 = 127 us, one spectator with T1 = 107 us and 4nu = 45 kHz.
inline DeviceModel one_spectator_device() {
  DeviceModel d;
  d.control = QubitParams::from_times("Q0", kNoT1, 127 * kUs);
  d.spectators.push_back({QubitParams::from_times("Q1", 107 * kUs, 0.0), nu_khz(45)});
  return d;
}

// Control T1/T2 = 141/241 us and three spectators.
inline DeviceModel three_spectator_device() {
  DeviceModel d;
  d.control = QubitParams::from_times("Q0", 141 * kUs, 241 * kUs);
  d.spectators.push_back({QubitParams::from_times("Q1", 150 * kUs, 258 * kUs), nu_khz(47)});
  d.spectators.push_back({QubitParams::from_times("Q2", 218 * kUs, 400 * kUs), nu_khz(48)});
  d.spectators.push_back({QubitParams::from_times("Q3", 122 * kUs, 175 * kUs), nu_khz(41)});
  return d;
}

}  // namespace sdid::testing
