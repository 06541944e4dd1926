#pragma once

#include <numbers>

namespace propwing::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double deg_to_rad = pi / 180.0;
inline constexpr double rad_to_deg = 180.0 / pi;
inline constexpr double standard_gravity = 9.80665;  // m/s^2
inline constexpr double speed_of_sound = 340.0;      // m/s, tip-Mach warning threshold reference

constexpr double deg(double degrees) { return degrees * deg_to_rad; }

}  // namespace propwing::units
