#pragma once

#include <cstdint>

namespace v2x {

// One subframe = 1 ms. Simulation time is an integer count of subframes
// since scenario start.
using SimTime = std::int64_t;

inline constexpr SimTime kSubframesPerSecond = 1000;

// Kinematics, CAM triggering and the predictor all operate on a 100 ms grid.
inline constexpr SimTime kGridMs = 100;

inline constexpr bool on_grid(SimTime t) { return t % kGridMs == 0; }

using VehicleId = std::uint32_t;

} // namespace v2x
