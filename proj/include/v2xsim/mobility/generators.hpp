#pragma once

#include <cstdint>
#include <vector>

#include "v2xsim/core/rng.hpp"
#include "v2xsim/mobility/kinematics.hpp"

namespace v2x::mob {

// Straight multi-lane highway, fixed speed per lane, no acceleration.
// Odd lanes run the opposite direction when opposing_lanes is set.
struct StraightParams {
    int lanes = 2;
    int vehicles_per_lane = 10;
    double spacing_m = 25.0;
    std::vector<double> lane_speeds_mps = {20.0, 23.0}; // cycled over lanes
    double lane_width_m = 4.0;
    bool opposing_lanes = false;
    SimTime duration_ms = 60000;
};

inline std::vector<Trace> gen_straight_highway(const StraightParams& p, std::uint64_t seed) {
    if (p.lanes < 1 || p.vehicles_per_lane < 1)
        throw ConfigError("straight highway: lanes and vehicles_per_lane must be >= 1");
    if (p.spacing_m <= 0.0) throw ConfigError("straight highway: spacing must be > 0");
    if (p.lane_speeds_mps.empty())
        throw ConfigError("straight highway: lane_speeds_mps must be non-empty");
    for (double v : p.lane_speeds_mps)
        if (v < 0.0) throw ConfigError("straight highway: lane speed must be >= 0");

    RngStream rng = RngStream(seed).fork(0x5748u); // start-offset jitter
    std::vector<Trace> traces;
    const std::size_t steps = static_cast<std::size_t>(p.duration_ms / kGridMs) + 1;
    VehicleId id = 0;
    for (int lane = 0; lane < p.lanes; ++lane) {
        const double speed = p.lane_speeds_mps[lane % p.lane_speeds_mps.size()];
        const bool reversed = p.opposing_lanes && (lane % 2 == 1);
        const double heading = reversed ? 180.0 : 0.0;
        const double y = lane * p.lane_width_m;
        for (int k = 0; k < p.vehicles_per_lane; ++k) {
            const double x0 = k * p.spacing_m + rng.uniform(0.0, p.spacing_m);
            Trace tr;
            tr.vehicle = id++;
            tr.samples.reserve(steps);
            for (std::size_t s = 0; s < steps; ++s) {
                Kinematics kin;
                kin.t = static_cast<SimTime>(s) * kGridMs;
                const double dist = speed * (static_cast<double>(s) * kGridStepSeconds);
                kin.x = reversed ? x0 - dist : x0 + dist;
                kin.y = y;
                kin.speed = speed;
                kin.heading = heading;
                tr.samples.push_back(kin);
            }
            traces.push_back(std::move(tr));
        }
    }
    return traces;
}

// Constant-radius arc, one radius per lane (offset by lane width), fixed
// angular rate v/r per vehicle. arc_deg >= 360 closes the loop into a ring
// so runs of any duration stay on the road; smaller arcs bound the duration.
struct CurvedParams {
    double radius_m = 300.0;
    double arc_deg = 360.0;
    int lanes = 3;
    int vehicles_per_lane = 10;
    std::vector<double> lane_speeds_mps = {15.0, 20.0, 25.0};
    double lane_width_m = 4.0;
    SimTime duration_ms = 60000;
};

inline std::vector<Trace> gen_curved_highway(const CurvedParams& p, std::uint64_t seed) {
    if (p.radius_m <= 0.0) throw ConfigError("curved highway: radius must be > 0");
    if (p.lanes < 1 || p.vehicles_per_lane < 1)
        throw ConfigError("curved highway: lanes and vehicles_per_lane must be >= 1");
    if (p.lane_speeds_mps.empty())
        throw ConfigError("curved highway: lane_speeds_mps must be non-empty");
    if (p.arc_deg <= 0.0) throw ConfigError("curved highway: arc must be > 0");

    const bool ring = p.arc_deg >= 360.0;
    RngStream rng = RngStream(seed).fork(0xC5A7u);
    std::vector<Trace> traces;
    const std::size_t steps = static_cast<std::size_t>(p.duration_ms / kGridMs) + 1;
    VehicleId id = 0;
    for (int lane = 0; lane < p.lanes; ++lane) {
        const double r = p.radius_m + lane * p.lane_width_m;
        const double speed = p.lane_speeds_mps[lane % p.lane_speeds_mps.size()];
        const double omega = speed / r; // rad/s, counterclockwise
        const double span = ring ? 360.0 : p.arc_deg;
        for (int k = 0; k < p.vehicles_per_lane; ++k) {
            const double slot = span / p.vehicles_per_lane;
            double phi0 = deg2rad(k * slot + rng.uniform(0.0, slot * 0.5));
            if (!ring) {
                const double swept = omega * (p.duration_ms / 1000.0);
                if (phi0 + swept > deg2rad(p.arc_deg))
                    throw ConfigError("curved highway: vehicle leaves the arc before the "
                                      "run ends; extend arc_deg or shorten duration");
            }
            Trace tr;
            tr.vehicle = id++;
            tr.samples.reserve(steps);
            for (std::size_t s = 0; s < steps; ++s) {
                const double phi = phi0 + omega * (static_cast<double>(s) * kGridStepSeconds);
                Kinematics kin;
                kin.t = static_cast<SimTime>(s) * kGridMs;
                kin.x = r * std::cos(phi);
                kin.y = r * std::sin(phi);
                kin.speed = speed;
                kin.heading = normalize_heading(rad2deg(phi) + 90.0); // tangent, CCW
                tr.samples.push_back(kin);
            }
            traces.push_back(std::move(tr));
        }
    }
    return traces;
}

} // namespace v2x::mob
