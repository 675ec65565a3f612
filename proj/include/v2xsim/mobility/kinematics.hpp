#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "v2xsim/core/error.hpp"
#include "v2xsim/core/time.hpp"

namespace v2x::mob {

inline constexpr double kGridStepSeconds = 0.1;

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

// Normalize a heading to [0, 360).
inline double normalize_heading(double deg) {
    double h = std::fmod(deg, 360.0);
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h = 0.0;
    return h;
}

// Shortest circular distance between two headings, in [0, 180].
inline double heading_diff(double a, double b) {
    const double d = std::fabs(normalize_heading(a) - normalize_heading(b));
    return d > 180.0 ? 360.0 - d : d;
}

// Headings use the math convention throughout: 0 deg points along +x and
// angles grow counterclockwise.
inline void heading_to_dir(double heading_deg, double& ux, double& uy) {
    const double r = deg2rad(heading_deg);
    ux = std::cos(r);
    uy = std::sin(r);
}

inline double dir_to_heading(double ux, double uy) {
    return normalize_heading(rad2deg(std::atan2(uy, ux)));
}

struct Kinematics {
    SimTime t = 0;        // ms
    double x = 0.0;       // m
    double y = 0.0;       // m
    double speed = 0.0;   // m/s, >= 0
    double heading = 0.0; // deg in [0, 360)
};

inline double distance(const Kinematics& a, const Kinematics& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Shortest-arc circular interpolation of headings; f in [0, 1].
inline double heading_lerp(double a, double b, double f) {
    a = normalize_heading(a);
    double delta = normalize_heading(b) - a;
    if (delta > 180.0) delta -= 360.0;
    if (delta < -180.0) delta += 360.0;
    return normalize_heading(a + delta * f);
}

// Per-vehicle kinematic trace on the 100 ms grid, gap-free, timestamps
// strictly increasing. Immutable after construction.
struct Trace {
    VehicleId vehicle = 0;
    std::vector<Kinematics> samples;

    bool empty() const { return samples.empty(); }
    SimTime begin_ms() const { return samples.front().t; }
    SimTime end_ms() const { return samples.back().t; }
    bool covers(SimTime t) const {
        return !samples.empty() && t >= begin_ms() && t <= end_ms();
    }

    // Exact stored sample on grid points; linear position/speed and
    // shortest-arc heading interpolation between them.
    Kinematics sample(SimTime t) const {
        if (!covers(t))
            throw QueryError("trace sample t=" + std::to_string(t) +
                             " outside [" + std::to_string(begin_ms()) + ", " +
                             std::to_string(end_ms()) + "] for vehicle " +
                             std::to_string(vehicle));
        const SimTime off = t - begin_ms();
        const std::size_t idx = static_cast<std::size_t>(off / kGridMs);
        const SimTime rem = off % kGridMs;
        if (rem == 0) return samples[idx];
        const Kinematics& a = samples[idx];
        const Kinematics& b = samples[idx + 1];
        const double f = static_cast<double>(rem) / static_cast<double>(kGridMs);
        Kinematics k;
        k.t = t;
        k.x = a.x + (b.x - a.x) * f;
        k.y = a.y + (b.y - a.y) * f;
        k.speed = a.speed + (b.speed - a.speed) * f;
        k.heading = heading_lerp(a.heading, b.heading, f);
        return k;
    }
};

} // namespace v2x::mob
