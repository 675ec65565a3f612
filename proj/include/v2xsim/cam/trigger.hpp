#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include "v2xsim/mobility/kinematics.hpp"

namespace v2x::cam {

using mob::Kinematics;
using mob::Trace;

enum class TriggerCause { none, time, position, heading, speed };

inline const char* to_string(TriggerCause c) {
    switch (c) {
        case TriggerCause::none: return "none";
        case TriggerCause::time: return "time";
        case TriggerCause::position: return "position";
        case TriggerCause::heading: return "heading";
        case TriggerCause::speed: return "speed";
    }
    return "?";
}

inline TriggerCause trigger_cause_from_string(const std::string& s) {
    if (s == "none") return TriggerCause::none;
    if (s == "time") return TriggerCause::time;
    if (s == "position") return TriggerCause::position;
    if (s == "heading") return TriggerCause::heading;
    if (s == "speed") return TriggerCause::speed;
    throw ParseError("unknown trigger cause '" + s + "'");
}

struct Thresholds {
    double position_m = 4.0;
    double heading_deg = 4.0;
    double speed_mps = 4.0;
    SimTime max_interval_ms = 1000;
};

// Kinematic deltas are sampled on the 100 ms grid from continuous motion, so
// a delta that lands numerically on the threshold has reached it by the
// sample instant and counts as crossed. The guard is far above accumulated
// rounding (~1e-15 over a trace) and far below any physical delta step.
inline constexpr double kCrossingGuard = 1e-9;

inline bool crossed(double delta, double threshold) {
    return delta > threshold - kCrossingGuard;
}

// Shortest circular heading distance, in [0, 180].
using mob::heading_diff;

// First satisfied condition in fixed priority order: time, position,
// heading, speed. `ref` is the kinematic state at the last generated CAM and
// `elapsed_ms` the time since it.
inline TriggerCause check_trigger(const Kinematics& ref, const Kinematics& cur,
                                  SimTime elapsed_ms, const Thresholds& th = {}) {
    if (elapsed_ms >= th.max_interval_ms) return TriggerCause::time;
    if (crossed(mob::distance(ref, cur), th.position_m)) return TriggerCause::position;
    if (crossed(heading_diff(ref.heading, cur.heading), th.heading_deg))
        return TriggerCause::heading;
    if (crossed(std::fabs(ref.speed - cur.speed), th.speed_mps))
        return TriggerCause::speed;
    return TriggerCause::none;
}

// Kinematics at the most recent CAM; reset exactly when one is generated.
struct CamState {
    Kinematics last_tx;
    SimTime last_tx_time = 0;
};

struct CamEvent {
    VehicleId vehicle = 0;
    SimTime t = 0;
    TriggerCause cause = TriggerCause::none;
    int payload_bytes = 0;
    SimTime ipt_ms = 0;   // interval since the previous CAM; 0 for the first
    std::size_t index = 0;
};

// ETSI-triggered stream: first CAM at the first grid point, then the trigger
// conditions folded over every grid sample. Every IPT lands in
// {100, 200, ..., max_interval}.
inline std::vector<CamEvent> generate_cam_stream(const Trace& trace,
                                                 const Thresholds& th = {},
                                                 int payload_bytes = 190) {
    std::vector<CamEvent> events;
    if (trace.samples.empty()) return events;
    CamState state;
    state.last_tx = trace.samples.front();
    state.last_tx_time = trace.samples.front().t;
    events.push_back({trace.vehicle, state.last_tx_time, TriggerCause::time,
                      payload_bytes, 0, 0});
    for (std::size_t i = 1; i < trace.samples.size(); ++i) {
        const Kinematics& cur = trace.samples[i];
        const TriggerCause cause =
            check_trigger(state.last_tx, cur, cur.t - state.last_tx_time, th);
        if (cause == TriggerCause::none) continue;
        events.push_back({trace.vehicle, cur.t, cause, payload_bytes,
                          cur.t - state.last_tx_time, events.size()});
        state.last_tx = cur;
        state.last_tx_time = cur.t;
    }
    return events;
}

// Fixed-period stream aligned to the vehicle's first sample.
inline std::vector<CamEvent> generate_periodic_stream(const Trace& trace, SimTime period_ms,
                                                      int payload_bytes = 190) {
    if (period_ms <= 0 || period_ms % kGridMs != 0)
        throw ConfigError("periodic stream: period must be a positive multiple of 100 ms");
    std::vector<CamEvent> events;
    if (trace.samples.empty()) return events;
    for (SimTime t = trace.begin_ms(); t <= trace.end_ms(); t += period_ms) {
        events.push_back({trace.vehicle, t, TriggerCause::time, payload_bytes,
                          events.empty() ? 0 : period_ms, events.size()});
    }
    return events;
}

inline double mean_ipt_ms(const std::vector<std::vector<CamEvent>>& streams) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : streams)
        for (const auto& e : s)
            if (e.ipt_ms > 0) {
                sum += static_cast<double>(e.ipt_ms);
                ++n;
            }
    if (n == 0) throw ConfigError("mean IPT: no intervals in any CAM stream");
    return sum / static_cast<double>(n);
}

} // namespace v2x::cam
