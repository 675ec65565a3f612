#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "v2xsim/cam/trigger.hpp"
#include "v2xsim/core/error.hpp"
#include "v2xsim/core/time.hpp"

namespace v2x::pred {

// Nearest member of the allowed RRI set; exact midpoints round up toward the
// longer (safer) reservation.
inline int map_ipt_to_rri(double ipt_ms, const std::vector<int>& allowed) {
    if (allowed.empty()) throw ConfigError("map_ipt_to_rri: empty allowed RRI set");
    int best = allowed.front();
    double best_d = std::fabs(ipt_ms - best);
    for (int a : allowed) {
        const double d = std::fabs(ipt_ms - a);
        if (d < best_d || (d == best_d && a > best)) {
            best = a;
            best_d = d;
        }
    }
    return best;
}

struct IptPrediction {
    int predicted_ipt_ms = 1000;
    cam::TriggerCause cause = cam::TriggerCause::time;
    bool cold = false; // fallback used (history not warm)
    // Predicted (speed, sin, cos) per 100 ms step, when a model produced one.
    std::array<std::array<double, 3>, 10> trajectory{};
    bool has_trajectory = false;
};

// Pluggable IPT prediction behind one interface. Instances are per-run and
// exclusively owned by the event loop.
class IptPredictor {
public:
    virtual ~IptPredictor() = default;

    // Called exactly at each CAM transmission. `cam_index` identifies the CAM
    // being transmitted within the vehicle's stream; `ref` holds the
    // kinematics at its trigger.
    virtual IptPrediction predict(VehicleId v, SimTime now, std::size_t cam_index,
                                  const cam::CamState& ref) = 0;

    // Grid-tick observation of the vehicle's own kinematics.
    virtual void observe(VehicleId /*v*/, const mob::Kinematics& /*k*/) {}

    // RRI governing grant geometry (selection-window bound, silent advance).
    virtual int base_rri_ms(int default_rri) const { return default_rri; }
};

class PeriodicPredictor final : public IptPredictor {
public:
    explicit PeriodicPredictor(int rri_ms) : rri_ms_(rri_ms) {}

    IptPrediction predict(VehicleId, SimTime, std::size_t, const cam::CamState&) override {
        return {rri_ms_, cam::TriggerCause::time, false, {}, false};
    }

    int base_rri_ms(int) const override { return rri_ms_; }

private:
    int rri_ms_;
};

// Scenario-mean IPT rounded to the closest RRI, fixed for the whole run.
class MeanIptPredictor final : public IptPredictor {
public:
    MeanIptPredictor(double mean_ipt_ms, const std::vector<int>& allowed)
        : rri_ms_(map_ipt_to_rri(mean_ipt_ms, allowed)) {}

    IptPrediction predict(VehicleId, SimTime, std::size_t, const cam::CamState&) override {
        return {rri_ms_, cam::TriggerCause::time, false, {}, false};
    }

    int base_rri_ms(int) const override { return rri_ms_; }

private:
    int rri_ms_;
};

// Reads the true next IPT from the precomputed CAM streams: the simulator's
// lower bound on reservation error.
class OraclePredictor final : public IptPredictor {
public:
    explicit OraclePredictor(std::shared_ptr<const std::vector<std::vector<cam::CamEvent>>> streams,
                             SimTime max_interval_ms = 1000)
        : streams_(std::move(streams)), max_interval_ms_(max_interval_ms) {}

    IptPrediction predict(VehicleId v, SimTime, std::size_t cam_index,
                          const cam::CamState&) override {
        const auto& stream = (*streams_)[v];
        if (cam_index + 1 < stream.size()) {
            const SimTime ipt = stream[cam_index + 1].t - stream[cam_index].t;
            return {static_cast<int>(ipt), stream[cam_index + 1].cause, false, {}, false};
        }
        // Past the last CAM of the run there is nothing to reserve for.
        return {static_cast<int>(max_interval_ms_), cam::TriggerCause::time, false, {}, false};
    }

private:
    std::shared_ptr<const std::vector<std::vector<cam::CamEvent>>> streams_;
    SimTime max_interval_ms_;
};

// Ring of the most recent grid samples of (speed, sin heading, cos heading).
class KinematicHistory {
public:
    explicit KinematicHistory(std::size_t capacity = 600) : cap_(capacity), buf_(capacity * 3) {}

    void push(double speed, double sin_h, double cos_h) {
        const std::size_t i = (head_ % cap_) * 3;
        buf_[i] = speed;
        buf_[i + 1] = sin_h;
        buf_[i + 2] = cos_h;
        ++head_;
        if (size_ < cap_) ++size_;
    }

    void push(const mob::Kinematics& k) {
        const double r = mob::deg2rad(k.heading);
        push(k.speed, std::sin(r), std::cos(r));
    }

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return cap_; }
    bool warm() const { return size_ == cap_; }

    // Oldest-first (speed/max_speed, sin, cos) rows into out[cap*3].
    void write_features(double* out, double max_speed) const {
        const std::size_t start = head_ - size_;
        for (std::size_t k = 0; k < size_; ++k) {
            const std::size_t i = ((start + k) % cap_) * 3;
            out[k * 3] = buf_[i] / max_speed;
            out[k * 3 + 1] = buf_[i + 1];
            out[k * 3 + 2] = buf_[i + 2];
        }
    }

private:
    std::size_t cap_;
    std::vector<double> buf_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
};

// Dead-reckon the predicted trajectory from the reference CAM kinematics and
// apply the CAM trigger rules step by step. Exactly the cam-service trigger
// function, fed with reconstructed kinematics.
struct TrajectoryWalk {
    int ipt_ms = 1000;
    cam::TriggerCause cause = cam::TriggerCause::time;
};

inline TrajectoryWalk walk_predicted_trajectory(
    const cam::CamState& ref, const std::array<std::array<double, 3>, 10>& traj,
    const cam::Thresholds& th = {}) {
    mob::Kinematics cur = ref.last_tx;
    for (int k = 0; k < 10; ++k) {
        const double speed = traj[k][0];
        const double heading = mob::dir_to_heading(traj[k][2], traj[k][1]);
        double ux, uy;
        mob::heading_to_dir(heading, ux, uy);
        cur.x += speed * mob::kGridStepSeconds * ux;
        cur.y += speed * mob::kGridStepSeconds * uy;
        cur.speed = speed;
        cur.heading = heading;
        const SimTime elapsed = static_cast<SimTime>(k + 1) * kGridMs;
        cur.t = ref.last_tx_time + elapsed;
        const cam::TriggerCause c = cam::check_trigger(ref.last_tx, cur, elapsed, th);
        if (c != cam::TriggerCause::none) return {static_cast<int>(elapsed), c};
    }
    return {static_cast<int>(th.max_interval_ms), cam::TriggerCause::time};
}

} // namespace v2x::pred
