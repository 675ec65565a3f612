#pragma once

#include <vector>

#include "v2xsim/cam/trigger.hpp"
#include "v2xsim/core/time.hpp"
#include "v2xsim/mac/resource.hpp"
#include "v2xsim/phy/channel.hpp"

namespace v2x {

// Append-only run log: the single source every metric is computed from.
// Field lists double as the persisted CSV schemas (see metrics/csv.hpp).

struct CamLogRec {
    VehicleId vehicle = 0;
    SimTime t = 0;
    cam::TriggerCause cause = cam::TriggerCause::none;
    SimTime ipt_ms = 0; // 0 for the vehicle's first CAM
};

struct TxLogRec {
    VehicleId vehicle = 0;
    SimTime t = 0;
    SimTime subframe = 0;
    int first_subchannel = 0;
    int num_subchannels = 1;
    int sci_rri_ms = 0;
    double x = 0.0, y = 0.0;
    SimTime cam_t = 0;          // trigger time of the transmitted CAM
    SimTime queue_delay_ms = 0;
    bool predicted = false;
    int predicted_ipt_ms = 0;
    bool predictor_cold = false;
};

struct RxLogRec {
    SimTime t = 0;
    VehicleId sender = 0;
    VehicleId receiver = 0;
    double distance_m = 0.0;
    bool decoded = false;
    phy::FailureCause cause = phy::FailureCause::none;
    double sinr_db = 0.0;
};

struct MissLogRec {
    VehicleId vehicle = 0;
    SimTime t = 0;
    bool grant_broken = false;
};

enum class GrantEvent { created, completed, broken, expired };

inline const char* to_string(GrantEvent e) {
    switch (e) {
        case GrantEvent::created: return "created";
        case GrantEvent::completed: return "completed";
        case GrantEvent::broken: return "broken";
        case GrantEvent::expired: return "expired";
    }
    return "?";
}

struct GrantLogRec {
    VehicleId vehicle = 0;
    SimTime t = 0;
    GrantEvent event = GrantEvent::created;
    int rri_ms = 0;
    int c_resel = 0;
};

struct SelectLogRec {
    VehicleId vehicle = 0;
    SimTime t = 0;
    int candidates = 0;
    int total = 0;
    int threshold_raises = 0;
};

struct PredictLogRec {
    VehicleId vehicle = 0;
    SimTime t = 0;
    int predicted_ipt_ms = 0;
    int advertised_rri_ms = 0;
    bool cold = false;
};

struct QueueDropLogRec {
    VehicleId vehicle = 0;
    SimTime t = 0;
};

struct EventLog {
    std::vector<CamLogRec> cams;
    std::vector<TxLogRec> txs;
    std::vector<RxLogRec> rxs;
    std::vector<MissLogRec> misses;
    std::vector<GrantLogRec> grants;
    std::vector<SelectLogRec> selects;
    std::vector<PredictLogRec> predictions;
    std::vector<QueueDropLogRec> queue_drops;
};

} // namespace v2x
