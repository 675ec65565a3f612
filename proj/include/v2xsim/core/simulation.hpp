#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "v2xsim/core/config.hpp"
#include "v2xsim/core/event_log.hpp"
#include "v2xsim/mac/sps.hpp"
#include "v2xsim/predictor/gru_predictor.hpp"
#include "v2xsim/predictor/predictor.hpp"

namespace v2x {

enum class Hook { mobility, cam, mac, phy, sensing };

inline const char* to_string(Hook h) {
    switch (h) {
        case Hook::mobility: return "mobility";
        case Hook::cam: return "cam";
        case Hook::mac: return "mac";
        case Hook::phy: return "phy";
        case Hook::sensing: return "sensing";
    }
    return "?";
}

// Everything a run consumes, fully prepared: traces indexed by VehicleId,
// one CAM stream per vehicle, one scheduler mode per vehicle, and the
// (optional) predictor shared by every MAC entity.
struct SimInputs {
    ScenarioConfig cfg;
    std::vector<mob::Trace> traces;
    // Shared so the oracle predictor can read ahead without lifetime games.
    std::shared_ptr<std::vector<std::vector<cam::CamEvent>>> streams;
    std::vector<mac::SchedulerMode> modes;
    std::vector<int> base_rri_ms; // per-vehicle grant RRI; empty = config default
    std::shared_ptr<pred::IptPredictor> predictor;
    bool streaming_gru = false;
};

// Single-threaded, single-clock event loop. Per subframe the hooks fire in
// fixed order: mobility, cam, mac, phy, sensing. The append-only log is the
// sole output metrics are derived from.
class Simulation {
public:
    explicit Simulation(SimInputs in) : in_(std::move(in)) { validate(); }

    using HookProbe = std::function<void(SimTime, Hook)>;
    void set_hook_probe(HookProbe probe) { probe_ = std::move(probe); }

    const EventLog& run() {
        const std::size_t V = in_.traces.size();
        const ScenarioConfig& cfg = in_.cfg;
        RngStream root(cfg.seed);
        const std::uint64_t channel_seed = root.fork(0xC4A2u).next_u64();

        std::vector<mac::MacEntity> entities;
        entities.reserve(V);
        for (std::size_t v = 0; v < V; ++v) {
            mac::MacConfig mc = cfg.mac;
            mc.num_subchannels = cfg.channel.num_subchannels;
            mc.mode = in_.modes[v];
            if (!in_.base_rri_ms.empty() && in_.base_rri_ms[v] > 0)
                mc.default_rri_ms = in_.base_rri_ms[v];
            entities.emplace_back(static_cast<VehicleId>(v), mc,
                                  root.fork(0x1000u + v), in_.predictor.get());
        }

        std::vector<mob::Kinematics> pos(V);
        std::vector<std::size_t> next_cam(V, 0);
        std::vector<phy::TxRecord> txs;
        std::vector<char> tx_flag(V, 0);
        std::vector<phy::ReceiverState> receivers(V);

        auto* gru = in_.streaming_gru
                        ? static_cast<pred::GruStreamingPredictor*>(in_.predictor.get())
                        : nullptr;

        for (SimTime sf = 0; sf < cfg.duration_ms; ++sf) {
            // (1) mobility
            for (std::size_t v = 0; v < V; ++v) pos[v] = in_.traces[v].sample(sf);
            fire(sf, Hook::mobility);

            // (2) CAM arrivals and kinematic observation, on the 100 ms grid
            if (on_grid(sf)) {
                if (in_.predictor)
                    for (std::size_t v = 0; v < V; ++v)
                        in_.predictor->observe(static_cast<VehicleId>(v), pos[v]);
                if (gru) gru->flush();
                for (std::size_t v = 0; v < V; ++v) {
                    const auto& stream = (*in_.streams)[v];
                    while (next_cam[v] < stream.size() && stream[next_cam[v]].t == sf) {
                        const cam::CamEvent& e = stream[next_cam[v]];
                        log_.cams.push_back(
                            {static_cast<VehicleId>(v), sf, e.cause, e.ipt_ms});
                        mac::Packet p;
                        p.cam_index = e.index;
                        p.arrival_ms = sf;
                        p.payload_bytes = e.payload_bytes;
                        p.cause = e.cause;
                        p.kin_at_trigger = pos[v];
                        if (entities[v].on_packet(p))
                            log_.queue_drops.push_back({static_cast<VehicleId>(v), sf});
                        ++next_cam[v];
                    }
                }
            }
            fire(sf, Hook::cam);

            // (3) MAC grant maintenance and transmissions
            txs.clear();
            std::fill(tx_flag.begin(), tx_flag.end(), 0);
            for (std::size_t v = 0; v < V; ++v) {
                const mac::MacActions act = entities[v].on_subframe(sf);
                const VehicleId vid = static_cast<VehicleId>(v);
                if (act.selection)
                    log_.selects.push_back({vid, sf, act.selection->candidate_count,
                                            act.selection->total_enumerable,
                                            act.selection->threshold_raises});
                if (act.grant_created)
                    log_.grants.push_back({vid, sf, GrantEvent::created,
                                           act.grant_created->rri_ms,
                                           act.grant_created->c_resel});
                if (act.missed_opportunity)
                    log_.misses.push_back({vid, sf, act.grant_broken});
                if (act.grant_broken)
                    log_.grants.push_back({vid, sf, GrantEvent::broken, 0, 0});
                if (act.grant_expired)
                    log_.grants.push_back({vid, sf, GrantEvent::expired, 0, 0});
                if (act.tx) {
                    const mac::TxIntent& tx = *act.tx;
                    if (act.grant_completed)
                        log_.grants.push_back({vid, sf, GrantEvent::completed,
                                               tx.sci.rri_ms, 0});
                    phy::TxRecord rec;
                    rec.sender = vid;
                    rec.resource = tx.resource;
                    rec.sci = tx.sci;
                    rec.x = pos[v].x;
                    rec.y = pos[v].y;
                    txs.push_back(rec);
                    tx_flag[v] = 1;
                    log_.txs.push_back({vid, sf, tx.resource.subframe,
                                        tx.resource.first_subchannel,
                                        tx.resource.num_subchannels, tx.sci.rri_ms,
                                        pos[v].x, pos[v].y, tx.packet.arrival_ms,
                                        tx.queue_delay_ms, tx.predicted,
                                        tx.predicted_ipt_ms, tx.predictor_cold});
                    if (tx.predicted)
                        log_.predictions.push_back({vid, sf, tx.predicted_ipt_ms,
                                                    tx.sci.rri_ms, tx.predictor_cold});
                }
            }
            fire(sf, Hook::mac);

            // (4) PHY reception resolution and channel sensing
            for (std::size_t v = 0; v < V; ++v)
                receivers[v] = {static_cast<VehicleId>(v), pos[v].x, pos[v].y,
                                tx_flag[v] != 0};
            const phy::SubframeResolution res =
                phy::resolve_subframe(cfg.channel, txs, receivers, channel_seed, sf);
            for (const auto& out : res.outcomes)
                if (out.distance_m <= kRxLogRangeM)
                    log_.rxs.push_back({sf, out.sender, out.receiver, out.distance_m,
                                        out.decoded, out.cause, out.sinr_db});
            fire(sf, Hook::phy);

            // (5) sensing updates
            for (std::size_t v = 0; v < V; ++v) {
                if (tx_flag[v]) entities[v].mark_own_tx(sf, sf);
                else entities[v].record_sensing(sf, sf, res.sensing[v]);
            }
            fire(sf, Hook::sensing);
        }
        return log_;
    }

    const EventLog& log() const { return log_; }

    // Reception outcomes beyond this range are not logged; metrics bin to
    // 500 m, sensing uses the full configured range internally.
    static constexpr double kRxLogRangeM = 600.0;

private:
    void validate() const {
        in_.cfg.validate();
        const std::size_t V = in_.traces.size();
        if (V == 0) throw ConfigError("simulation: no traces");
        if (!in_.streams || in_.streams->size() != V || in_.modes.size() != V)
            throw ConfigError("simulation: streams/modes must match trace count");
        if (!in_.base_rri_ms.empty() && in_.base_rri_ms.size() != V)
            throw ConfigError("simulation: base_rri_ms must be empty or match trace count");
        for (std::size_t v = 0; v < V; ++v) {
            if (in_.traces[v].vehicle != static_cast<VehicleId>(v))
                throw ConfigError("simulation: trace ids must be compact 0..V-1");
            if (in_.traces[v].begin_ms() > 0 ||
                in_.traces[v].end_ms() < in_.cfg.duration_ms - 1)
                throw ConfigError("simulation: trace of vehicle " + std::to_string(v) +
                                  " does not cover [0, duration)");
        }
    }

    void fire(SimTime sf, Hook h) {
        if (probe_) probe_(sf, h);
    }

    SimInputs in_;
    EventLog log_;
    HookProbe probe_;
};

} // namespace v2x
