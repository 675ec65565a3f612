#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "v2xsim/core/rng.hpp"
#include "v2xsim/mac/resource.hpp"
#include "v2xsim/mac/sensing.hpp"
#include "v2xsim/predictor/predictor.hpp"

namespace v2x::mac {

enum class SchedulerMode { cv2x_sps, nr_sps, nr_dynamic };

inline const char* to_string(SchedulerMode m) {
    switch (m) {
        case SchedulerMode::cv2x_sps: return "cv2x-sps";
        case SchedulerMode::nr_sps: return "nr-sps";
        case SchedulerMode::nr_dynamic: return "nr-dynamic";
    }
    return "?";
}

struct MacConfig {
    SchedulerMode mode = SchedulerMode::nr_sps;
    bool grant_breaking = false;
    double keep_probability = 0.0;
    double rsrp_threshold_dbm = -126.0;
    int sensing_window_ms = 0; // 0 -> mode default
    int t1_ms = 4;
    int t2_ms = 100;
    std::vector<int> allowed_rri_ms = {100, 200, 300, 400, 500,
                                       600, 700, 800, 900, 1000};
    int default_rri_ms = 100;
    int grant_subchannels = 1;
    int num_subchannels = 3;
    int sci_priority = 0;
    // Sweep the prospective grant's own transmission lattice when testing
    // candidates against projected reservations, so a reservation landing on
    // a later own period also disqualifies the slot. Without it, grants with
    // unequal RRIs collide repeatedly on lattice beats the selection window
    // cannot see. Neighbor reservations still project a single hop.
    bool multi_period_exclusion = true;

    int effective_sensing_window_ms() const {
        if (sensing_window_ms > 0) return sensing_window_ms;
        return mode == SchedulerMode::cv2x_sps ? 1000 : 1100;
    }

    bool rri_allowed(int rri) const {
        return std::find(allowed_rri_ms.begin(), allowed_rri_ms.end(), rri) !=
               allowed_rri_ms.end();
    }

    void validate() const {
        if (num_subchannels < 1) throw ConfigError("mac: num_subchannels must be >= 1");
        if (allowed_rri_ms.empty()) throw ConfigError("mac: allowed RRI set is empty");
        if (!std::is_sorted(allowed_rri_ms.begin(), allowed_rri_ms.end()))
            throw ConfigError("mac: allowed RRI set must be sorted ascending");
        if (t1_ms >= t2_ms) throw ConfigError("mac: selection window requires T1 < T2");
        if (t1_ms < 1) throw ConfigError("mac: T1 must be >= 1");
        if (!rri_allowed(default_rri_ms))
            throw ConfigError("mac: default RRI not in the allowed set");
        if (grant_subchannels < 1 || grant_subchannels > num_subchannels)
            throw ConfigError("mac: grant width out of range");
        if (keep_probability < 0.0 || keep_probability > 1.0)
            throw ConfigError("mac: keep probability out of [0, 1]");
    }
};

struct SelectionResult {
    SidelinkResource choice;
    int candidate_count = 0;  // remaining after exclusion, before the final pick
    int total_enumerable = 0;
    int threshold_raises = 0;
};

// Sensing-based candidate selection:
//   (1) enumerate candidate single-subframe resources in [now+T1, now+T2eff];
//   (2) drop subframes a reservation could hit unheard (own tx at y - RRI);
//   (3) drop candidates a decoded SCI projects as reserved with RSRP above
//       the threshold: one hop at the advertised RRI, tested against every
//       own transmission period y + j*rri for j in [0, reselections];
//   (4) below a 20% floor, raise the threshold 3 dB and redo (3);
//   (5) cv2x ranks what is left by mean RSSI and draws from the lowest 20%,
//       nr modes draw uniformly.
inline SelectionResult select_resource(const SensingWindow& win, SimTime now, int rri_ms,
                                       const MacConfig& cfg, RngStream& rng,
                                       int reselections = 0) {
    const int t2_eff = std::min(cfg.t2_ms, rri_ms);
    if (cfg.t1_ms > t2_eff)
        throw ConfigError("select_resource: empty selection window (T1 > min(T2, RRI))");

    const int n_subframes = t2_eff - cfg.t1_ms + 1;
    const int width = cfg.grant_subchannels;
    const int n_starts = cfg.num_subchannels / width;
    const int total = n_subframes * n_starts;
    const int sweep = cfg.multi_period_exclusion ? std::max(0, reselections) : 0;

    // (2) own-tx gaps, projected forward one hop over every allowed RRI
    std::vector<char> subframe_blocked(static_cast<std::size_t>(n_subframes), 0);
    for (int i = 0; i < n_subframes; ++i) {
        const SimTime y = now + cfg.t1_ms + i;
        for (int rri : cfg.allowed_rri_ms) {
            const SensingWindow::Entry* e = win.at(y - rri, now);
            if (e && e->own_tx) {
                subframe_blocked[i] = 1;
                break;
            }
        }
    }

    // Decoded-SCI reservations covering any own transmission period.
    struct Projection {
        SimTime subframe;
        int first_subchannel;
        int num_subchannels;
        double rsrp_dbm;
    };
    std::vector<Projection> projections;
    double max_rsrp = -std::numeric_limits<double>::infinity();
    const int window_ms = win.window_ms();
    const SimTime horizon = now + t2_eff + static_cast<SimTime>(sweep) * rri_ms;
    for (SimTime z = now - window_ms; z < now; ++z) {
        const SensingWindow::Entry* e = win.at(z, now);
        if (!e || e->own_tx) continue;
        for (int c = 0; c < win.num_subchannels(); ++c) {
            const auto& cell = e->cells[c];
            if (!cell.has_sci || cell.sci.rri_ms <= 0) continue;
            if (c > cell.sci.reserved.first_subchannel) continue; // one hop per SCI
            const SimTime projected = cell.sci.reserved.subframe + cell.sci.rri_ms;
            if (projected < now + cfg.t1_ms || projected > horizon) continue;
            projections.push_back({projected, cell.sci.reserved.first_subchannel,
                                   cell.sci.reserved.num_subchannels, cell.rsrp_dbm});
            max_rsrp = std::max(max_rsrp, cell.rsrp_dbm);
        }
    }

    // (3) + (4)
    std::vector<char> excluded(static_cast<std::size_t>(total), 0);
    double threshold = cfg.rsrp_threshold_dbm;
    int raises = 0;
    int remaining = 0;
    const SimTime window_lo = now + cfg.t1_ms;
    for (;;) {
        remaining = total;
        std::fill(excluded.begin(), excluded.end(), 0);
        for (int i = 0; i < n_subframes; ++i)
            if (subframe_blocked[i]) {
                for (int s = 0; s < n_starts; ++s) excluded[i * n_starts + s] = 1;
                remaining -= n_starts;
            }
        for (const auto& p : projections) {
            if (p.rsrp_dbm <= threshold) continue;
            // own periods: y + j*rri == p.subframe with y inside the window;
            // the window never exceeds one RRI, so at most one j fits.
            const SimTime delta = p.subframe - window_lo;
            const SimTime j = delta / rri_ms;
            if (j < 0 || j > sweep) continue;
            const SimTime y = p.subframe - j * static_cast<SimTime>(rri_ms);
            if (y < window_lo || y > now + t2_eff) continue;
            const int i = static_cast<int>(y - window_lo);
            if (subframe_blocked[i]) continue;
            for (int s = 0; s < n_starts; ++s) {
                const int first = s * width;
                if (first < p.first_subchannel + p.num_subchannels &&
                    p.first_subchannel < first + width) {
                    const int idx = i * n_starts + s;
                    if (!excluded[idx]) {
                        excluded[idx] = 1;
                        --remaining;
                    }
                }
            }
        }
        if (remaining * 5 >= total) break;
        if (threshold >= max_rsrp) break; // ladder exhausted, only own-tx gaps remain
        threshold += 3.0;
        ++raises;
    }

    if (remaining == 0) {
        // Every subframe unheard: there is no reservation information at all,
        // so fall back to a blind uniform draw over the full enumeration.
        std::fill(excluded.begin(), excluded.end(), 0);
        remaining = total;
    }

    std::vector<int> candidates;
    candidates.reserve(static_cast<std::size_t>(remaining));
    for (int idx = 0; idx < total; ++idx)
        if (!excluded[idx]) candidates.push_back(idx);

    auto resource_of = [&](int idx) {
        SidelinkResource r;
        r.subframe = now + cfg.t1_ms + idx / n_starts;
        r.first_subchannel = (idx % n_starts) * width;
        r.num_subchannels = width;
        return r;
    };

    int chosen_idx;
    if (cfg.mode == SchedulerMode::cv2x_sps) {
        // Mean linear RSSI over the candidate's past 100 ms-phase occurrences;
        // never-measured candidates rank quietest.
        std::vector<std::pair<double, int>> ranked;
        ranked.reserve(candidates.size());
        for (int idx : candidates) {
            const SidelinkResource r = resource_of(idx);
            double sum_mw = 0.0;
            int n = 0;
            for (SimTime z = r.subframe - 100; z >= now - window_ms; z -= 100) {
                const SensingWindow::Entry* e = win.at(z, now);
                if (!e || e->own_tx) continue;
                for (int c = r.first_subchannel; c < r.end_subchannel(); ++c) {
                    sum_mw += phy::dbm_to_mw(e->cells[c].rssi_dbm);
                    ++n;
                }
            }
            const double mean = n > 0 ? sum_mw / n : -std::numeric_limits<double>::infinity();
            ranked.emplace_back(mean, idx);
        }
        std::sort(ranked.begin(), ranked.end());
        const std::size_t keep =
            std::max<std::size_t>(1, (ranked.size() + 4) / 5); // lowest 20%
        chosen_idx = ranked[static_cast<std::size_t>(
                                rng.uniform_int(0, static_cast<std::int64_t>(keep) - 1))]
                         .second;
    } else {
        chosen_idx = candidates[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
    }

    return {resource_of(chosen_idx), remaining, total, raises};
}

struct GrantCreation {
    Grant grant;
    SelectionResult selection;
};

// New grant: c_resel drawn uniformly from [5, 15], then the resource picked
// with the candidate exclusion swept over that many own periods.
inline GrantCreation create_grant(const SensingWindow& win, SimTime now, int rri_ms,
                                  const MacConfig& cfg, RngStream& rng) {
    if (!cfg.rri_allowed(rri_ms))
        throw ConfigError("create_grant: RRI " + std::to_string(rri_ms) +
                          " not in the allowed set");
    GrantCreation gc;
    const int c_resel = static_cast<int>(rng.uniform_int(5, 15));
    gc.selection = select_resource(win, now, rri_ms, cfg, rng, c_resel - 1);
    gc.grant.first_subchannel = gc.selection.choice.first_subchannel;
    gc.grant.num_subchannels = gc.selection.choice.num_subchannels;
    gc.grant.next_tx = gc.selection.choice.subframe;
    gc.grant.rri_ms = rri_ms;
    gc.grant.c_resel = c_resel;
    return gc;
}

// A CAM waiting at the MAC. Queue depth is 1: a fresher CAM replaces a stale
// queued one.
struct Packet {
    std::size_t cam_index = 0;
    SimTime arrival_ms = 0;
    int payload_bytes = 0;
    cam::TriggerCause cause = cam::TriggerCause::none;
    mob::Kinematics kin_at_trigger;
};

struct TxIntent {
    SidelinkResource resource;
    Sci sci;
    Packet packet;
    SimTime queue_delay_ms = 0;
    bool predicted = false;
    int predicted_ipt_ms = 0;
    bool predictor_cold = false;
};

struct MacActions {
    std::optional<TxIntent> tx;
    bool missed_opportunity = false;
    bool grant_broken = false;    // dissolved by grant breaking after a miss
    bool grant_completed = false; // c_resel exhausted at a transmission
    bool grant_expired = false;   // c_resel exhausted on silent misses (No-GB)
    std::optional<SelectionResult> selection;
    std::optional<Grant> grant_created;
};

// Per-vehicle MAC entity: grant lifecycle, dynamic grant, SCI emission and
// sensing bookkeeping. Owned exclusively by the event loop.
class MacEntity {
public:
    MacEntity() = default;
    MacEntity(VehicleId vehicle, const MacConfig& cfg, RngStream rng,
              pred::IptPredictor* predictor = nullptr)
        : vehicle_(vehicle), cfg_(cfg),
          win_(cfg.effective_sensing_window_ms(), cfg.num_subchannels), rng_(rng),
          predictor_(predictor) {}

    const MacConfig& config() const { return cfg_; }
    const SensingWindow& sensing() const { return win_; }
    const std::optional<Grant>& grant() const { return grant_; }
    bool queue_empty() const { return !queue_.has_value(); }

    bool on_packet(const Packet& p) {
        const bool replaced = queue_.has_value();
        queue_ = p;
        return replaced;
    }

    // Hook 3: grant maintenance and transmission for this subframe.
    MacActions on_subframe(SimTime now) {
        MacActions act;
        if (cfg_.mode == SchedulerMode::nr_dynamic) {
            dynamic_subframe(now, act);
            return act;
        }

        if (!grant_ && queue_) {
            const int rri = predictor_ ? predictor_->base_rri_ms(cfg_.default_rri_ms)
                                       : cfg_.default_rri_ms;
            GrantCreation gc = create_grant(win_, now, rri, cfg_, rng_);
            grant_ = gc.grant;
            act.selection = gc.selection;
            act.grant_created = gc.grant;
        }

        if (grant_ && now == grant_->next_tx) {
            if (queue_) {
                transmit(now, act);
            } else {
                act.missed_opportunity = true;
                if (cfg_.grant_breaking) {
                    grant_.reset();
                    act.grant_broken = true;
                } else {
                    grant_->c_resel -= 1;
                    if (grant_->c_resel <= 0) {
                        grant_.reset();
                        act.grant_expired = true;
                    } else {
                        grant_->next_tx = now + grant_->rri_ms;
                    }
                }
            }
        }
        return act;
    }

    // Hook 5: sensing update.
    void record_sensing(SimTime subframe, SimTime now,
                        const std::vector<phy::SensingMeasurement>& m) {
        win_.record(subframe, now, m);
    }
    void mark_own_tx(SimTime subframe, SimTime now) { win_.mark_own_tx(subframe, now); }

private:
    void transmit(SimTime now, MacActions& act) {
        Grant& g = *grant_;
        g.c_resel -= 1;

        bool relinquish = false;
        if (g.c_resel <= 0) {
            if (cfg_.keep_probability > 0.0 && rng_.uniform01() < cfg_.keep_probability) {
                g.c_resel = static_cast<int>(rng_.uniform_int(5, 15));
            } else {
                relinquish = true;
            }
        }

        TxIntent tx;
        tx.packet = *queue_;
        tx.queue_delay_ms = now - queue_->arrival_ms;
        tx.resource = g.resource_at(now);

        int advertised = g.rri_ms;
        if (predictor_) {
            cam::CamState ref;
            ref.last_tx = queue_->kin_at_trigger;
            ref.last_tx_time = queue_->arrival_ms;
            const pred::IptPrediction p =
                predictor_->predict(vehicle_, now, queue_->cam_index, ref);
            tx.predicted = true;
            tx.predicted_ipt_ms = p.predicted_ipt_ms;
            tx.predictor_cold = p.cold;
            advertised = pred::map_ipt_to_rri(p.predicted_ipt_ms, cfg_.allowed_rri_ms);
        }

        tx.sci.sender = vehicle_;
        tx.sci.priority = cfg_.sci_priority;
        tx.sci.reserved = tx.resource;
        tx.sci.rri_ms = relinquish ? 0 : advertised;

        if (relinquish) {
            grant_.reset();
            act.grant_completed = true;
        } else {
            // Predicted RRI moves only the subframe offset; the subchannels
            // and c_resel are untouched.
            g.next_tx = now + advertised;
        }

        queue_.reset();
        act.tx = tx;
    }

    void dynamic_subframe(SimTime now, MacActions& act) {
        if (queue_ && !pending_) {
            SelectionResult sel =
                select_resource(win_, now, cfg_.default_rri_ms, cfg_, rng_);
            pending_ = sel.choice;
            act.selection = sel;
        }
        if (pending_ && now == pending_->subframe) {
            TxIntent tx;
            tx.packet = *queue_;
            tx.queue_delay_ms = now - queue_->arrival_ms;
            tx.resource = *pending_;
            tx.sci.sender = vehicle_;
            tx.sci.priority = cfg_.sci_priority;
            tx.sci.reserved = tx.resource;
            tx.sci.rri_ms = 0; // single resource, no forward reservation
            queue_.reset();
            pending_.reset();
            act.tx = tx;
        }
    }

    VehicleId vehicle_ = 0;
    MacConfig cfg_;
    SensingWindow win_;
    RngStream rng_;
    pred::IptPredictor* predictor_ = nullptr;
    std::optional<Packet> queue_;
    std::optional<Grant> grant_;
    std::optional<SidelinkResource> pending_;
};

} // namespace v2x::mac
