#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "v2xsim/core/rng.hpp"
#include "v2xsim/core/time.hpp"
#include "v2xsim/mac/resource.hpp"

namespace v2x::phy {

inline constexpr double kRbBandwidthHz = 180e3;
inline constexpr double kThermalNoiseDbmPerHz = -174.0;

struct ChannelParams {
    double carrier_hz = 5.9e9;
    double bandwidth_hz = 10e6;
    int num_subchannels = 3;
    int subchannel_rbs = 16;
    double tx_power_dbm = 23.0;
    double noise_figure_db = 9.0;
    double shadow_sigma_db = 3.0;
    double decode_sinr_db = 3.0;      // hard step, MCS 6 (QPSK 0.5)
    double sensing_range_m = 1500.0;
    // Log-distance fit to the Winner+ B1 LOS branch at 5.9 GHz.
    double pl0_db = 41.7;
    double path_loss_exp = 2.27;
    double ref_distance_m = 1.0;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// PL(d) = PL0 + 10 n log10(d/d0); d below the reference distance clamps to d0.
inline double path_loss_db(const ChannelParams& p, double d_m) {
    if (d_m < p.ref_distance_m) d_m = p.ref_distance_m;
    return p.pl0_db + 10.0 * p.path_loss_exp * std::log10(d_m / p.ref_distance_m);
}

inline double rx_power_dbm(const ChannelParams& p, double tx_dbm, double d_m,
                           double shadowing_db) {
    return tx_dbm - path_loss_db(p, d_m) + shadowing_db;
}

inline double subchannel_bandwidth_hz(const ChannelParams& p) {
    return p.subchannel_rbs * kRbBandwidthHz;
}

// Thermal noise over the occupied subchannels plus the receiver noise figure.
inline double noise_floor_dbm(const ChannelParams& p, int occupied_subchannels) {
    const double bw = subchannel_bandwidth_hz(p) * occupied_subchannels;
    return kThermalNoiseDbmPerHz + 10.0 * std::log10(bw) + p.noise_figure_db;
}

inline double noise_floor_dbm(const ChannelParams& p) {
    return kThermalNoiseDbmPerHz + 10.0 * std::log10(p.bandwidth_hz) + p.noise_figure_db;
}

struct TxRecord {
    VehicleId sender = 0;
    mac::SidelinkResource resource;
    mac::Sci sci;
    double x = 0.0, y = 0.0;
};

enum class FailureCause { none, collision_sinr, propagation, half_duplex };

inline const char* to_string(FailureCause c) {
    switch (c) {
        case FailureCause::none: return "none";
        case FailureCause::collision_sinr: return "collision_sinr";
        case FailureCause::propagation: return "propagation";
        case FailureCause::half_duplex: return "half_duplex";
    }
    return "?";
}

struct RxOutcome {
    VehicleId receiver = 0;
    VehicleId sender = 0;
    bool decoded = false;
    FailureCause cause = FailureCause::none;
    double sinr_db = 0.0;
    double distance_m = 0.0;
};

// One sensed subchannel in one subframe. RSSI is the total received energy,
// RSRP the decoded sender's power; the SCI rides along iff its transmission
// decoded.
struct SensingMeasurement {
    int subchannel = 0;
    double rssi_dbm = 0.0;
    bool has_sci = false;
    double rsrp_dbm = 0.0;
    mac::Sci sci;
};

struct ReceiverState {
    VehicleId id = 0;
    double x = 0.0, y = 0.0;
    bool transmitting = false;
};

struct SubframeResolution {
    std::vector<RxOutcome> outcomes;
    // Parallel to the receivers argument; empty for transmitting receivers.
    std::vector<std::vector<SensingMeasurement>> sensing;
};

// Resolve all transmissions of one subframe against all receivers: SINR with
// co-channel interference summed in the linear domain, half-duplex, and the
// per-subchannel sensing measurements every listening vehicle records.
// Shadowing is a deterministic symmetric draw per (vehicle pair, subframe).
inline SubframeResolution resolve_subframe(const ChannelParams& p,
                                           const std::vector<TxRecord>& txs,
                                           const std::vector<ReceiverState>& receivers,
                                           std::uint64_t channel_seed, SimTime subframe) {
    SubframeResolution res;
    res.sensing.resize(receivers.size());

    const double noise_sub_mw = dbm_to_mw(noise_floor_dbm(p, 1));

    std::vector<double> rx_mw(txs.size());
    std::vector<double> dist(txs.size());
    std::vector<std::size_t> decoded_tx(txs.size()); // scratch, per receiver
    for (std::size_t ri = 0; ri < receivers.size(); ++ri) {
        const ReceiverState& rcv = receivers[ri];

        bool any_in_range = false;
        for (std::size_t ti = 0; ti < txs.size(); ++ti) {
            const TxRecord& tx = txs[ti];
            rx_mw[ti] = 0.0;
            if (tx.sender == rcv.id) continue;
            const double d = std::hypot(tx.x - rcv.x, tx.y - rcv.y);
            dist[ti] = d;
            if (d > p.sensing_range_m) continue;
            const std::uint64_t lo = std::min<std::uint64_t>(tx.sender, rcv.id);
            const std::uint64_t hi = std::max<std::uint64_t>(tx.sender, rcv.id);
            const double shadow =
                p.shadow_sigma_db *
                keyed_gaussian(channel_seed, lo, hi, static_cast<std::uint64_t>(subframe));
            rx_mw[ti] = dbm_to_mw(rx_power_dbm(p, p.tx_power_dbm, d, shadow));
            any_in_range = true;
        }

        std::size_t n_decoded = 0;
        for (std::size_t ti = 0; ti < txs.size(); ++ti) {
            const TxRecord& tx = txs[ti];
            if (tx.sender == rcv.id || rx_mw[ti] <= 0.0) continue;
            RxOutcome out;
            out.receiver = rcv.id;
            out.sender = tx.sender;
            out.distance_m = dist[ti];
            if (rcv.transmitting) {
                out.decoded = false;
                out.cause = FailureCause::half_duplex;
                out.sinr_db = -std::numeric_limits<double>::infinity();
                res.outcomes.push_back(out);
                continue;
            }
            double interference_mw = 0.0;
            for (std::size_t oi = 0; oi < txs.size(); ++oi) {
                if (oi == ti || rx_mw[oi] <= 0.0) continue;
                if (txs[oi].resource.subchannels_overlap(tx.resource))
                    interference_mw += rx_mw[oi];
            }
            const double noise_mw = noise_sub_mw * tx.resource.num_subchannels;
            out.sinr_db = mw_to_dbm(rx_mw[ti] / (interference_mw + noise_mw));
            out.decoded = out.sinr_db >= p.decode_sinr_db;
            if (out.decoded) {
                out.cause = FailureCause::none;
                decoded_tx[n_decoded++] = ti;
            } else if (interference_mw > 0.0 &&
                       mw_to_dbm(rx_mw[ti] / noise_mw) >= p.decode_sinr_db) {
                out.cause = FailureCause::collision_sinr;
            } else {
                out.cause = FailureCause::propagation;
            }
            res.outcomes.push_back(out);
        }

        if (rcv.transmitting) continue; // half-duplex: nothing sensed this subframe

        auto& meas = res.sensing[ri];
        meas.resize(p.num_subchannels);
        for (int c = 0; c < p.num_subchannels; ++c) {
            meas[c].subchannel = c;
            double total_mw = noise_sub_mw;
            if (any_in_range) {
                for (std::size_t ti = 0; ti < txs.size(); ++ti)
                    if (rx_mw[ti] > 0.0 && txs[ti].resource.covers_subchannel(c))
                        total_mw += rx_mw[ti];
            }
            meas[c].rssi_dbm = mw_to_dbm(total_mw);
        }
        for (std::size_t k = 0; k < n_decoded; ++k) {
            const TxRecord& tx = txs[decoded_tx[k]];
            for (int c = tx.resource.first_subchannel; c < tx.resource.end_subchannel(); ++c) {
                meas[c].has_sci = true;
                meas[c].sci = tx.sci;
                meas[c].rsrp_dbm = mw_to_dbm(rx_mw[decoded_tx[k]]);
            }
        }
    }
    return res;
}

} // namespace v2x::phy
