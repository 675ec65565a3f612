#pragma once

#include <vector>

#include "v2xsim/core/error.hpp"
#include "v2xsim/mac/resource.hpp"
#include "v2xsim/phy/channel.hpp"

namespace v2x::mac {

// Ring of per-(subframe, subchannel) measurements spanning the configured
// sensing duration behind now. Entries older than the window fall out by
// being overwritten; reads validate the stored stamp.
class SensingWindow {
public:
    SensingWindow() = default;
    SensingWindow(int window_ms, int num_subchannels)
        : window_ms_(window_ms), num_subchannels_(num_subchannels),
          ring_(static_cast<std::size_t>(window_ms)) {
        for (auto& e : ring_) e.cells.resize(num_subchannels_);
    }

    int window_ms() const { return window_ms_; }
    int num_subchannels() const { return num_subchannels_; }

    struct Cell {
        double rssi_dbm = 0.0;
        bool has_sci = false;
        double rsrp_dbm = 0.0;
        Sci sci;
    };

    struct Entry {
        SimTime subframe = -1;
        bool own_tx = false;
        std::vector<Cell> cells;
    };

    // Record the listening measurements of one subframe.
    void record(SimTime subframe, SimTime now,
                const std::vector<phy::SensingMeasurement>& measurements) {
        if (subframe > now)
            throw QueryError("sensing window: rejected future-stamped entry");
        Entry& e = slot(subframe);
        e.subframe = subframe;
        e.own_tx = false;
        for (const auto& m : measurements) {
            if (m.subchannel < 0 || m.subchannel >= num_subchannels_) continue;
            Cell& c = e.cells[m.subchannel];
            c.rssi_dbm = m.rssi_dbm;
            c.has_sci = m.has_sci;
            c.rsrp_dbm = m.rsrp_dbm;
            c.sci = m.sci;
        }
    }

    // Half-duplex: a subframe spent transmitting was not monitored.
    void mark_own_tx(SimTime subframe, SimTime now) {
        if (subframe > now)
            throw QueryError("sensing window: rejected future-stamped entry");
        Entry& e = slot(subframe);
        e.subframe = subframe;
        e.own_tx = true;
        for (auto& c : e.cells) c = Cell{};
    }

    // Entry for a past subframe, or nullptr if unrecorded / evicted.
    const Entry* at(SimTime subframe, SimTime now) const {
        if (subframe >= now || subframe < now - window_ms_ || subframe < 0) return nullptr;
        const Entry& e = ring_[static_cast<std::size_t>(subframe % window_ms_)];
        return e.subframe == subframe ? &e : nullptr;
    }

    std::size_t valid_entries(SimTime now) const {
        std::size_t n = 0;
        for (SimTime s = now - window_ms_; s < now; ++s)
            if (at(s, now)) ++n;
        return n;
    }

private:
    Entry& slot(SimTime subframe) {
        return ring_[static_cast<std::size_t>(subframe % window_ms_)];
    }

    int window_ms_ = 1000;
    int num_subchannels_ = 3;
    std::vector<Entry> ring_;
};

} // namespace v2x::mac
