#pragma once

#include <algorithm>

#include "v2xsim/core/time.hpp"

namespace v2x::mac {

// A candidate single-subframe resource: one or more contiguous subchannels
// within one 1 ms subframe.
struct SidelinkResource {
    SimTime subframe = 0;
    int first_subchannel = 0;
    int num_subchannels = 1;

    int end_subchannel() const { return first_subchannel + num_subchannels; }

    bool subchannels_overlap(const SidelinkResource& o) const {
        return first_subchannel < o.end_subchannel() && o.first_subchannel < end_subchannel();
    }

    bool covers_subchannel(int c) const {
        return c >= first_subchannel && c < end_subchannel();
    }

    bool operator==(const SidelinkResource& o) const {
        return subframe == o.subframe && first_subchannel == o.first_subchannel &&
               num_subchannels == o.num_subchannels;
    }
};

// Sidelink Control Information: advertised with every transmission. rri = 0
// relinquishes the reservation.
struct Sci {
    VehicleId sender = 0;
    int rri_ms = 0;
    SidelinkResource reserved;
    int priority = 0;
};

// A live semi-persistent reservation. c_resel is decremented once per
// transmission opportunity; the grant dissolves when it reaches zero.
struct Grant {
    int first_subchannel = 0;
    int num_subchannels = 1;
    SimTime next_tx = 0;
    int rri_ms = 100;
    int c_resel = 0;

    SidelinkResource resource_at(SimTime subframe) const {
        return {subframe, first_subchannel, num_subchannels};
    }
};

} // namespace v2x::mac
