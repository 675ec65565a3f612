#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "v2xsim/core/event_log.hpp"
#include "v2xsim/predictor/predictor.hpp"

namespace v2x::metrics {

struct MeanStd {
    double mean = 0.0;
    double std_dev = 0.0; // population
    std::size_t n = 0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd s;
    s.n = xs.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(s.n);
    double sq = 0.0;
    for (double x : xs) sq += (x - s.mean) * (x - s.mean);
    s.std_dev = std::sqrt(sq / static_cast<double>(s.n));
    return s;
}

struct PdrBin {
    double lo = 0.0, hi = 0.0;
    long expected = 0;
    long delivered = 0;
    double pdr() const { return expected > 0 ? static_cast<double>(delivered) / expected : 0.0; }
};

struct PdrCurve {
    double bin_width = 50.0;
    double max_range = 500.0;
    std::vector<PdrBin> bins; // only bins with expected > 0
};

// Delivered/expected per distance bin over every logged reception chance;
// half-duplex losses count against delivery.
inline PdrCurve pdr_by_distance(const EventLog& log, double bin_width = 50.0,
                                double max_range = 500.0) {
    PdrCurve curve;
    curve.bin_width = bin_width;
    curve.max_range = max_range;
    const std::size_t n = static_cast<std::size_t>(max_range / bin_width);
    std::vector<PdrBin> all(n);
    for (std::size_t i = 0; i < n; ++i) {
        all[i].lo = bin_width * static_cast<double>(i);
        all[i].hi = bin_width * static_cast<double>(i + 1);
    }
    for (const auto& rx : log.rxs) {
        if (rx.distance_m > max_range) continue;
        std::size_t b = static_cast<std::size_t>(rx.distance_m / bin_width);
        if (b >= n) b = n - 1; // exactly max_range
        ++all[b].expected;
        if (rx.decoded) ++all[b].delivered;
    }
    for (const auto& b : all)
        if (b.expected > 0) curve.bins.push_back(b);
    return curve;
}

// Transmissions experiencing co-resource interference from a sender within
// range. Counts experiencing transmissions (both parties of an overlap);
// pairwise_events instead counts each overlapping pair once.
inline long delta_col(const EventLog& log, double range_m = 500.0,
                      bool pairwise_events = false) {
    std::map<SimTime, std::vector<std::size_t>> by_subframe;
    for (std::size_t i = 0; i < log.txs.size(); ++i)
        by_subframe[log.txs[i].t].push_back(i);

    long count = 0;
    std::vector<char> hit;
    for (const auto& [sf, idxs] : by_subframe) {
        if (idxs.size() < 2) continue;
        hit.assign(idxs.size(), 0);
        for (std::size_t a = 0; a < idxs.size(); ++a) {
            const auto& ta = log.txs[idxs[a]];
            for (std::size_t b = a + 1; b < idxs.size(); ++b) {
                const auto& tb = log.txs[idxs[b]];
                const bool overlap =
                    ta.first_subchannel < tb.first_subchannel + tb.num_subchannels &&
                    tb.first_subchannel < ta.first_subchannel + ta.num_subchannels;
                if (!overlap) continue;
                const double d = std::hypot(ta.x - tb.x, ta.y - tb.y);
                if (d > range_m) continue;
                if (pairwise_events) ++count;
                else {
                    hit[a] = 1;
                    hit[b] = 1;
                }
            }
        }
        if (!pairwise_events)
            for (char h : hit) count += h;
    }
    return count;
}

struct CamIptStats {
    MeanStd cam_rate_ms; // application trigger intervals
    MeanStd mac_ipt_ms;  // realized MAC transmission intervals
};

inline CamIptStats cam_ipt_stats(const EventLog& log) {
    std::vector<double> cam_intervals;
    for (const auto& c : log.cams)
        if (c.ipt_ms > 0) cam_intervals.push_back(static_cast<double>(c.ipt_ms));

    std::map<VehicleId, SimTime> last_tx;
    std::vector<double> mac_intervals;
    for (const auto& tx : log.txs) {
        auto it = last_tx.find(tx.vehicle);
        if (it != last_tx.end())
            mac_intervals.push_back(static_cast<double>(tx.t - it->second));
        last_tx[tx.vehicle] = tx.t;
    }
    return {mean_std(cam_intervals), mean_std(mac_intervals)};
}

struct RriStats {
    MeanStd error_ms; // advertised RRI - realized next IPT
    long predictions = 0;
    long inaccuracies = 0; // advertised != realized
};

struct ConfusionMatrix {
    std::vector<int> grid; // RRI classes, ascending
    std::vector<std::vector<long>> counts; // [predicted][actual]
    long total = 0;

    long diagonal() const {
        long d = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) d += counts[i][i];
        return d;
    }
    double accuracy() const {
        return total > 0 ? static_cast<double>(diagonal()) / static_cast<double>(total) : 0.0;
    }
};

namespace detail {

inline std::size_t grid_index(const std::vector<int>& grid, int value) {
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] == value) return i;
    return grid.size();
}

// Per-vehicle transmission sequences in log order.
inline std::map<VehicleId, std::vector<std::size_t>> tx_by_vehicle(const EventLog& log) {
    std::map<VehicleId, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < log.txs.size(); ++i)
        out[log.txs[i].vehicle].push_back(i);
    return out;
}

} // namespace detail

// Advertised-RRI accuracy against the realized MAC inter-transmission time.
// The final SCI of a grant (rri = 0) and the run's trailing transmission are
// excluded: neither advertises a judgeable reservation.
inline RriStats rri_error(const EventLog& log) {
    RriStats stats;
    std::vector<double> errors;
    for (const auto& [v, idxs] : detail::tx_by_vehicle(log)) {
        for (std::size_t k = 0; k + 1 < idxs.size(); ++k) {
            const auto& tx = log.txs[idxs[k]];
            if (tx.sci_rri_ms <= 0) continue;
            const SimTime realized = log.txs[idxs[k + 1]].t - tx.t;
            errors.push_back(static_cast<double>(tx.sci_rri_ms) -
                             static_cast<double>(realized));
            ++stats.predictions;
            if (tx.sci_rri_ms != realized) ++stats.inaccuracies;
        }
    }
    stats.error_ms = mean_std(errors);
    return stats;
}

inline ConfusionMatrix confusion(const EventLog& log,
                                 const std::vector<int>& grid = {100, 200, 300, 400, 500, 600,
                                                                 700, 800, 900, 1000}) {
    ConfusionMatrix m;
    m.grid = grid;
    m.counts.assign(grid.size(), std::vector<long>(grid.size(), 0));
    for (const auto& [v, idxs] : detail::tx_by_vehicle(log)) {
        for (std::size_t k = 0; k + 1 < idxs.size(); ++k) {
            const auto& tx = log.txs[idxs[k]];
            if (tx.sci_rri_ms <= 0) continue;
            const SimTime realized = log.txs[idxs[k + 1]].t - tx.t;
            const std::size_t p = detail::grid_index(grid, tx.sci_rri_ms);
            const std::size_t a = detail::grid_index(
                grid, pred::map_ipt_to_rri(static_cast<double>(realized), grid));
            if (p >= grid.size() || a >= grid.size()) continue;
            ++m.counts[p][a];
            ++m.total;
        }
    }
    return m;
}

// One-row scenario summary.
struct SummaryStats {
    CamIptStats app;
    long collisions = 0;
    RriStats rri;
    long missed_opportunities = 0;
    long grant_breaks = 0;
    long queue_drops = 0;
    long cold_predictions = 0;
    long transmissions = 0;
};

inline SummaryStats summarize(const EventLog& log, double col_range_m = 500.0) {
    SummaryStats s;
    s.app = cam_ipt_stats(log);
    s.collisions = delta_col(log, col_range_m);
    s.rri = rri_error(log);
    for (const auto& m : log.misses) {
        ++s.missed_opportunities;
        if (m.grant_broken) ++s.grant_breaks;
    }
    s.queue_drops = static_cast<long>(log.queue_drops.size());
    for (const auto& p : log.predictions)
        if (p.cold) ++s.cold_predictions;
    s.transmissions = static_cast<long>(log.txs.size());
    return s;
}

} // namespace v2x::metrics
