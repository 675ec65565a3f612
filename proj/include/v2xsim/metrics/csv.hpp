#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "v2xsim/metrics/metrics.hpp"

namespace v2x::metrics {

// All floating-point fields print as %.17g: a persisted log reloads and
// recomputes every metric bit-exactly, and identical seeds yield identical
// bytes.

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    return out;
}

inline std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string f;
    std::stringstream ss(line);
    while (std::getline(ss, f, ',')) out.push_back(f);
    return out;
}

} // namespace detail

inline void write_pdr_csv(const PdrCurve& c, const std::string& path) {
    auto out = detail::open_out(path);
    out << "bin_lo_m,bin_hi_m,expected,delivered,pdr\n";
    for (const auto& b : c.bins)
        out << detail::fmt(b.lo) << ',' << detail::fmt(b.hi) << ',' << b.expected << ','
            << b.delivered << ',' << detail::fmt(b.pdr()) << '\n';
}

inline void write_summary_csv(const SummaryStats& s, const std::string& config_name,
                              const std::string& path) {
    auto out = detail::open_out(path);
    out << "config,cam_rate_ms,cam_rate_std,ipt_ms,ipt_std,delta_col,"
           "rri_error_ms,rri_error_std,predictions,inaccuracies,"
           "transmissions,missed_opportunities,grant_breaks,queue_drops,cold_predictions\n";
    out << config_name << ',' << detail::fmt(s.app.cam_rate_ms.mean) << ','
        << detail::fmt(s.app.cam_rate_ms.std_dev) << ',' << detail::fmt(s.app.mac_ipt_ms.mean)
        << ',' << detail::fmt(s.app.mac_ipt_ms.std_dev) << ',' << s.collisions << ','
        << detail::fmt(s.rri.error_ms.mean) << ',' << detail::fmt(s.rri.error_ms.std_dev)
        << ',' << s.rri.predictions << ',' << s.rri.inaccuracies << ',' << s.transmissions
        << ',' << s.missed_opportunities << ',' << s.grant_breaks << ',' << s.queue_drops
        << ',' << s.cold_predictions << '\n';
}

// Counts plus an overall-percentage view, rows = predicted RRI, columns =
// actual IPT class.
inline void write_confusion_csv(const ConfusionMatrix& m, const std::string& path) {
    auto out = detail::open_out(path);
    out << "predicted_rri_ms";
    for (int g : m.grid) out << ",actual_" << g;
    out << '\n';
    for (std::size_t i = 0; i < m.grid.size(); ++i) {
        out << m.grid[i];
        for (std::size_t j = 0; j < m.grid.size(); ++j) out << ',' << m.counts[i][j];
        out << '\n';
    }
    out << "percent_of_all_predictions\n";
    for (std::size_t i = 0; i < m.grid.size(); ++i) {
        out << m.grid[i];
        for (std::size_t j = 0; j < m.grid.size(); ++j) {
            const double pct =
                m.total > 0 ? 100.0 * static_cast<double>(m.counts[i][j]) / m.total : 0.0;
            out << ',' << detail::fmt(pct);
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Event-log persistence: one CSV per record type inside a directory.

inline void save_log(const EventLog& log, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        auto out = detail::open_out(dir + "/cams.csv");
        out << "vehicle,t_ms,cause,ipt_ms\n";
        for (const auto& r : log.cams)
            out << r.vehicle << ',' << r.t << ',' << cam::to_string(r.cause) << ','
                << r.ipt_ms << '\n';
    }
    {
        auto out = detail::open_out(dir + "/txs.csv");
        out << "vehicle,t_ms,subframe,first_subchannel,num_subchannels,sci_rri_ms,"
               "x_m,y_m,cam_t_ms,queue_delay_ms,predicted,predicted_ipt_ms,predictor_cold\n";
        for (const auto& r : log.txs)
            out << r.vehicle << ',' << r.t << ',' << r.subframe << ',' << r.first_subchannel
                << ',' << r.num_subchannels << ',' << r.sci_rri_ms << ','
                << detail::fmt(r.x) << ',' << detail::fmt(r.y) << ',' << r.cam_t << ','
                << r.queue_delay_ms << ',' << (r.predicted ? 1 : 0) << ','
                << r.predicted_ipt_ms << ',' << (r.predictor_cold ? 1 : 0) << '\n';
    }
    {
        auto out = detail::open_out(dir + "/rxs.csv");
        out << "t_ms,sender,receiver,distance_m,decoded,cause,sinr_db\n";
        for (const auto& r : log.rxs)
            out << r.t << ',' << r.sender << ',' << r.receiver << ','
                << detail::fmt(r.distance_m) << ',' << (r.decoded ? 1 : 0) << ','
                << phy::to_string(r.cause) << ',' << detail::fmt(r.sinr_db) << '\n';
    }
    {
        auto out = detail::open_out(dir + "/misses.csv");
        out << "vehicle,t_ms,grant_broken\n";
        for (const auto& r : log.misses)
            out << r.vehicle << ',' << r.t << ',' << (r.grant_broken ? 1 : 0) << '\n';
    }
    {
        auto out = detail::open_out(dir + "/grants.csv");
        out << "vehicle,t_ms,event,rri_ms,c_resel\n";
        for (const auto& r : log.grants)
            out << r.vehicle << ',' << r.t << ',' << to_string(r.event) << ',' << r.rri_ms
                << ',' << r.c_resel << '\n';
    }
    {
        auto out = detail::open_out(dir + "/selects.csv");
        out << "vehicle,t_ms,candidates,total,threshold_raises\n";
        for (const auto& r : log.selects)
            out << r.vehicle << ',' << r.t << ',' << r.candidates << ',' << r.total << ','
                << r.threshold_raises << '\n';
    }
    {
        auto out = detail::open_out(dir + "/predictions.csv");
        out << "vehicle,t_ms,predicted_ipt_ms,advertised_rri_ms,cold\n";
        for (const auto& r : log.predictions)
            out << r.vehicle << ',' << r.t << ',' << r.predicted_ipt_ms << ','
                << r.advertised_rri_ms << ',' << (r.cold ? 1 : 0) << '\n';
    }
    {
        auto out = detail::open_out(dir + "/queue_drops.csv");
        out << "vehicle,t_ms\n";
        for (const auto& r : log.queue_drops) out << r.vehicle << ',' << r.t << '\n';
    }
}

namespace detail {

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::string header;
    std::getline(in, header);
    return in;
}

} // namespace detail

inline EventLog load_log(const std::string& dir) {
    EventLog log;
    std::string line;
    {
        auto in = detail::open_in(dir + "/cams.csv");
        while (std::getline(in, line)) {
            const auto f = detail::split_row(line);
            if (f.size() != 4) throw ParseError("cams.csv: bad row '" + line + "'");
            log.cams.push_back({static_cast<VehicleId>(std::stoul(f[0])), std::stoll(f[1]),
                                cam::trigger_cause_from_string(f[2]), std::stoll(f[3])});
        }
    }
    {
        auto in = detail::open_in(dir + "/txs.csv");
        while (std::getline(in, line)) {
            const auto f = detail::split_row(line);
            if (f.size() != 13) throw ParseError("txs.csv: bad row '" + line + "'");
            log.txs.push_back({static_cast<VehicleId>(std::stoul(f[0])), std::stoll(f[1]),
                               std::stoll(f[2]), std::stoi(f[3]), std::stoi(f[4]),
                               std::stoi(f[5]), std::stod(f[6]), std::stod(f[7]),
                               std::stoll(f[8]), std::stoll(f[9]), f[10] == "1",
                               std::stoi(f[11]), f[12] == "1"});
        }
    }
    {
        auto in = detail::open_in(dir + "/rxs.csv");
        while (std::getline(in, line)) {
            const auto f = detail::split_row(line);
            if (f.size() != 7) throw ParseError("rxs.csv: bad row '" + line + "'");
            phy::FailureCause cause = phy::FailureCause::none;
            if (f[5] == "collision_sinr") cause = phy::FailureCause::collision_sinr;
            else if (f[5] == "propagation") cause = phy::FailureCause::propagation;
            else if (f[5] == "half_duplex") cause = phy::FailureCause::half_duplex;
            log.rxs.push_back({std::stoll(f[0]), static_cast<VehicleId>(std::stoul(f[1])),
                               static_cast<VehicleId>(std::stoul(f[2])), std::stod(f[3]),
                               f[4] == "1", cause, std::stod(f[6])});
        }
    }
    {
        auto in = detail::open_in(dir + "/misses.csv");
        while (std::getline(in, line)) {
            const auto f = detail::split_row(line);
            if (f.size() != 3) throw ParseError("misses.csv: bad row '" + line + "'");
            log.misses.push_back({static_cast<VehicleId>(std::stoul(f[0])), std::stoll(f[1]),
                                  f[2] == "1"});
        }
    }
    {
        auto in = detail::open_in(dir + "/grants.csv");
        while (std::getline(in, line)) {
            const auto f = detail::split_row(line);
            if (f.size() != 5) throw ParseError("grants.csv: bad row '" + line + "'");
            GrantEvent e = GrantEvent::created;
            if (f[2] == "completed") e = GrantEvent::completed;
            else if (f[2] == "broken") e = GrantEvent::broken;
            else if (f[2] == "expired") e = GrantEvent::expired;
            log.grants.push_back({static_cast<VehicleId>(std::stoul(f[0])), std::stoll(f[1]),
                                  e, std::stoi(f[3]), std::stoi(f[4])});
        }
    }
    {
        auto in = detail::open_in(dir + "/selects.csv");
        while (std::getline(in, line)) {
            const auto f = detail::split_row(line);
            if (f.size() != 5) throw ParseError("selects.csv: bad row '" + line + "'");
            log.selects.push_back({static_cast<VehicleId>(std::stoul(f[0])), std::stoll(f[1]),
                                   std::stoi(f[2]), std::stoi(f[3]), std::stoi(f[4])});
        }
    }
    {
        auto in = detail::open_in(dir + "/predictions.csv");
        while (std::getline(in, line)) {
            const auto f = detail::split_row(line);
            if (f.size() != 5) throw ParseError("predictions.csv: bad row '" + line + "'");
            log.predictions.push_back({static_cast<VehicleId>(std::stoul(f[0])),
                                       std::stoll(f[1]), std::stoi(f[2]), std::stoi(f[3]),
                                       f[4] == "1"});
        }
    }
    {
        auto in = detail::open_in(dir + "/queue_drops.csv");
        while (std::getline(in, line)) {
            const auto f = detail::split_row(line);
            if (f.size() != 2) throw ParseError("queue_drops.csv: bad row '" + line + "'");
            log.queue_drops.push_back(
                {static_cast<VehicleId>(std::stoul(f[0])), std::stoll(f[1])});
        }
    }
    return log;
}

} // namespace v2x::metrics
