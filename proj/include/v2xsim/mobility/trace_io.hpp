#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "v2xsim/mobility/kinematics.hpp"

namespace v2x::mob {

// Trace CSV columns. Rows must be sorted by (vehicle_id, t_ms).
inline constexpr const char* kTraceCsvHeader =
    "vehicle_id,t_ms,x_m,y_m,speed_mps,heading_deg";

struct ImportResult {
    std::vector<Trace> traces;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

inline double parse_double(const std::string& s, int row, const char* col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("trace csv row " + std::to_string(row) + ": bad " +
                         std::string(col) + " value '" + s + "'");
    }
}

inline long long parse_ll(const std::string& s, int row, const char* col) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("trace csv row " + std::to_string(row) + ": bad " +
                         std::string(col) + " value '" + s + "'");
    }
}

} // namespace detail

// Import raw rows (any sampling period) and resample each vehicle onto the
// absolute 100 ms grid: linear x/y/speed, shortest-arc heading. Gaps longer
// than 1 s are rejected so interpolation never invents motion.
inline ImportResult import_trace(std::istream& in) {
    ImportResult result;
    std::string line;
    int row = 0;
    if (!std::getline(in, line)) {
        result.warnings.push_back("trace csv: empty file, no traces imported");
        return result;
    }
    ++row;
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != kTraceCsvHeader)
        throw ParseError("trace csv row 1: expected header '" +
                         std::string(kTraceCsvHeader) + "', got '" + line + "'");

    struct RawRow {
        SimTime t;
        Kinematics kin;
    };
    std::map<VehicleId, std::vector<Kinematics>> raw;
    VehicleId prev_vehicle = 0;
    SimTime prev_t = 0;
    bool have_prev = false;

    while (std::getline(in, line)) {
        ++row;
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = detail::split_csv_row(line);
        if (f.size() != 6)
            throw ParseError("trace csv row " + std::to_string(row) +
                             ": expected 6 columns, got " + std::to_string(f.size()));
        Kinematics k;
        const long long vid = detail::parse_ll(f[0], row, "vehicle_id");
        if (vid < 0)
            throw ParseError("trace csv row " + std::to_string(row) + ": negative vehicle_id");
        k.t = detail::parse_ll(f[1], row, "t_ms");
        k.x = detail::parse_double(f[2], row, "x_m");
        k.y = detail::parse_double(f[3], row, "y_m");
        k.speed = detail::parse_double(f[4], row, "speed_mps");
        k.heading = normalize_heading(detail::parse_double(f[5], row, "heading_deg"));
        if (k.speed < 0.0)
            throw ParseError("trace csv row " + std::to_string(row) + ": negative speed");
        const VehicleId v = static_cast<VehicleId>(vid);
        if (have_prev && (v < prev_vehicle || (v == prev_vehicle && k.t <= prev_t)))
            throw ParseError("trace csv row " + std::to_string(row) +
                             ": rows not sorted by (vehicle_id, t_ms)");
        if (have_prev && v == prev_vehicle && k.t - prev_t > 1000)
            throw ParseError("trace csv row " + std::to_string(row) + ": gap of " +
                             std::to_string(k.t - prev_t) + " ms exceeds 1 s");
        prev_vehicle = v;
        prev_t = k.t;
        have_prev = true;
        raw[v].push_back(k);
    }

    for (auto& [vid, rows] : raw) {
        const SimTime grid_begin = ((rows.front().t + kGridMs - 1) / kGridMs) * kGridMs;
        const SimTime grid_end = (rows.back().t / kGridMs) * kGridMs;
        if (grid_end < grid_begin) {
            result.warnings.push_back("vehicle " + std::to_string(vid) +
                                      ": span too short for the 100 ms grid, skipped");
            continue;
        }
        Trace tr;
        tr.vehicle = vid;
        std::size_t hi = 1;
        for (SimTime t = grid_begin; t <= grid_end; t += kGridMs) {
            while (hi < rows.size() && rows[hi].t < t) ++hi;
            Kinematics out;
            out.t = t;
            if (rows.size() == 1 || rows[hi > 0 ? hi - 1 : 0].t == t) {
                const auto& s = rows[hi > 0 ? hi - 1 : 0];
                out.x = s.x;
                out.y = s.y;
                out.speed = s.speed;
                out.heading = s.heading;
            } else {
                const auto& a = rows[hi - 1];
                const auto& b = rows[hi];
                const double f = static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
                out.x = a.x + (b.x - a.x) * f;
                out.y = a.y + (b.y - a.y) * f;
                out.speed = a.speed + (b.speed - a.speed) * f;
                out.heading = heading_lerp(a.heading, b.heading, f);
            }
            tr.samples.push_back(out);
        }
        result.traces.push_back(std::move(tr));
    }
    return result;
}

inline ImportResult import_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trace csv '" + path + "'");
    return import_trace(in);
}

// %.17g so grid samples survive an export/import round trip bit-exactly.
inline void export_trace(const std::vector<Trace>& traces, std::ostream& out) {
    out << kTraceCsvHeader << "\n";
    char buf[256];
    for (const auto& tr : traces) {
        for (const auto& k : tr.samples) {
            std::snprintf(buf, sizeof(buf), "%u,%lld,%.17g,%.17g,%.17g,%.17g\n",
                          tr.vehicle, static_cast<long long>(k.t), k.x, k.y, k.speed,
                          k.heading);
            out << buf;
        }
    }
}

inline void export_trace(const std::vector<Trace>& traces, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write trace csv '" + path + "'");
    export_trace(traces, out);
}

} // namespace v2x::mob
