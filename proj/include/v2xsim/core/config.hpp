#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "v2xsim/cam/trigger.hpp"
#include "v2xsim/core/error.hpp"
#include "v2xsim/mac/sps.hpp"
#include "v2xsim/mobility/generators.hpp"
#include "v2xsim/phy/channel.hpp"

namespace v2x {

enum class TrafficMode { etsi, periodic, hybrid };

inline const char* to_string(TrafficMode m) {
    switch (m) {
        case TrafficMode::etsi: return "etsi";
        case TrafficMode::periodic: return "periodic";
        case TrafficMode::hybrid: return "hybrid";
    }
    return "?";
}

enum class PredictorKind { none, periodic, mean_ipt, oracle, gru };

inline const char* to_string(PredictorKind k) {
    switch (k) {
        case PredictorKind::none: return "none";
        case PredictorKind::periodic: return "periodic";
        case PredictorKind::mean_ipt: return "mean-ipt";
        case PredictorKind::oracle: return "oracle";
        case PredictorKind::gru: return "gru";
    }
    return "?";
}

enum class ScenarioKind { straight, curved, import };

struct ApplicationConfig {
    int packet_bytes = 190;
    TrafficMode traffic = TrafficMode::etsi;
    double periodic_fraction = 0.5; // hybrid share of periodic vehicles
    SimTime period_ms = 0;          // 0 = match the scenario-mean ETSI rate
};

struct PredictorConfig {
    PredictorKind kind = PredictorKind::none;
    int periodic_rri_ms = 300;
    std::string gru_speed_weights;
    std::string gru_sine_weights;
    std::string gru_cosine_weights;
    double max_speed_mps = 50.0; // speed normalization bound
};

struct ScenarioGenConfig {
    ScenarioKind kind = ScenarioKind::straight;
    mob::StraightParams straight;
    mob::CurvedParams curved;
    std::string trace_csv;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    SimTime duration_ms = 60000;
    phy::ChannelParams channel;
    ApplicationConfig app;
    mac::MacConfig mac;
    cam::Thresholds cam;
    PredictorConfig predictor;
    ScenarioGenConfig scenario;
    // Hybrid traffic: periodic vehicles keep SB-SPS grants (advertising their
    // RRI) while aperiodic vehicles use the dynamic grant. Clearing this runs
    // every vehicle on the configured mac.mode instead.
    bool hybrid_sps_for_periodic = true;

    void validate() const {
        if (duration_ms <= 0) throw ConfigError("config: duration must be > 0");
        mac::MacConfig m = mac;
        m.num_subchannels = channel.num_subchannels;
        m.validate();
        if (duration_ms <= m.effective_sensing_window_ms())
            throw ConfigError("config: duration must exceed the sensing window");
        if (app.traffic != TrafficMode::etsi && app.period_ms != 0) {
            if (app.period_ms % kGridMs != 0 || !m.rri_allowed(static_cast<int>(app.period_ms)))
                throw ConfigError("config: periodic traffic period must be an allowed RRI");
        }
        if (app.periodic_fraction < 0.0 || app.periodic_fraction > 1.0)
            throw ConfigError("config: hybrid periodic fraction out of [0, 1]");
        if (predictor.kind == PredictorKind::periodic &&
            !m.rri_allowed(predictor.periodic_rri_ms))
            throw ConfigError("config: periodic predictor RRI not in the allowed set");
        if (predictor.max_speed_mps <= 0.0)
            throw ConfigError("config: predictor max speed must be > 0");
        if (channel.shadow_sigma_db < 0.0)
            throw ConfigError("config: shadowing sigma must be >= 0");
    }
};

// ---------------------------------------------------------------------------
// Flat key = value scenario file. '#' starts a comment; keys mirror the
// structs above (see README for the full list).

namespace detail {

class KeyValueFile {
public:
    explicit KeyValueFile(std::istream& in) {
        std::string line;
        int row = 0;
        while (std::getline(in, line)) {
            ++row;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                if (line.find_first_not_of(" \t\r") != std::string::npos)
                    throw ParseError("config line " + std::to_string(row) +
                                     ": expected 'key = value'");
                continue;
            }
            values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& dflt) const {
        auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }

    double num(const std::string& key, double dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(it->second);
            return v;
        } catch (const std::exception&) {
            throw ParseError("config key '" + key + "': bad number '" + it->second + "'");
        }
    }

    long long integer(const std::string& key, long long dflt) const {
        const double v = num(key, static_cast<double>(dflt));
        return static_cast<long long>(v);
    }

    bool boolean(const std::string& key, bool dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ParseError("config key '" + key + "': expected true/false");
    }

    std::vector<double> num_list(const std::string& key, std::vector<double> dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                out.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ParseError("config key '" + key + "': bad list entry '" + item + "'");
            }
        }
        if (out.empty()) throw ParseError("config key '" + key + "': empty list");
        return out;
    }

    void apply_override(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos)
            throw ParseError("override '" + assignment + "': expected key=value");
        values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
    }

private:
    static std::string trim(std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
};

} // namespace detail

inline ScenarioConfig parse_scenario_config(std::istream& in,
                                            const std::vector<std::string>& overrides = {}) {
    detail::KeyValueFile kv(in);
    for (const auto& o : overrides) kv.apply_override(o);

    ScenarioConfig c;
    c.seed = static_cast<std::uint64_t>(kv.integer("seed", 1));
    c.duration_ms = kv.integer("duration_ms", 60000);

    c.channel.carrier_hz = kv.num("channel.carrier_hz", c.channel.carrier_hz);
    c.channel.bandwidth_hz = kv.num("channel.bandwidth_hz", c.channel.bandwidth_hz);
    c.channel.num_subchannels =
        static_cast<int>(kv.integer("channel.num_subchannels", c.channel.num_subchannels));
    c.channel.subchannel_rbs =
        static_cast<int>(kv.integer("channel.subchannel_rbs", c.channel.subchannel_rbs));
    c.channel.tx_power_dbm = kv.num("phy.tx_power_dbm", c.channel.tx_power_dbm);
    c.channel.noise_figure_db = kv.num("phy.noise_figure_db", c.channel.noise_figure_db);
    c.channel.shadow_sigma_db = kv.num("phy.shadow_sigma_db", c.channel.shadow_sigma_db);
    c.channel.decode_sinr_db = kv.num("phy.decode_sinr_db", c.channel.decode_sinr_db);
    c.channel.sensing_range_m = kv.num("phy.sensing_range_m", c.channel.sensing_range_m);
    c.channel.pl0_db = kv.num("phy.pl0_db", c.channel.pl0_db);
    c.channel.path_loss_exp = kv.num("phy.path_loss_exp", c.channel.path_loss_exp);
    c.channel.ref_distance_m = kv.num("phy.ref_distance_m", c.channel.ref_distance_m);

    c.app.packet_bytes = static_cast<int>(kv.integer("app.packet_bytes", c.app.packet_bytes));
    const std::string traffic = kv.str("app.traffic", "etsi");
    if (traffic == "etsi") c.app.traffic = TrafficMode::etsi;
    else if (traffic == "periodic") c.app.traffic = TrafficMode::periodic;
    else if (traffic == "hybrid") c.app.traffic = TrafficMode::hybrid;
    else throw ParseError("config: unknown app.traffic '" + traffic + "'");
    c.app.periodic_fraction = kv.num("app.periodic_fraction", c.app.periodic_fraction);
    c.app.period_ms = kv.integer("app.period_ms", 0);

    const std::string mode = kv.str("mac.mode", "nr-sps");
    if (mode == "cv2x-sps") c.mac.mode = mac::SchedulerMode::cv2x_sps;
    else if (mode == "nr-sps") c.mac.mode = mac::SchedulerMode::nr_sps;
    else if (mode == "nr-dynamic") c.mac.mode = mac::SchedulerMode::nr_dynamic;
    else throw ParseError("config: unknown mac.mode '" + mode + "'");
    c.mac.grant_breaking = kv.boolean("mac.grant_breaking", false);
    c.mac.keep_probability = kv.num("mac.keep_probability", 0.0);
    c.mac.rsrp_threshold_dbm = kv.num("mac.rsrp_threshold_dbm", -126.0);
    c.mac.sensing_window_ms =
        static_cast<int>(kv.integer("mac.sensing_window_ms", 0));
    c.mac.t1_ms = static_cast<int>(kv.integer("mac.t1_ms", 4));
    c.mac.t2_ms = static_cast<int>(kv.integer("mac.t2_ms", 100));
    {
        std::vector<double> rris = kv.num_list("mac.allowed_rri_ms",
                                               {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000});
        c.mac.allowed_rri_ms.clear();
        for (double r : rris) c.mac.allowed_rri_ms.push_back(static_cast<int>(r));
    }
    c.mac.default_rri_ms = static_cast<int>(kv.integer("mac.default_rri_ms", 100));
    c.mac.grant_subchannels =
        static_cast<int>(kv.integer("mac.grant_subchannels", 1));
    c.mac.num_subchannels = c.channel.num_subchannels;
    c.hybrid_sps_for_periodic = kv.boolean("mac.hybrid_sps_for_periodic", true);

    c.cam.position_m = kv.num("cam.position_threshold_m", 4.0);
    c.cam.heading_deg = kv.num("cam.heading_threshold_deg", 4.0);
    c.cam.speed_mps = kv.num("cam.speed_threshold_mps", 4.0);
    c.cam.max_interval_ms = kv.integer("cam.max_interval_ms", 1000);

    const std::string pk = kv.str("predictor.kind", "none");
    if (pk == "none") c.predictor.kind = PredictorKind::none;
    else if (pk == "periodic") c.predictor.kind = PredictorKind::periodic;
    else if (pk == "mean-ipt") c.predictor.kind = PredictorKind::mean_ipt;
    else if (pk == "oracle") c.predictor.kind = PredictorKind::oracle;
    else if (pk == "gru") c.predictor.kind = PredictorKind::gru;
    else throw ParseError("config: unknown predictor.kind '" + pk + "'");
    c.predictor.periodic_rri_ms =
        static_cast<int>(kv.integer("predictor.periodic_rri_ms", 300));
    c.predictor.gru_speed_weights = kv.str("predictor.gru_speed_weights", "");
    c.predictor.gru_sine_weights = kv.str("predictor.gru_sine_weights", "");
    c.predictor.gru_cosine_weights = kv.str("predictor.gru_cosine_weights", "");
    c.predictor.max_speed_mps = kv.num("predictor.max_speed_mps", 50.0);

    const std::string sk = kv.str("scenario.kind", "straight");
    if (sk == "straight") c.scenario.kind = ScenarioKind::straight;
    else if (sk == "curved") c.scenario.kind = ScenarioKind::curved;
    else if (sk == "import") c.scenario.kind = ScenarioKind::import;
    else throw ParseError("config: unknown scenario.kind '" + sk + "'");

    c.scenario.straight.lanes = static_cast<int>(kv.integer("scenario.lanes", 2));
    c.scenario.straight.vehicles_per_lane =
        static_cast<int>(kv.integer("scenario.vehicles_per_lane", 10));
    c.scenario.straight.spacing_m = kv.num("scenario.spacing_m", 25.0);
    c.scenario.straight.lane_speeds_mps =
        kv.num_list("scenario.lane_speeds_mps", {20.0, 23.0});
    c.scenario.straight.lane_width_m = kv.num("scenario.lane_width_m", 4.0);
    c.scenario.straight.opposing_lanes = kv.boolean("scenario.opposing_lanes", false);
    c.scenario.straight.duration_ms = c.duration_ms;

    c.scenario.curved.radius_m = kv.num("scenario.radius_m", 300.0);
    c.scenario.curved.arc_deg = kv.num("scenario.arc_deg", 360.0);
    c.scenario.curved.lanes = c.scenario.straight.lanes;
    c.scenario.curved.vehicles_per_lane = c.scenario.straight.vehicles_per_lane;
    c.scenario.curved.lane_speeds_mps = c.scenario.straight.lane_speeds_mps;
    c.scenario.curved.lane_width_m = c.scenario.straight.lane_width_m;
    c.scenario.curved.duration_ms = c.duration_ms;

    c.scenario.trace_csv = kv.str("scenario.trace_csv", "");

    c.validate();
    return c;
}

inline ScenarioConfig load_scenario_config(const std::string& path,
                                           const std::vector<std::string>& overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config '" + path + "'");
    return parse_scenario_config(in, overrides);
}

} // namespace v2x
