#pragma once

#include <memory>
#include <string>
#include <vector>

#include "v2xsim/core/simulation.hpp"
#include "v2xsim/mobility/trace_io.hpp"
#include "v2xsim/nn/serialize.hpp"

namespace v2x::harness {

inline std::vector<mob::Trace> build_traces(const ScenarioConfig& cfg,
                                            std::vector<std::string>* warnings = nullptr) {
    switch (cfg.scenario.kind) {
        case ScenarioKind::straight: {
            mob::StraightParams p = cfg.scenario.straight;
            p.duration_ms = cfg.duration_ms;
            return mob::gen_straight_highway(p, cfg.seed);
        }
        case ScenarioKind::curved: {
            mob::CurvedParams p = cfg.scenario.curved;
            p.duration_ms = cfg.duration_ms;
            return mob::gen_curved_highway(p, cfg.seed);
        }
        case ScenarioKind::import: {
            mob::ImportResult res = mob::import_trace(cfg.scenario.trace_csv);
            if (warnings)
                warnings->insert(warnings->end(), res.warnings.begin(), res.warnings.end());
            // The event loop wants compact ids 0..V-1.
            for (std::size_t i = 0; i < res.traces.size(); ++i) {
                if (res.traces[i].vehicle != static_cast<VehicleId>(i) && warnings)
                    warnings->push_back("vehicle " + std::to_string(res.traces[i].vehicle) +
                                        " remapped to id " + std::to_string(i));
                res.traces[i].vehicle = static_cast<VehicleId>(i);
            }
            return res.traces;
        }
    }
    throw ConfigError("unknown scenario kind");
}

inline bool hybrid_vehicle_is_periodic(std::size_t v, double fraction) {
    // Evenly interleaved assignment; 0.5 alternates periodic/etsi.
    const double a = static_cast<double>(v) * fraction;
    const double b = static_cast<double>(v + 1) * fraction;
    return std::floor(b) - std::floor(a) >= 1.0;
}

struct PreparedScenario {
    SimInputs inputs;
    double mean_etsi_ipt_ms = 0.0;
    int matched_period_ms = 0;
    std::vector<std::string> warnings;
};

inline std::shared_ptr<const pred::GruTriple> load_gru_triple(const PredictorConfig& pc) {
    auto triple = std::make_shared<pred::GruTriple>();
    triple->speed = nn::load_model(pc.gru_speed_weights);
    triple->sine = nn::load_model(pc.gru_sine_weights);
    triple->cosine = nn::load_model(pc.gru_cosine_weights);
    triple->max_speed = pc.max_speed_mps;
    triple->validate();
    return triple;
}

// Traces, per-vehicle CAM streams, per-vehicle scheduler modes and the
// predictor, assembled from one scenario config.
inline PreparedScenario prepare(const ScenarioConfig& cfg) {
    cfg.validate();
    PreparedScenario out;
    out.inputs.cfg = cfg;
    out.inputs.traces = build_traces(cfg, &out.warnings);
    const std::size_t V = out.inputs.traces.size();
    if (V == 0) throw ConfigError("scenario produced no vehicles");

    // Hypothetical ETSI streams on every trace: the mean-rate anchor for the
    // periodic baseline and the mean-IPT predictor.
    std::vector<std::vector<cam::CamEvent>> etsi(V);
    for (std::size_t v = 0; v < V; ++v)
        etsi[v] = cam::generate_cam_stream(out.inputs.traces[v], cfg.cam,
                                           cfg.app.packet_bytes);
    out.mean_etsi_ipt_ms = cam::mean_ipt_ms(etsi);
    out.matched_period_ms =
        cfg.app.period_ms > 0
            ? static_cast<int>(cfg.app.period_ms)
            : pred::map_ipt_to_rri(out.mean_etsi_ipt_ms, cfg.mac.allowed_rri_ms);

    auto streams = std::make_shared<std::vector<std::vector<cam::CamEvent>>>(V);
    out.inputs.modes.assign(V, cfg.mac.mode);
    out.inputs.base_rri_ms.assign(V, 0);
    for (std::size_t v = 0; v < V; ++v) {
        bool periodic = cfg.app.traffic == TrafficMode::periodic;
        if (cfg.app.traffic == TrafficMode::hybrid &&
            hybrid_vehicle_is_periodic(v, cfg.app.periodic_fraction))
            periodic = true;
        if (periodic) {
            (*streams)[v] = cam::generate_periodic_stream(
                out.inputs.traces[v], out.matched_period_ms, cfg.app.packet_bytes);
            out.inputs.base_rri_ms[v] = out.matched_period_ms;
            if (cfg.app.traffic == TrafficMode::hybrid && cfg.hybrid_sps_for_periodic &&
                cfg.mac.mode == mac::SchedulerMode::nr_dynamic)
                out.inputs.modes[v] = mac::SchedulerMode::nr_sps;
        } else {
            (*streams)[v] = std::move(etsi[v]);
        }
    }
    out.inputs.streams = streams;

    switch (cfg.predictor.kind) {
        case PredictorKind::none:
            break;
        case PredictorKind::periodic:
            out.inputs.predictor =
                std::make_shared<pred::PeriodicPredictor>(cfg.predictor.periodic_rri_ms);
            break;
        case PredictorKind::mean_ipt:
            out.inputs.predictor = std::make_shared<pred::MeanIptPredictor>(
                out.mean_etsi_ipt_ms, cfg.mac.allowed_rri_ms);
            break;
        case PredictorKind::oracle:
            out.inputs.predictor =
                std::make_shared<pred::OraclePredictor>(streams, cfg.cam.max_interval_ms);
            break;
        case PredictorKind::gru: {
            auto triple = load_gru_triple(cfg.predictor);
            out.inputs.predictor = std::make_shared<pred::GruStreamingPredictor>(
                triple, V, cfg.cam);
            out.inputs.streaming_gru = true;
            break;
        }
    }
    return out;
}

} // namespace v2x::harness
