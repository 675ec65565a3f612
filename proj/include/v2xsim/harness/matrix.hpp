#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "v2xsim/harness/scenario.hpp"
#include "v2xsim/metrics/csv.hpp"

namespace v2x::harness {

// The five-way comparison set, as deltas over one base scenario.
struct MatrixConfig {
    std::string name;
    std::function<void(ScenarioConfig&)> apply;
};

inline std::vector<MatrixConfig> default_matrix_configs() {
    return {
        {"periodic",
         [](ScenarioConfig& c) {
             c.app.traffic = TrafficMode::periodic;
             c.predictor.kind = PredictorKind::none;
         }},
        {"default-no-gb",
         [](ScenarioConfig& c) {
             c.app.traffic = TrafficMode::etsi;
             c.mac.grant_breaking = false;
             c.predictor.kind = PredictorKind::none;
         }},
        {"mean-ipt",
         [](ScenarioConfig& c) {
             c.app.traffic = TrafficMode::etsi;
             c.predictor.kind = PredictorKind::mean_ipt;
         }},
        {"predicted-ipt",
         [](ScenarioConfig& c) {
             c.app.traffic = TrafficMode::etsi;
             c.predictor.kind = PredictorKind::gru;
         }},
        {"oracle",
         [](ScenarioConfig& c) {
             c.app.traffic = TrafficMode::etsi;
             c.predictor.kind = PredictorKind::oracle;
         }},
    };
}

struct MatrixRun {
    std::string config;
    std::uint64_t seed = 0;
    metrics::SummaryStats summary;
    metrics::PdrCurve pdr;
    metrics::ConfusionMatrix confusion;
};

struct MatrixResult {
    std::vector<MatrixRun> runs;
    std::vector<std::string> skipped; // configs skipped (e.g. missing weights)
    std::vector<std::string> warnings;
};

// Mean PDR per bin over a config's seeds (bins keyed by lower edge).
inline metrics::PdrCurve mean_pdr(const std::vector<const metrics::PdrCurve*>& curves) {
    metrics::PdrCurve out;
    if (curves.empty()) return out;
    out.bin_width = curves.front()->bin_width;
    out.max_range = curves.front()->max_range;
    std::map<double, metrics::PdrBin> acc;
    for (const auto* c : curves)
        for (const auto& b : c->bins) {
            auto& a = acc[b.lo];
            a.lo = b.lo;
            a.hi = b.hi;
            a.expected += b.expected;
            a.delivered += b.delivered;
        }
    for (auto& [lo, b] : acc) out.bins.push_back(b);
    return out;
}

// Execute every config over every seed on identical mobility (common random
// numbers: mobility and shadowing depend only on the seed) and drop the
// comparison CSVs under out_dir.
inline MatrixResult run_matrix(const ScenarioConfig& base, const std::vector<std::uint64_t>& seeds,
                               const std::string& out_dir,
                               std::vector<MatrixConfig> configs = default_matrix_configs()) {
    namespace fs = std::filesystem;
    MatrixResult result;
    fs::create_directories(out_dir);

    for (const auto& mc : configs) {
        ScenarioConfig cfg = base;
        mc.apply(cfg);
        if (cfg.predictor.kind == PredictorKind::gru) {
            const bool ok = fs::exists(cfg.predictor.gru_speed_weights) &&
                            fs::exists(cfg.predictor.gru_sine_weights) &&
                            fs::exists(cfg.predictor.gru_cosine_weights);
            if (!ok) {
                result.skipped.push_back(mc.name);
                result.warnings.push_back("config '" + mc.name +
                                          "' skipped: GRU weight files not found");
                continue;
            }
        }

        std::vector<metrics::PdrCurve> pdrs;
        metrics::ConfusionMatrix summed;
        for (std::uint64_t seed : seeds) {
            ScenarioConfig run_cfg = cfg;
            run_cfg.seed = seed;
            PreparedScenario prep = prepare(run_cfg);
            for (auto& w : prep.warnings) result.warnings.push_back(w);
            Simulation sim(std::move(prep.inputs));
            const EventLog& log = sim.run();

            MatrixRun run;
            run.config = mc.name;
            run.seed = seed;
            run.summary = metrics::summarize(log);
            run.pdr = metrics::pdr_by_distance(log);
            run.confusion = metrics::confusion(log);
            if (summed.grid.empty()) {
                summed = run.confusion;
            } else {
                for (std::size_t i = 0; i < summed.grid.size(); ++i)
                    for (std::size_t j = 0; j < summed.grid.size(); ++j)
                        summed.counts[i][j] += run.confusion.counts[i][j];
                summed.total += run.confusion.total;
            }

            const std::string run_dir =
                out_dir + "/" + mc.name + "/seed" + std::to_string(seed);
            fs::create_directories(run_dir);
            metrics::write_pdr_csv(run.pdr, run_dir + "/pdr.csv");
            metrics::write_summary_csv(run.summary, mc.name, run_dir + "/summary.csv");
            metrics::write_confusion_csv(run.confusion, run_dir + "/confusion.csv");
            pdrs.push_back(run.pdr);
            result.runs.push_back(std::move(run));
        }

        std::vector<const metrics::PdrCurve*> views;
        for (const auto& p : pdrs) views.push_back(&p);
        metrics::write_pdr_csv(mean_pdr(views), out_dir + "/" + mc.name + "/pdr_mean.csv");
        metrics::write_confusion_csv(summed, out_dir + "/" + mc.name + "/confusion_total.csv");
    }

    // Cross-config comparison table, seed means.
    {
        auto out = metrics::detail::open_out(out_dir + "/comparison.csv");
        out << "config,seeds,cam_rate_ms,ipt_ms,delta_col,rri_error_ms,predictions,"
               "inaccuracies,missed_opportunities,pdr_overall\n";
        std::map<std::string, std::vector<const MatrixRun*>> by_config;
        for (const auto& r : result.runs) by_config[r.config].push_back(&r);
        for (const auto& mc : configs) {
            const auto it = by_config.find(mc.name);
            if (it == by_config.end()) continue;
            const auto& rs = it->second;
            double cam = 0, ipt = 0, col = 0, err = 0, preds = 0, inacc = 0, miss = 0;
            long exp = 0, del = 0;
            for (const auto* r : rs) {
                cam += r->summary.app.cam_rate_ms.mean;
                ipt += r->summary.app.mac_ipt_ms.mean;
                col += static_cast<double>(r->summary.collisions);
                err += r->summary.rri.error_ms.mean;
                preds += static_cast<double>(r->summary.rri.predictions);
                inacc += static_cast<double>(r->summary.rri.inaccuracies);
                miss += static_cast<double>(r->summary.missed_opportunities);
                for (const auto& b : r->pdr.bins) {
                    exp += b.expected;
                    del += b.delivered;
                }
            }
            const double n = static_cast<double>(rs.size());
            out << mc.name << ',' << rs.size() << ',' << metrics::detail::fmt(cam / n) << ','
                << metrics::detail::fmt(ipt / n) << ',' << metrics::detail::fmt(col / n)
                << ',' << metrics::detail::fmt(err / n) << ','
                << metrics::detail::fmt(preds / n) << ',' << metrics::detail::fmt(inacc / n)
                << ',' << metrics::detail::fmt(miss / n) << ','
                << metrics::detail::fmt(exp > 0 ? static_cast<double>(del) / exp : 0.0)
                << '\n';
        }
        for (const auto& s : result.skipped)
            out << s << ",0,,,,,,,,skipped\n";
    }
    return result;
}

} // namespace v2x::harness
