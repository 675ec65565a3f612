#pragma once

#include <vector>

#include "v2xsim/metrics/metrics.hpp"
#include "v2xsim/predictor/gru_predictor.hpp"

namespace v2x::harness {

// Offline predictor accuracy on a trace set: at every CAM of the ETSI stream
// with a warm 600-sample history, run the windowed forward and compare the
// predicted RRI class with the true next IPT.
struct PredictEvalResult {
    metrics::ConfusionMatrix confusion;
    metrics::RriStats stats;
    long cold_skipped = 0;
    metrics::MeanStd abs_speed_error;   // m/s over the 10-step horizon
    metrics::MeanStd abs_heading_error; // deg over the 10-step horizon
};

inline PredictEvalResult predict_eval(const std::vector<mob::Trace>& traces,
                                      const pred::GruTriple& models,
                                      const cam::Thresholds& th = {},
                                      const std::vector<int>& grid = {100, 200, 300, 400, 500,
                                                                      600, 700, 800, 900, 1000},
                                      std::size_t batch = 32) {
    models.validate(3, 10);
    PredictEvalResult res;
    res.confusion.grid = grid;
    res.confusion.counts.assign(grid.size(), std::vector<long>(grid.size(), 0));

    struct Window {
        nn::Matrix x;        // (600 x 3), normalized
        cam::CamState ref;
        int actual_ipt_ms;
        std::size_t trace_idx;
        std::size_t cam_sample; // grid index of the CAM
    };
    std::vector<Window> windows;

    for (std::size_t ti = 0; ti < traces.size(); ++ti) {
        const mob::Trace& tr = traces[ti];
        const auto stream = cam::generate_cam_stream(tr, th);
        pred::KinematicHistory hist(600);
        std::size_t next = 0;
        for (std::size_t s = 0; s < tr.samples.size(); ++s) {
            hist.push(tr.samples[s]);
            while (next < stream.size() && stream[next].t == tr.samples[s].t) {
                if (next + 1 < stream.size() && hist.warm()) {
                    Window w;
                    w.x = nn::Matrix(600, 3);
                    hist.write_features(w.x.data(), models.max_speed);
                    w.ref.last_tx = tr.samples[s];
                    w.ref.last_tx_time = stream[next].t;
                    w.actual_ipt_ms = static_cast<int>(stream[next + 1].t - stream[next].t);
                    w.trace_idx = ti;
                    w.cam_sample = s;
                    windows.push_back(std::move(w));
                } else if (next + 1 < stream.size()) {
                    ++res.cold_skipped;
                }
                ++next;
            }
        }
    }

    std::vector<double> errors;
    std::vector<double> speed_err, heading_err;
    nn::Workspace ws_speed, ws_sine, ws_cos;
    nn::Matrix x;
    for (std::size_t lo = 0; lo < windows.size(); lo += batch) {
        const std::size_t hi = std::min(windows.size(), lo + batch);
        const std::size_t B = hi - lo;
        if (x.rows() != 600 * B || x.cols() != 3) x = nn::Matrix(600 * B, 3);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t t = 0; t < 600; ++t)
                for (std::size_t f = 0; f < 3; ++f)
                    x(t * B + b, f) = windows[lo + b].x(t, f);

        const nn::Matrix& out_speed = nn::forward(models.speed, x, B, 600, ws_speed);
        const nn::Matrix& out_sine = nn::forward(models.sine, x, B, 600, ws_sine);
        const nn::Matrix& out_cos = nn::forward(models.cosine, x, B, 600, ws_cos);

        for (std::size_t b = 0; b < B; ++b) {
            const Window& w = windows[lo + b];
            std::array<std::array<double, 3>, 10> traj;
            for (int k = 0; k < 10; ++k) {
                traj[k][0] = out_speed(b, k) * models.max_speed;
                traj[k][1] = out_sine(b, k);
                traj[k][2] = out_cos(b, k);
            }
            const pred::TrajectoryWalk walk = pred::walk_predicted_trajectory(w.ref, traj, th);
            const int predicted = pred::map_ipt_to_rri(walk.ipt_ms, grid);
            const int actual = pred::map_ipt_to_rri(w.actual_ipt_ms, grid);
            const std::size_t p = metrics::detail::grid_index(grid, predicted);
            const std::size_t a = metrics::detail::grid_index(grid, actual);
            if (p < grid.size() && a < grid.size()) {
                ++res.confusion.counts[p][a];
                ++res.confusion.total;
            }
            errors.push_back(static_cast<double>(predicted - w.actual_ipt_ms));
            ++res.stats.predictions;
            if (predicted != w.actual_ipt_ms) ++res.stats.inaccuracies;

            // Trajectory error against the true future samples, when covered.
            const mob::Trace& tr = traces[w.trace_idx];
            for (int k = 0; k < 10; ++k) {
                const std::size_t s = w.cam_sample + static_cast<std::size_t>(k) + 1;
                if (s >= tr.samples.size()) break;
                speed_err.push_back(std::fabs(traj[k][0] - tr.samples[s].speed));
                const double pred_heading = mob::dir_to_heading(traj[k][2], traj[k][1]);
                heading_err.push_back(mob::heading_diff(pred_heading, tr.samples[s].heading));
            }
        }
    }
    res.stats.error_ms = metrics::mean_std(errors);
    res.abs_speed_error = metrics::mean_std(speed_err);
    res.abs_heading_error = metrics::mean_std(heading_err);
    return res;
}

// The oracle through the same pipeline: predicted == actual by construction.
inline PredictEvalResult oracle_eval(const std::vector<mob::Trace>& traces,
                                     const cam::Thresholds& th = {},
                                     const std::vector<int>& grid = {100, 200, 300, 400, 500,
                                                                     600, 700, 800, 900, 1000}) {
    PredictEvalResult res;
    res.confusion.grid = grid;
    res.confusion.counts.assign(grid.size(), std::vector<long>(grid.size(), 0));
    std::vector<double> errors;
    for (const auto& tr : traces) {
        const auto stream = cam::generate_cam_stream(tr, th);
        for (std::size_t k = 0; k + 1 < stream.size(); ++k) {
            const int actual = static_cast<int>(stream[k + 1].t - stream[k].t);
            const int predicted = actual;
            const std::size_t gi =
                metrics::detail::grid_index(grid, pred::map_ipt_to_rri(actual, grid));
            if (gi < grid.size()) {
                ++res.confusion.counts[gi][gi];
                ++res.confusion.total;
            }
            errors.push_back(static_cast<double>(predicted - actual));
            ++res.stats.predictions;
        }
    }
    res.stats.error_ms = metrics::mean_std(errors);
    return res;
}

} // namespace v2x::harness
