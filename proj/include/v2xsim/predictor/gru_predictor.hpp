#pragma once

#include <array>
#include <memory>

#include "v2xsim/nn/model.hpp"
#include "v2xsim/predictor/predictor.hpp"

namespace v2x::pred {

// Speed, sine and cosine models sharing the 3-feature input.
struct GruTriple {
    nn::GruModel speed;
    nn::GruModel sine;
    nn::GruModel cosine;
    double max_speed = 50.0;

    void validate(std::size_t features = 3, std::size_t horizon = 10) const {
        for (const nn::GruModel* m : {&speed, &sine, &cosine}) {
            m->validate_chain();
            if (m->input_dim() != features)
                throw ShapeError("gru predictor: model input dim != 3 features");
            if (m->output_dim() != horizon)
                throw ShapeError("gru predictor: model output dim != 10 steps");
        }
    }
};

// Run the three models over the warm 600-step window, denormalize, and walk
// the predicted trajectory through the CAM trigger rules.
inline IptPrediction gru_predict(const KinematicHistory& history, const GruTriple& models,
                                 const cam::CamState& ref, const cam::Thresholds& th = {}) {
    if (!history.warm()) {
        // Cold start: the time trigger guarantees a CAM within the ceiling.
        return {static_cast<int>(th.max_interval_ms), cam::TriggerCause::time, true, {}, false};
    }
    models.validate(3, 10);

    const std::size_t T = history.capacity();
    nn::Matrix x(T, 3);
    history.write_features(x.data(), models.max_speed);

    nn::Workspace ws_speed, ws_sine, ws_cos;
    const nn::Matrix& out_speed = nn::forward(models.speed, x, 1, T, ws_speed);
    const nn::Matrix& out_sine = nn::forward(models.sine, x, 1, T, ws_sine);
    const nn::Matrix& out_cos = nn::forward(models.cosine, x, 1, T, ws_cos);

    IptPrediction p;
    p.has_trajectory = true;
    for (int k = 0; k < 10; ++k) {
        p.trajectory[k][0] = out_speed(0, k) * models.max_speed;
        p.trajectory[k][1] = out_sine(0, k);
        p.trajectory[k][2] = out_cos(0, k);
    }
    const TrajectoryWalk walk = walk_predicted_trajectory(ref, p.trajectory, th);
    p.predicted_ipt_ms = walk.ipt_ms;
    p.cause = walk.cause;
    p.cold = false;
    return p;
}

// In-run GRU predictor. Hidden states advance once per 100 ms sample and are
// batched across the fleet, so a prediction only costs the dense head plus
// the trigger walk. After warmup this matches the windowed forward up to the
// GRU's exponentially-forgotten prefix.
class GruStreamingPredictor final : public IptPredictor {
public:
    GruStreamingPredictor(std::shared_ptr<const GruTriple> models, std::size_t n_vehicles,
                          const cam::Thresholds& th, std::size_t warmup = 600)
        : models_(std::move(models)), th_(th), warmup_(warmup), n_(n_vehicles),
          observed_(n_vehicles, 0), pending_(n_vehicles * 3, 0.0),
          has_pending_(n_vehicles, 0) {
        models_->validate(3, 10);
        init_states(models_->speed, speed_states_);
        init_states(models_->sine, sine_states_);
        init_states(models_->cosine, cos_states_);
    }

    // Queue one vehicle's grid sample; the batched advance happens when all
    // queued samples are flushed.
    void observe(VehicleId v, const mob::Kinematics& k) override {
        const double r = mob::deg2rad(k.heading);
        pending_[v * 3] = k.speed / models_->max_speed;
        pending_[v * 3 + 1] = std::sin(r);
        pending_[v * 3 + 2] = std::cos(r);
        has_pending_[v] = 1;
    }

    // Advance every vehicle that queued a sample, as one batched GRU step.
    void flush() {
        bool all = true, any = false;
        for (std::size_t v = 0; v < n_; ++v) {
            if (has_pending_[v]) any = true;
            else all = false;
        }
        if (!any) return;
        if (!all)
            throw QueryError("gru streaming predictor: partial fleet observation");
        advance(models_->speed, speed_states_);
        advance(models_->sine, sine_states_);
        advance(models_->cosine, cos_states_);
        for (std::size_t v = 0; v < n_; ++v) {
            has_pending_[v] = 0;
            ++observed_[v];
        }
    }

    IptPrediction predict(VehicleId v, SimTime, std::size_t, const cam::CamState& ref) override {
        if (observed_[v] < warmup_)
            return {static_cast<int>(th_.max_interval_ms), cam::TriggerCause::time, true,
                    {}, false};
        IptPrediction p;
        p.has_trajectory = true;
        std::array<double, 10> speed_out, sine_out, cos_out;
        head_forward(models_->speed, speed_states_, v, speed_out);
        head_forward(models_->sine, sine_states_, v, sine_out);
        head_forward(models_->cosine, cos_states_, v, cos_out);
        for (int k = 0; k < 10; ++k) {
            p.trajectory[k][0] = speed_out[k] * models_->max_speed;
            p.trajectory[k][1] = sine_out[k];
            p.trajectory[k][2] = cos_out[k];
        }
        const TrajectoryWalk walk = walk_predicted_trajectory(ref, p.trajectory, th_);
        p.predicted_ipt_ms = walk.ipt_ms;
        p.cause = walk.cause;
        return p;
    }

private:
    struct LayerStates {
        std::vector<nn::Matrix> h; // per GRU layer, (V x H)
        nn::Matrix scratch;
        nn::Matrix h_next;
    };

    void init_states(const nn::GruModel& m, LayerStates& s) {
        s.h.clear();
        for (const auto& l : m.gru) s.h.emplace_back(n_, l.hidden_size());
    }

    void advance(const nn::GruModel& m, LayerStates& s) {
        const double* in = pending_.data();
        for (std::size_t li = 0; li < m.gru.size(); ++li) {
            nn::Matrix& h = s.h[li];
            if (s.h_next.rows() != n_ || s.h_next.cols() != h.cols())
                s.h_next = nn::Matrix(n_, h.cols());
            nn::gru_step_batch(m.gru[li], in, n_, h.data(), s.h_next.data(), s.scratch);
            std::swap(h, s.h_next);
            in = h.data();
        }
    }

    void head_forward(const nn::GruModel& m, const LayerStates& s, VehicleId v,
                      std::array<double, 10>& out) const {
        nn::DenseCache cache;
        const double* in = s.h.back().row(v);
        nn::Matrix tmp;
        for (std::size_t di = 0; di < m.dense.size(); ++di) {
            nn::dense_forward(m.dense[di], in, 1, cache);
            tmp = cache.out;
            in = tmp.data();
        }
        for (int k = 0; k < 10; ++k) out[k] = tmp(0, k);
    }

    std::shared_ptr<const GruTriple> models_;
    cam::Thresholds th_;
    std::size_t warmup_;
    std::size_t n_;
    std::vector<std::size_t> observed_;
    std::vector<double> pending_;
    std::vector<char> has_pending_;
    LayerStates speed_states_, sine_states_, cos_states_;
};

} // namespace v2x::pred
