#pragma once

#include <string>
#include <vector>

#include "v2xsim/nn/dense.hpp"
#include "v2xsim/nn/gru.hpp"

namespace v2x::nn {

// Stacked GRU layers consuming the sequence stepwise, each feeding its
// per-step hidden states to the next; the final GRU's last hidden state
// drives the dense head.
struct GruModel {
    std::vector<GruCellWeights> gru;
    std::vector<DenseWeights> dense;

    std::size_t input_dim() const { return gru.empty() ? 0 : gru.front().input_size(); }
    std::size_t output_dim() const { return dense.empty() ? 0 : dense.back().output_size(); }

    void validate_chain() const {
        if (gru.empty() || dense.empty())
            throw ShapeError("model: needs at least one GRU layer and a dense head");
        for (std::size_t i = 1; i < gru.size(); ++i)
            if (gru[i].input_size() != gru[i - 1].hidden_size())
                throw ShapeError("model: GRU layer " + std::to_string(i) +
                                 " input does not chain");
        if (dense.front().input_size() != gru.back().hidden_size())
            throw ShapeError("model: dense head input does not chain");
        for (std::size_t i = 1; i < dense.size(); ++i)
            if (dense[i].input_size() != dense[i - 1].output_size())
                throw ShapeError("model: dense layer " + std::to_string(i) +
                                 " input does not chain");
    }

    void init(RngStream rng) {
        for (auto& l : gru) l.init(rng);
        for (auto& l : dense) l.init(rng);
    }

    // Zero-valued clone used as a gradient accumulator.
    GruModel zeros_like() const {
        GruModel z;
        for (const auto& l : gru) z.gru.emplace_back(l.input_size(), l.hidden_size());
        for (const auto& l : dense)
            z.dense.emplace_back(l.input_size(), l.output_size(), l.act);
        return z;
    }

    void zero() {
        for (auto& l : gru) {
            l.w_r.zero(); l.w_z.zero(); l.w_h.zero();
            l.u_r.zero(); l.u_z.zero(); l.u_h.zero();
            std::fill(l.b_r.begin(), l.b_r.end(), 0.0);
            std::fill(l.b_z.begin(), l.b_z.end(), 0.0);
            std::fill(l.b_h.begin(), l.b_h.end(), 0.0);
        }
        for (auto& l : dense) {
            l.w.zero();
            std::fill(l.b.begin(), l.b.end(), 0.0);
        }
    }
};

// Visit every parameter tensor in a fixed order (shared by the optimizer,
// serializer and gradient checks).
template <typename F>
void for_each_tensor(GruModel& m, F&& f) {
    for (std::size_t i = 0; i < m.gru.size(); ++i) {
        auto& l = m.gru[i];
        const std::string p = "gru" + std::to_string(i) + ".";
        f(p + "w_r", l.w_r.data(), l.w_r.size());
        f(p + "w_z", l.w_z.data(), l.w_z.size());
        f(p + "w_h", l.w_h.data(), l.w_h.size());
        f(p + "u_r", l.u_r.data(), l.u_r.size());
        f(p + "u_z", l.u_z.data(), l.u_z.size());
        f(p + "u_h", l.u_h.data(), l.u_h.size());
        f(p + "b_r", l.b_r.data(), l.b_r.size());
        f(p + "b_z", l.b_z.data(), l.b_z.size());
        f(p + "b_h", l.b_h.data(), l.b_h.size());
    }
    for (std::size_t i = 0; i < m.dense.size(); ++i) {
        auto& l = m.dense[i];
        const std::string p = "dense" + std::to_string(i) + ".";
        f(p + "w", l.w.data(), l.w.size());
        f(p + "b", l.b.data(), l.b.size());
    }
}

inline std::size_t param_count(const GruModel& m) {
    std::size_t n = 0;
    for_each_tensor(const_cast<GruModel&>(m),
                    [&](const std::string&, double*, std::size_t len) { n += len; });
    return n;
}

struct Workspace {
    std::size_t batch = 0, steps = 0;
    Matrix input; // (T*B x I) copy kept for backward
    std::vector<GruLayerCache> gru;
    std::vector<DenseCache> dense;
    Matrix d_head; // (B x out) loss gradient scratch

    void prepare(const GruModel& m, std::size_t B, std::size_t T) {
        batch = B;
        steps = T;
        gru.resize(m.gru.size());
        dense.resize(m.dense.size());
        if (d_head.rows() != B || d_head.cols() != m.output_dim())
            d_head = Matrix(B, m.output_dim());
    }
};

// x rows are step-major: row (t*B + b) is step t of batch item b.
// Returns the head output (B x out) held by the workspace.
inline const Matrix& forward(const GruModel& m, const Matrix& x, std::size_t B, std::size_t T,
                             Workspace& ws, bool training = false) {
    m.validate_chain();
    check_shape(x.rows() == T * B && x.cols() == m.input_dim(), "model forward input");
    ws.prepare(m, B, T);
    if (training) ws.input = x;

    const Matrix* layer_in = training ? &ws.input : &x;
    for (std::size_t li = 0; li < m.gru.size(); ++li) {
        gru_layer_forward(m.gru[li], *layer_in, B, T, ws.gru[li], training);
        layer_in = &ws.gru[li].h;
    }
    const double* head_in = ws.gru.back().h.row((T - 1) * B);
    for (std::size_t di = 0; di < m.dense.size(); ++di) {
        dense_forward(m.dense[di], head_in, B, ws.dense[di]);
        head_in = ws.dense[di].out.data();
    }
    return ws.dense.back().out;
}

// Gradient of the summed per-item loss wrt every weight; d_out is (B x out).
// Gradients accumulate into g (zero it for a fresh batch).
inline void backward(const GruModel& m, Workspace& ws, const Matrix& d_out, GruModel& g) {
    const std::size_t B = ws.batch;
    const std::size_t T = ws.steps;
    check_shape(d_out.rows() == B && d_out.cols() == m.output_dim(), "model backward d_out");

    ws.d_head = d_out;
    for (std::size_t di = m.dense.size(); di-- > 0;) {
        const double* in = di == 0 ? ws.gru.back().h.row((T - 1) * B)
                                   : ws.dense[di - 1].out.data();
        double* grad_in = di + 1 == m.dense.size() ? ws.d_head.data()
                                                   : ws.dense[di + 1].d_in.data();
        dense_backward(m.dense[di], in, B, ws.dense[di], grad_in, g.dense[di]);
    }

    const double* d_last = ws.dense.front().d_in.data();
    for (std::size_t li = m.gru.size(); li-- > 0;) {
        const Matrix& in = li == 0 ? ws.input : ws.gru[li - 1].h;
        const double* d_all =
            li + 1 == m.gru.size() ? nullptr : ws.gru[li + 1].d_x.data();
        const double* d_fin = li + 1 == m.gru.size() ? d_last : nullptr;
        gru_layer_backward(m.gru[li], in, B, T, ws.gru[li], d_all, d_fin, g.gru[li]);
    }
}

// Table III architectures. All three consume the 3-feature
// (speed, sin, cos) step input.
inline GruModel make_speed_model(std::size_t input = 3, std::size_t hidden = 128,
                                 std::size_t horizon = 10) {
    GruModel m;
    m.gru.emplace_back(input, hidden);
    m.gru.emplace_back(hidden, hidden);
    m.dense.emplace_back(hidden, horizon, Activation::linear);
    return m;
}

inline GruModel make_sine_model(std::size_t input = 3, std::size_t hidden = 128,
                                std::size_t horizon = 10) {
    GruModel m;
    m.gru.emplace_back(input, hidden);
    m.gru.emplace_back(hidden, hidden);
    m.gru.emplace_back(hidden, hidden);
    m.dense.emplace_back(hidden, horizon, Activation::linear);
    return m;
}

inline GruModel make_cosine_model(std::size_t input = 3, std::size_t hidden = 128,
                                  std::size_t horizon = 10) {
    GruModel m;
    m.gru.emplace_back(input, hidden);
    m.gru.emplace_back(hidden, hidden);
    m.gru.emplace_back(hidden, hidden);
    m.dense.emplace_back(hidden, 32, Activation::relu);
    m.dense.emplace_back(32, 32, Activation::relu);
    m.dense.emplace_back(32, horizon, Activation::linear);
    return m;
}

} // namespace v2x::nn
