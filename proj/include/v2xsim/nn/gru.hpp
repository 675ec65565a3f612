#pragma once

#include <algorithm>
#include <cmath>

#include "v2xsim/nn/matrix.hpp"

namespace v2x::nn {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Cho-style GRU cell:
//   r = sigmoid(W_r x + U_r h_prev + b_r)
//   z = sigmoid(W_z x + U_z h_prev + b_z)
//   hc = tanh(W_h x + U_h (r . h_prev) + b_h)
//   h = (1 - z) . h_prev + z . hc
struct GruCellWeights {
    Matrix w_r, w_z, w_h; // hidden x input
    Matrix u_r, u_z, u_h; // hidden x hidden
    Vector b_r, b_z, b_h; // hidden

    GruCellWeights() = default;
    GruCellWeights(std::size_t input, std::size_t hidden)
        : w_r(hidden, input), w_z(hidden, input), w_h(hidden, input),
          u_r(hidden, hidden), u_z(hidden, hidden), u_h(hidden, hidden),
          b_r(hidden, 0.0), b_z(hidden, 0.0), b_h(hidden, 0.0) {}

    std::size_t input_size() const { return w_r.cols(); }
    std::size_t hidden_size() const { return w_r.rows(); }

    // Uniform +-1/sqrt(fan_in) weights, zero biases.
    void init(RngStream& rng) {
        const double wi = 1.0 / std::sqrt(static_cast<double>(input_size()));
        const double ui = 1.0 / std::sqrt(static_cast<double>(hidden_size()));
        w_r.fill_uniform(rng, -wi, wi);
        w_z.fill_uniform(rng, -wi, wi);
        w_h.fill_uniform(rng, -wi, wi);
        u_r.fill_uniform(rng, -ui, ui);
        u_z.fill_uniform(rng, -ui, ui);
        u_h.fill_uniform(rng, -ui, ui);
    }
};

// One recurrent step over a batch row-block, input projection included.
// Shared by the streaming predictor and the length-1 equivalence tests; the
// training path hoists the input projections instead.
inline void gru_step_batch(const GruCellWeights& w, const double* x, std::size_t batch,
                           const double* h_prev, double* h_out, Matrix& scratch) {
    const std::size_t H = w.hidden_size();
    const std::size_t I = w.input_size();
    if (scratch.rows() != batch * 4 || scratch.cols() != H)
        scratch = Matrix(batch * 4, H);
    double* r = scratch.row(0);
    double* z = scratch.row(batch);
    double* hc = scratch.row(2 * batch);
    double* rh = scratch.row(3 * batch);

    gemm_nt(x, batch, I, w.w_r.data(), H, r, false);
    gemm_nt(h_prev, batch, H, w.u_r.data(), H, r, true);
    add_bias(r, batch, H, w.b_r.data());
    gemm_nt(x, batch, I, w.w_z.data(), H, z, false);
    gemm_nt(h_prev, batch, H, w.u_z.data(), H, z, true);
    add_bias(z, batch, H, w.b_z.data());
    for (std::size_t i = 0; i < batch * H; ++i) {
        r[i] = sigmoid(r[i]);
        z[i] = sigmoid(z[i]);
        rh[i] = r[i] * h_prev[i];
    }
    gemm_nt(x, batch, I, w.w_h.data(), H, hc, false);
    gemm_nt(rh, batch, H, w.u_h.data(), H, hc, true);
    add_bias(hc, batch, H, w.b_h.data());
    for (std::size_t i = 0; i < batch * H; ++i) {
        hc[i] = std::tanh(hc[i]);
        h_out[i] = (1.0 - z[i]) * h_prev[i] + z[i] * hc[i];
    }
}

// Single-sample step.
inline void gru_cell_forward(const GruCellWeights& w, const double* x, const double* h_prev,
                             double* h_out) {
    Matrix scratch;
    gru_step_batch(w, x, 1, h_prev, h_out, scratch);
}

// Forward/backward caches for one GRU layer over a (steps x batch) block
// layout: row (t*B + b) of each buffer belongs to step t, batch item b.
struct GruLayerCache {
    std::size_t batch = 0, steps = 0;
    Matrix r, z, hc, rh, h;                 // (T*B x H)
    Matrix d_rpre, d_zpre, d_hcpre;         // (T*B x H)
    Matrix d_x;                             // (T*B x I)
    Matrix h0;                              // (B x H) zeros
    Matrix dh, dh_next, drh;                // (B x H) scratch

    void prepare(const GruCellWeights& w, std::size_t B, std::size_t T, bool training) {
        const std::size_t H = w.hidden_size();
        const std::size_t I = w.input_size();
        batch = B;
        steps = T;
        if (r.rows() != T * B || r.cols() != H) {
            r = Matrix(T * B, H);
            z = Matrix(T * B, H);
            hc = Matrix(T * B, H);
            rh = Matrix(T * B, H);
            h = Matrix(T * B, H);
        }
        if (training && (d_rpre.rows() != T * B || d_rpre.cols() != H)) {
            d_rpre = Matrix(T * B, H);
            d_zpre = Matrix(T * B, H);
            d_hcpre = Matrix(T * B, H);
        }
        if (training && (d_x.rows() != T * B || d_x.cols() != I)) d_x = Matrix(T * B, I);
        if (h0.rows() != B || h0.cols() != H) {
            h0 = Matrix(B, H);
            dh = Matrix(B, H);
            dh_next = Matrix(B, H);
            drh = Matrix(B, H);
        }
        h0.zero();
    }
};

// Forward over the whole sequence: input x is (T*B x I), per-step hidden
// states land in cache.h and feed the next layer.
inline void gru_layer_forward(const GruCellWeights& w, const Matrix& x, std::size_t B,
                              std::size_t T, GruLayerCache& c, bool training) {
    const std::size_t H = w.hidden_size();
    const std::size_t I = w.input_size();
    check_shape(x.rows() == T * B && x.cols() == I, "gru_layer_forward input");
    c.prepare(w, B, T, training);

    // Input projections for all steps at once.
    gemm_nt(x.data(), T * B, I, w.w_r.data(), H, c.r.data(), false);
    gemm_nt(x.data(), T * B, I, w.w_z.data(), H, c.z.data(), false);
    gemm_nt(x.data(), T * B, I, w.w_h.data(), H, c.hc.data(), false);

    for (std::size_t t = 0; t < T; ++t) {
        const double* h_prev = t == 0 ? c.h0.data() : c.h.row((t - 1) * B);
        double* r = c.r.row(t * B);
        double* z = c.z.row(t * B);
        double* hc = c.hc.row(t * B);
        double* rh = c.rh.row(t * B);
        double* h = c.h.row(t * B);

        gemm_nt(h_prev, B, H, w.u_r.data(), H, r, true);
        add_bias(r, B, H, w.b_r.data());
        gemm_nt(h_prev, B, H, w.u_z.data(), H, z, true);
        add_bias(z, B, H, w.b_z.data());
        for (std::size_t i = 0; i < B * H; ++i) {
            r[i] = sigmoid(r[i]);
            z[i] = sigmoid(z[i]);
            rh[i] = r[i] * h_prev[i];
        }
        gemm_nt(rh, B, H, w.u_h.data(), H, hc, true);
        add_bias(hc, B, H, w.b_h.data());
        for (std::size_t i = 0; i < B * H; ++i) {
            hc[i] = std::tanh(hc[i]);
            h[i] = (1.0 - z[i]) * h_prev[i] + z[i] * hc[i];
        }
    }
}

// Backpropagation through time. d_out_all is the per-step gradient flowing
// from the layer above ((T*B x H), may be null), d_out_last an extra gradient
// on the final hidden state ((B x H), may be null). Weight gradients
// accumulate into g; input gradients land in cache.d_x.
inline void gru_layer_backward(const GruCellWeights& w, const Matrix& x, std::size_t B,
                               std::size_t T, GruLayerCache& c, const double* d_out_all,
                               const double* d_out_last, GruCellWeights& g) {
    const std::size_t H = w.hidden_size();
    const std::size_t I = w.input_size();

    c.dh_next.zero();
    for (std::size_t t = T; t-- > 0;) {
        const double* r = c.r.row(t * B);
        const double* z = c.z.row(t * B);
        const double* hc = c.hc.row(t * B);
        const double* h_prev = t == 0 ? c.h0.data() : c.h.row((t - 1) * B);
        double* d_rpre = c.d_rpre.row(t * B);
        double* d_zpre = c.d_zpre.row(t * B);
        double* d_hcpre = c.d_hcpre.row(t * B);
        double* dh = c.dh.data();
        double* carry = c.dh_next.data();
        double* drh = c.drh.data();

        for (std::size_t i = 0; i < B * H; ++i) {
            double v = carry[i];
            if (d_out_all) v += d_out_all[t * B * H + i];
            if (d_out_last && t == T - 1) v += d_out_last[i];
            dh[i] = v;
            d_zpre[i] = v * (hc[i] - h_prev[i]) * z[i] * (1.0 - z[i]);
            d_hcpre[i] = v * z[i] * (1.0 - hc[i] * hc[i]);
            carry[i] = v * (1.0 - z[i]); // direct path to h_prev
        }
        // through U_h into r and h_prev: d(r . h_prev) = d_hcpre . U_h
        std::fill(drh, drh + B * H, 0.0);
        gemm_nn_acc(d_hcpre, B, H, w.u_h.data(), H, drh);
        for (std::size_t i = 0; i < B * H; ++i) {
            d_rpre[i] = drh[i] * h_prev[i] * r[i] * (1.0 - r[i]);
            carry[i] += drh[i] * r[i];
        }
        gemm_nn_acc(d_rpre, B, H, w.u_r.data(), H, carry);
        gemm_nn_acc(d_zpre, B, H, w.u_z.data(), H, carry);
    }

    // Input gradients, all steps at once.
    c.d_x.zero();
    gemm_nn_acc(c.d_rpre.data(), T * B, H, w.w_r.data(), I, c.d_x.data());
    gemm_nn_acc(c.d_zpre.data(), T * B, H, w.w_z.data(), I, c.d_x.data());
    gemm_nn_acc(c.d_hcpre.data(), T * B, H, w.w_h.data(), I, c.d_x.data());

    // Weight gradients, hoisted over the step dimension.
    gemm_tn_acc(c.d_rpre.data(), T * B, H, x.data(), I, g.w_r.data());
    gemm_tn_acc(c.d_zpre.data(), T * B, H, x.data(), I, g.w_z.data());
    gemm_tn_acc(c.d_hcpre.data(), T * B, H, x.data(), I, g.w_h.data());
    if (T > 1) {
        // block t of d_*pre pairs with block t-1 of h
        gemm_tn_acc(c.d_rpre.row(B), (T - 1) * B, H, c.h.data(), H, g.u_r.data());
        gemm_tn_acc(c.d_zpre.row(B), (T - 1) * B, H, c.h.data(), H, g.u_z.data());
    }
    gemm_tn_acc(c.d_hcpre.data(), T * B, H, c.rh.data(), H, g.u_h.data());
    colsum_acc(c.d_rpre.data(), T * B, H, g.b_r.data());
    colsum_acc(c.d_zpre.data(), T * B, H, g.b_z.data());
    colsum_acc(c.d_hcpre.data(), T * B, H, g.b_h.data());
}

} // namespace v2x::nn
