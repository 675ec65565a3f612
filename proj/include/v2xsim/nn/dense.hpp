#pragma once

#include <cmath>

#include "v2xsim/nn/matrix.hpp"

namespace v2x::nn {

enum class Activation { linear, relu };

inline const char* to_string(Activation a) {
    return a == Activation::linear ? "linear" : "relu";
}

struct DenseWeights {
    Matrix w; // out x in
    Vector b; // out
    Activation act = Activation::linear;

    DenseWeights() = default;
    DenseWeights(std::size_t input, std::size_t output, Activation a)
        : w(output, input), b(output, 0.0), act(a) {}

    std::size_t input_size() const { return w.cols(); }
    std::size_t output_size() const { return w.rows(); }

    void init(RngStream& rng) {
        const double s = 1.0 / std::sqrt(static_cast<double>(input_size()));
        w.fill_uniform(rng, -s, s);
    }
};

struct DenseCache {
    Matrix out;  // (B x out), post-activation
    Matrix d_in; // (B x in)

    void prepare(const DenseWeights& w, std::size_t B) {
        if (out.rows() != B || out.cols() != w.output_size()) out = Matrix(B, w.output_size());
        if (d_in.rows() != B || d_in.cols() != w.input_size()) d_in = Matrix(B, w.input_size());
    }
};

inline void dense_forward(const DenseWeights& w, const double* x, std::size_t B,
                          DenseCache& c) {
    c.prepare(w, B);
    const std::size_t out = w.output_size();
    gemm_nt(x, B, w.input_size(), w.w.data(), out, c.out.data(), false);
    add_bias(c.out.data(), B, out, w.b.data());
    if (w.act == Activation::relu) {
        double* o = c.out.data();
        for (std::size_t i = 0; i < B * out; ++i)
            if (o[i] < 0.0) o[i] = 0.0;
    }
}

// d_out is (B x out) and is clobbered with the pre-activation gradient.
inline void dense_backward(const DenseWeights& w, const double* x, std::size_t B,
                           DenseCache& c, double* d_out, DenseWeights& g) {
    const std::size_t out = w.output_size();
    const std::size_t in = w.input_size();
    if (w.act == Activation::relu) {
        const double* o = c.out.data();
        for (std::size_t i = 0; i < B * out; ++i)
            if (o[i] <= 0.0) d_out[i] = 0.0;
    }
    gemm_tn_acc(d_out, B, out, x, in, g.w.data());
    colsum_acc(d_out, B, out, g.b.data());
    c.d_in.zero();
    gemm_nn_acc(d_out, B, out, w.w.data(), in, c.d_in.data());
}

} // namespace v2x::nn
