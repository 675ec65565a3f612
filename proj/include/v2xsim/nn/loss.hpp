#pragma once

#include <cstddef>

#include "v2xsim/nn/matrix.hpp"

namespace v2x::nn {

// Mean of squared differences over one prediction vector.
inline double mse_loss(const double* pred, const double* target, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pred[i] - target[i];
        s += d * d;
    }
    return s / static_cast<double>(n);
}

// d mse / d pred for one item.
inline void mse_grad(const double* pred, const double* target, std::size_t n, double* out) {
    const double scale = 2.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = scale * (pred[i] - target[i]);
}

} // namespace v2x::nn
