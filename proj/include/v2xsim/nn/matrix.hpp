#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <string>
#include <vector>

#include "v2xsim/core/error.hpp"
#include "v2xsim/core/rng.hpp"

namespace v2x::nn {

// Dense row-major matrix of doubles. 64-bit floats throughout: the models
// are small and the gradient checks need the precision.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    void zero() { std::fill(data_.begin(), data_.end(), 0.0); }

    void fill_uniform(RngStream& rng, double lo, double hi) {
        for (double& v : data_) v = rng.uniform(lo, hi);
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

using Vector = std::vector<double>;

inline void check_shape(bool ok, const char* what) {
    if (!ok) throw ShapeError(std::string("shape mismatch in ") + what);
}

// The three kernels below carry the whole training load; they are written as
// contiguous dot/axpy loops so -O3 vectorizes them with FMA.

// C(m x n) = or += A(m x k) . B(n x k)^T   -- both operands row-contiguous.
// The dot product accumulates into eight independent lanes so the compiler
// can vectorize it under strict FP semantics; the lane-sum order is fixed,
// keeping results bit-reproducible.
inline double dot_lanes(const double* a, const double* b, std::size_t k) {
    double lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    std::size_t l = 0;
    for (; l + 8 <= k; l += 8)
        for (std::size_t j = 0; j < 8; ++j) lane[j] += a[l + j] * b[l + j];
    double tail = 0.0;
    for (; l < k; ++l) tail += a[l] * b[l];
    return ((lane[0] + lane[1]) + (lane[2] + lane[3])) +
           ((lane[4] + lane[5]) + (lane[6] + lane[7])) + tail;
}

// Processed in row tiles that fit L1, with B rows streamed once per tile:
// per tile the j loop runs outer so each B row is read once while the tile's
// A rows stay cache-hot.
inline void gemm_nt(const double* a, std::size_t m, std::size_t k, const double* b,
                    std::size_t n, double* c, bool accumulate) {
    constexpr std::size_t kTile = 32;
    for (std::size_t i0 = 0; i0 < m; i0 += kTile) {
        const std::size_t i1 = std::min(m, i0 + kTile);
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            for (std::size_t i = i0; i < i1; ++i) {
                const double s = dot_lanes(a + i * k, bj, k);
                double& out = c[i * n + j];
                out = accumulate ? out + s : s;
            }
        }
    }
}

// C(m x k) += A(m x n) . B(n x k)   -- axpy over B rows, i-tiled so each B
// row streams once per tile while the tile's C rows stay cache-hot.
inline void gemm_nn_acc(const double* a, std::size_t m, std::size_t n, const double* b,
                        std::size_t k, double* c) {
    constexpr std::size_t kTile = 32;
    for (std::size_t i0 = 0; i0 < m; i0 += kTile) {
        const std::size_t i1 = std::min(m, i0 + kTile);
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            for (std::size_t i = i0; i < i1; ++i) {
                const double aij = a[i * n + j];
                if (aij == 0.0) continue;
                double* ci = c + i * k;
                for (std::size_t l = 0; l < k; ++l) ci[l] += aij * bj[l];
            }
        }
    }
}

// C(n x k) += A(m x n)^T . B(m x k)   -- weight-gradient accumulation; C is
// streamed once per row tile.
inline void gemm_tn_acc(const double* a, std::size_t m, std::size_t n, const double* b,
                        std::size_t k, double* c) {
    constexpr std::size_t kTile = 32;
    for (std::size_t i0 = 0; i0 < m; i0 += kTile) {
        const std::size_t i1 = std::min(m, i0 + kTile);
        for (std::size_t j = 0; j < n; ++j) {
            double* cj = c + j * k;
            for (std::size_t i = i0; i < i1; ++i) {
                const double aij = a[i * n + j];
                if (aij == 0.0) continue;
                const double* bi = b + i * k;
                for (std::size_t l = 0; l < k; ++l) cj[l] += aij * bi[l];
            }
        }
    }
}

// out(m x n) = or += A(m x n rows) summed against bias broadcast
inline void add_bias(double* c, std::size_t m, std::size_t n, const double* bias) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] += bias[j];
    }
}

// bias_grad(n) += column sums of A(m x n)
inline void colsum_acc(const double* a, std::size_t m, std::size_t n, double* out) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * n;
        for (std::size_t j = 0; j < n; ++j) out[j] += ai[j];
    }
}

} // namespace v2x::nn
