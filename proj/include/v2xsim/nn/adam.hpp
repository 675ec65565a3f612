#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "v2xsim/nn/model.hpp"

namespace v2x::nn {

struct AdamParams {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

inline std::vector<std::pair<double*, std::size_t>> tensor_views(GruModel& m) {
    std::vector<std::pair<double*, std::size_t>> out;
    for_each_tensor(m, [&](const std::string&, double* d, std::size_t n) {
        out.emplace_back(d, n);
    });
    return out;
}

class Adam {
public:
    Adam() = default;
    Adam(const GruModel& model, AdamParams p) : p_(p) {
        const std::size_t n = param_count(model);
        m_.assign(n, 0.0);
        v_.assign(n, 0.0);
    }

    // grads mirrors the model's tensor layout (zeros_like of it).
    void step(GruModel& model, GruModel& grads) {
        ++t_;
        const double bc1 = 1.0 - std::pow(p_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(p_.beta2, static_cast<double>(t_));
        const auto wt = tensor_views(model);
        const auto gt = tensor_views(grads);
        std::size_t off = 0;
        for (std::size_t k = 0; k < wt.size(); ++k) {
            double* w = wt[k].first;
            const double* g = gt[k].first;
            const std::size_t len = wt[k].second;
            for (std::size_t i = 0; i < len; ++i) {
                double& m = m_[off + i];
                double& v = v_[off + i];
                m = p_.beta1 * m + (1.0 - p_.beta1) * g[i];
                v = p_.beta2 * v + (1.0 - p_.beta2) * g[i] * g[i];
                w[i] -= p_.lr * (m / bc1) / (std::sqrt(v / bc2) + p_.eps);
            }
            off += len;
        }
    }

    long steps() const { return t_; }
    double lr() const { return p_.lr; }
    void set_lr(double lr) { p_.lr = lr; }

private:
    AdamParams p_;
    std::vector<double> m_, v_;
    long t_ = 0;
};

// Global L2 norm of all gradients; scales them down in place when the norm
// exceeds max_norm. Returns the pre-clip norm.
inline double clip_grad_norm(GruModel& grads, double max_norm) {
    double sq = 0.0;
    for_each_tensor(grads, [&](const std::string&, double* g, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) sq += g[i] * g[i];
    });
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double s = max_norm / norm;
        for_each_tensor(grads, [&](const std::string&, double* g, std::size_t len) {
            for (std::size_t i = 0; i < len; ++i) g[i] *= s;
        });
    }
    return norm;
}

} // namespace v2x::nn
