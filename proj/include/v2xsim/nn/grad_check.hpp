#pragma once

#include <algorithm>
#include <vector>

#include "v2xsim/nn/adam.hpp"
#include "v2xsim/nn/loss.hpp"
#include "v2xsim/nn/model.hpp"

namespace v2x::nn {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

// Central finite differences against backpropagation on a single sample
// (x is (T x I), batch 1). Checks a random subset of at least `subset`
// weights; relative error is |g_bp - g_fd| / max(|g_bp|, |g_fd|, 1e-12).
inline GradCheckResult grad_check(GruModel& model, const Matrix& x,
                                  const std::vector<double>& target, double eps = 1e-5,
                                  std::size_t subset = 200, std::uint64_t seed = 7) {
    const std::size_t T = x.rows();
    Workspace ws;

    auto loss = [&]() {
        const Matrix& out = forward(model, x, 1, T, ws, false);
        return mse_loss(out.data(), target.data(), target.size());
    };

    GruModel grads = model.zeros_like();
    {
        const Matrix& out = forward(model, x, 1, T, ws, true);
        Matrix d_out(1, target.size());
        mse_grad(out.data(), target.data(), target.size(), d_out.data());
        backward(model, ws, d_out, grads);
    }

    const auto wt = tensor_views(model);
    const auto gt = tensor_views(grads);
    const std::size_t total = param_count(model);

    std::vector<std::size_t> picks;
    if (total <= subset) {
        picks.resize(total);
        for (std::size_t i = 0; i < total; ++i) picks[i] = i;
    } else {
        RngStream rng(seed);
        picks.reserve(subset);
        for (std::size_t i = 0; i < subset; ++i)
            picks.push_back(static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(total) - 1)));
        std::sort(picks.begin(), picks.end());
        picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
    }

    GradCheckResult res;
    for (std::size_t flat : picks) {
        std::size_t k = 0, off = 0;
        while (flat >= off + wt[k].second) off += wt[k++].second;
        double* w = wt[k].first + (flat - off);
        const double g_bp = gt[k].first[flat - off];

        const double saved = *w;
        *w = saved + eps;
        const double lp = loss();
        *w = saved - eps;
        const double lm = loss();
        *w = saved;

        const double g_fd = (lp - lm) / (2.0 * eps);
        const double denom = std::max({std::fabs(g_bp), std::fabs(g_fd), 1e-12});
        res.max_rel_error = std::max(res.max_rel_error, std::fabs(g_bp - g_fd) / denom);
        ++res.checked;
    }
    return res;
}

} // namespace v2x::nn
