#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>
#include <vector>

#include "v2xsim/core/error.hpp"
#include "v2xsim/nn/adam.hpp"
#include "v2xsim/nn/dataset.hpp"
#include "v2xsim/nn/loss.hpp"
#include "v2xsim/nn/model.hpp"

namespace v2x::nn {

struct TrainOptions {
    int epochs = 50;
    std::size_t batch = 64;
    double lr = 1e-3;
    double lr_decay = 1.0;    // multiply the rate by this every lr_decay_every batches
    long lr_decay_every = 0;  // 0 = constant rate
    std::uint64_t seed = 1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 5.0;       // 0 disables clipping
    int val_check_every = 0;      // batches between mid-epoch val checks; 0 = off
    std::size_t val_check_subset = 128;
    double early_stop_val_mse = 0.0; // stop once val MSE reaches this; 0 = off
    long max_batches = 0;            // hard step budget; 0 = off
    int threads = 2;
    std::size_t eval_batch = 64;
    bool verbose = false;
};

struct EpochStats {
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double best_val_mse = std::numeric_limits<double>::infinity();
    long batches_run = 0;
    bool early_stopped = false;
};

namespace detail {

// Gather items idx[lo..hi) into the step-major batch layout.
inline void fill_batch(const Dataset& ds, const std::vector<std::size_t>& idx, std::size_t lo,
                       std::size_t hi, Matrix& x, Matrix& y) {
    const auto& ss = *ds.seqs;
    const std::size_t B = hi - lo;
    const std::size_t T = ss.steps;
    const std::size_t F = ss.features;
    const std::size_t H = ss.horizon;
    if (x.rows() != T * B || x.cols() != F) x = Matrix(T * B, F);
    if (y.rows() != B || y.cols() != H) y = Matrix(B, H);
    for (std::size_t b = 0; b < B; ++b) {
        const auto& in = ds.input(idx[lo + b]);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t f = 0; f < F; ++f) x(t * B + b, f) = in[t * F + f];
        const auto& tgt = ds.target_of(idx[lo + b]);
        for (std::size_t k = 0; k < H; ++k) y(b, k) = tgt[k];
    }
}

struct BatchWorker {
    Workspace ws;
    Matrix x, y, d_out;
    GruModel grads;
    double loss_sum = 0.0;

    void init(const GruModel& model) { grads = model.zeros_like(); }

    // Summed per-item loss and gradients for items idx[lo..hi).
    void run(const GruModel& model, const Dataset& ds, const std::vector<std::size_t>& idx,
             std::size_t lo, std::size_t hi) {
        loss_sum = 0.0;
        grads.zero();
        if (lo >= hi) return;
        fill_batch(ds, idx, lo, hi, x, y);
        const std::size_t B = hi - lo;
        const std::size_t T = ds.seqs->steps;
        const std::size_t H = ds.seqs->horizon;
        const Matrix& out = forward(model, x, B, T, ws, true);
        if (d_out.rows() != B || d_out.cols() != H) d_out = Matrix(B, H);
        for (std::size_t b = 0; b < B; ++b) {
            loss_sum += mse_loss(out.row(b), y.row(b), H);
            mse_grad(out.row(b), y.row(b), H, d_out.row(b));
        }
        backward(model, ws, d_out, grads);
    }
};

} // namespace detail

// Mean per-item MSE of `model` over the given items; forward only.
inline double evaluate(const GruModel& model, const Dataset& ds,
                       const std::vector<std::size_t>& idx, std::size_t batch = 64) {
    if (idx.empty()) return 0.0;
    Workspace ws;
    Matrix x, y;
    const std::size_t T = ds.seqs->steps;
    const std::size_t H = ds.seqs->horizon;
    double sum = 0.0;
    for (std::size_t lo = 0; lo < idx.size(); lo += batch) {
        const std::size_t hi = std::min(idx.size(), lo + batch);
        detail::fill_batch(ds, idx, lo, hi, x, y);
        const Matrix& out = forward(model, x, hi - lo, T, ws, false);
        for (std::size_t b = 0; b < hi - lo; ++b) sum += mse_loss(out.row(b), y.row(b), H);
    }
    return sum / static_cast<double>(idx.size());
}

inline double evaluate_split(const GruModel& model, const Dataset& ds, Split split,
                             std::size_t batch = 64) {
    return evaluate(model, ds, ds.seqs->indices(split), batch);
}

// Mini-batch Adam with a fixed two-way batch split across threads; gradient
// reduction order is fixed, so a given (dataset, options) pair reproduces the
// same weights bit-for-bit. Returns with the best-validation weights loaded.
inline TrainReport train(GruModel& model, const Dataset& ds, const TrainOptions& opts) {
    model.validate_chain();
    auto train_idx = ds.seqs->indices(Split::train);
    const auto val_idx = ds.seqs->indices(Split::val);
    if (train_idx.empty()) throw ConfigError("train: dataset has no training sequences");

    std::vector<std::size_t> val_probe = val_idx;
    if (val_probe.size() > opts.val_check_subset)
        val_probe.resize(opts.val_check_subset);

    Adam adam(model, {opts.lr, opts.beta1, opts.beta2, opts.eps});
    GruModel merged = model.zeros_like();
    const int n_workers = opts.threads >= 2 ? 2 : 1;
    std::vector<detail::BatchWorker> workers(static_cast<std::size_t>(n_workers));
    for (auto& w : workers) w.init(model);

    TrainReport report;
    GruModel best_weights;
    bool have_best = false;
    RngStream shuffle_rng = RngStream(opts.seed).fork(0x7EA1u);

    auto note_val = [&](double v) {
        if (v < report.best_val_mse) {
            report.best_val_mse = v;
            best_weights = model;
            have_best = true;
        }
    };

    bool stop = false;
    for (int epoch = 0; epoch < opts.epochs && !stop; ++epoch) {
        for (std::size_t i = train_idx.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(
                shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(train_idx[i - 1], train_idx[j]);
        }

        double epoch_loss = 0.0;
        std::size_t epoch_items = 0;
        for (std::size_t lo = 0; lo < train_idx.size() && !stop; lo += opts.batch) {
            const std::size_t hi = std::min(train_idx.size(), lo + opts.batch);
            const std::size_t B = hi - lo;
            const std::size_t mid = lo + B / 2;

            if (n_workers == 2 && B > 1) {
                std::thread th([&] { workers[1].run(model, ds, train_idx, mid, hi); });
                workers[0].run(model, ds, train_idx, lo, mid);
                th.join();
            } else {
                workers[0].run(model, ds, train_idx, lo, hi);
                if (n_workers == 2) {
                    workers[1].loss_sum = 0.0;
                    workers[1].grads.zero();
                }
            }

            const double batch_loss =
                (workers[0].loss_sum + (n_workers == 2 ? workers[1].loss_sum : 0.0)) /
                static_cast<double>(B);
            if (!std::isfinite(batch_loss))
                throw TrainingDiverged("non-finite loss at batch " +
                                       std::to_string(report.batches_run));

            const double inv_b = 1.0 / static_cast<double>(B);
            const auto g0 = tensor_views(workers[0].grads);
            const auto gm = tensor_views(merged);
            if (n_workers == 2) {
                const auto g1 = tensor_views(workers[1].grads);
                for (std::size_t k = 0; k < gm.size(); ++k)
                    for (std::size_t i = 0; i < gm[k].second; ++i)
                        gm[k].first[i] = (g0[k].first[i] + g1[k].first[i]) * inv_b;
            } else {
                for (std::size_t k = 0; k < gm.size(); ++k)
                    for (std::size_t i = 0; i < gm[k].second; ++i)
                        gm[k].first[i] = g0[k].first[i] * inv_b;
            }
            if (opts.clip_norm > 0.0) clip_grad_norm(merged, opts.clip_norm);
            adam.step(model, merged);

            epoch_loss += batch_loss * static_cast<double>(B);
            epoch_items += B;
            ++report.batches_run;
            if (opts.lr_decay_every > 0 && opts.lr_decay != 1.0 &&
                report.batches_run % opts.lr_decay_every == 0)
                adam.set_lr(adam.lr() * opts.lr_decay);

            if (opts.val_check_every > 0 && !val_probe.empty() &&
                report.batches_run % opts.val_check_every == 0) {
                const double v = evaluate(model, ds, val_probe, opts.eval_batch);
                note_val(v);
                if (opts.verbose)
                    std::fprintf(stderr, "  batch %ld: val %.5f\n", report.batches_run, v);
                if (opts.early_stop_val_mse > 0.0 && v <= opts.early_stop_val_mse) {
                    report.early_stopped = true;
                    stop = true;
                }
            }
            if (opts.max_batches > 0 && report.batches_run >= opts.max_batches) stop = true;
        }

        EpochStats s;
        s.train_mse = epoch_items ? epoch_loss / static_cast<double>(epoch_items) : 0.0;
        s.val_mse = val_idx.empty() ? s.train_mse : evaluate(model, ds, val_idx, opts.eval_batch);
        if (!val_idx.empty()) note_val(s.val_mse);
        report.epochs.push_back(s);
        if (opts.verbose)
            std::fprintf(stderr, "epoch %d: train %.5f val %.5f\n", epoch, s.train_mse,
                         s.val_mse);
    }

    if (have_best) model = best_weights;
    return report;
}

} // namespace v2x::nn
