#pragma once

#include <array>
#include <memory>
#include <vector>

#include "v2xsim/core/rng.hpp"
#include "v2xsim/mobility/kinematics.hpp"
#include "v2xsim/nn/matrix.hpp"

namespace v2x::nn {

enum class Split { train, val, test };

inline const char* to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

// Windowed sequences shared by the three models: inputs are the normalized
// (speed, sin, cos) rows, targets the next `horizon` values of each feature.
struct SequenceSet {
    std::size_t steps = 600;
    std::size_t features = 3;
    std::size_t horizon = 10;
    double max_speed = 50.0;

    std::vector<std::vector<double>> inputs; // each steps*features, step-major
    std::array<std::vector<std::vector<double>>, 3> targets; // speed, sine, cosine
    std::vector<Split> split;
    std::vector<std::pair<VehicleId, std::size_t>> origin; // (vehicle, start sample)
    std::vector<std::string> warnings;

    std::size_t size() const { return inputs.size(); }

    std::vector<std::size_t> indices(Split s) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < split.size(); ++i)
            if (split[i] == s) out.push_back(i);
        return out;
    }
};

// One model's view: which target feature to regress.
struct Dataset {
    std::shared_ptr<const SequenceSet> seqs;
    int target = 0; // 0 speed, 1 sine, 2 cosine

    std::size_t size() const { return seqs->size(); }
    const std::vector<double>& input(std::size_t i) const { return seqs->inputs[i]; }
    const std::vector<double>& target_of(std::size_t i) const {
        return seqs->targets[static_cast<std::size_t>(target)][i];
    }
};

// Sliding windows with 1 s stride: steps inputs followed by horizon targets.
// Sequences are randomly permuted into an exact 80/10/10 partition.
inline std::shared_ptr<SequenceSet> build_sequences(const std::vector<mob::Trace>& traces,
                                                    double max_speed, std::uint64_t seed,
                                                    std::size_t steps = 600,
                                                    std::size_t horizon = 10,
                                                    std::size_t stride = 10) {
    auto set = std::make_shared<SequenceSet>();
    set->steps = steps;
    set->horizon = horizon;
    set->max_speed = max_speed;

    for (const auto& tr : traces) {
        const std::size_t n = tr.samples.size();
        if (n < steps + horizon) {
            set->warnings.push_back("vehicle " + std::to_string(tr.vehicle) +
                                    ": trace shorter than one sequence, skipped");
            continue;
        }
        for (std::size_t s0 = 0; s0 + steps + horizon <= n; s0 += stride) {
            std::vector<double> in(steps * 3);
            for (std::size_t k = 0; k < steps; ++k) {
                const auto& kin = tr.samples[s0 + k];
                const double r = mob::deg2rad(kin.heading);
                in[k * 3] = kin.speed / max_speed;
                in[k * 3 + 1] = std::sin(r);
                in[k * 3 + 2] = std::cos(r);
            }
            std::vector<double> t_speed(horizon), t_sin(horizon), t_cos(horizon);
            for (std::size_t k = 0; k < horizon; ++k) {
                const auto& kin = tr.samples[s0 + steps + k];
                const double r = mob::deg2rad(kin.heading);
                t_speed[k] = kin.speed / max_speed;
                t_sin[k] = std::sin(r);
                t_cos[k] = std::cos(r);
            }
            set->inputs.push_back(std::move(in));
            set->targets[0].push_back(std::move(t_speed));
            set->targets[1].push_back(std::move(t_sin));
            set->targets[2].push_back(std::move(t_cos));
            set->origin.emplace_back(tr.vehicle, s0);
        }
    }

    // Exact-count permutation split: sizes land within one sequence of
    // 80%/10%/10%, assignment is random.
    const std::size_t n = set->inputs.size();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    RngStream rng = RngStream(seed).fork(0xDA7Au);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j =
            static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(perm[i - 1], perm[j]);
    }
    const std::size_t n_val = static_cast<std::size_t>(n * 0.1 + 0.5);
    const std::size_t n_test = static_cast<std::size_t>(n * 0.1 + 0.5);
    set->split.assign(n, Split::train);
    for (std::size_t k = 0; k < n_val && k < n; ++k) set->split[perm[k]] = Split::val;
    for (std::size_t k = n_val; k < n_val + n_test && k < n; ++k)
        set->split[perm[k]] = Split::test;
    return set;
}

// build_dataset: the three per-feature views over one shared sequence set.
inline std::array<Dataset, 3> build_dataset(const std::vector<mob::Trace>& traces,
                                            double max_speed, std::uint64_t seed) {
    auto seqs = build_sequences(traces, max_speed, seed);
    return {Dataset{seqs, 0}, Dataset{seqs, 1}, Dataset{seqs, 2}};
}

} // namespace v2x::nn
