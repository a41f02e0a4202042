#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "xspec/loss.hpp"
#include "xspec/net.hpp"
#include "xspec/pairgen.hpp"

namespace xspec {

struct TrainConfig {
    ContrastiveConfig loss;
    double lr = 0.01;
    double momentum = 0.9;
    int epochs = 10;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    double pair_ratio = 1.0;
    bool same_range = false;
    GenuineMode genuine = GenuineMode::all_cross_modal;
    bool resample_per_epoch = false;
    // Pairs visited per epoch after shuffling; 0 visits all of them.
    std::size_t max_pairs_per_epoch = 0;
    // Applied to both towers before training; negative trains every conv.
    int freeze_except_last = -1;
    // Reuse frozen-prefix activations across epochs. Results are identical
    // either way.
    bool cache_frozen_prefix = true;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double mean_loss = 0.0;
    double mean_genuine_distance = 0.0;
    double mean_impostor_distance = 0.0;
    std::size_t pairs = 0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Trains the coupled model on cross-modal pairs drawn from `records`. Each
// step averages the per-pair gradients of one batch in pair order, so the
// result does not depend on the worker count.
std::vector<EpochStats> train_coupled(CoupledModel& model, std::span<const PatchRecord> records,
                                      const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace xspec
