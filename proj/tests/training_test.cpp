#include <gtest/gtest.h>

#include <cstdlib>

#include "xspec/dataset.hpp"
#include "xspec/error.hpp"
#include "xspec/synth.hpp"
#include "xspec/training.hpp"

using namespace xspec;

namespace {

const std::vector<PatchRecord>& toy_records() {
    static const std::vector<PatchRecord> records = [] {
        SynthConfig s;
        s.n_subjects = 6;
        s.images_per_condition = 1;
        s.image_size = 24;
        s.noise_std = 0.005;
        s.ranges = {RangeId::R1};
        s.blur_per_range = {0.2};
        s.seed = 3;
        PreprocessConfig p;
        p.grid = {12, 12};
        p.normalize = PatchNormalization::zero_mean_unit_var;
        return patch_records(preprocess_dataset(generate_dataset(s), p));
    }();
    return records;
}

TrainConfig toy_config() {
    TrainConfig c;
    c.lr = 0.001;
    c.epochs = 3;
    c.batch_size = 8;
    c.seed = 11;
    c.genuine = GenuineMode::same_capture;
    return c;
}

CoupledModel toy_model() { return make_coupled_model("4,M,8", GlobalPool::average, 3, 5); }

}  // namespace

TEST(Training, DeterministicWithCallback) {
    CoupledModel a = toy_model(), b = toy_model();
    std::vector<int> seen;
    const auto ha = train_coupled(a, toy_records(), toy_config(), [&](const EpochStats& s) { seen.push_back(s.epoch); });
    const auto hb = train_coupled(b, toy_records(), toy_config());
    EXPECT_EQ(a, b);
    EXPECT_EQ(seen, (std::vector<int>{1, 2, 3}));
    ASSERT_EQ(ha.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(ha[i].mean_loss, hb[i].mean_loss);
    EXPECT_NE(a, toy_model());
}

TEST(Training, ThreadCountInvariant) {
    CoupledModel a = toy_model(), b = toy_model();
    setenv("XSPEC_THREADS", "1", 1);
    train_coupled(a, toy_records(), toy_config());
    setenv("XSPEC_THREADS", "4", 1);
    train_coupled(b, toy_records(), toy_config());
    unsetenv("XSPEC_THREADS");
    EXPECT_EQ(a, b);
}

TEST(Training, SeedChangesResult) {
    CoupledModel a = toy_model(), b = toy_model();
    TrainConfig c = toy_config();
    train_coupled(a, toy_records(), c);
    c.seed = 12;
    train_coupled(b, toy_records(), c);
    EXPECT_NE(a, b);
}

TEST(Training, FrozenLayersUntouchedAndPrefixCacheExact) {
    const CoupledModel start = make_coupled_model("4,4,M,8,8", GlobalPool::average, 3, 5);
    TrainConfig c = toy_config();
    c.freeze_except_last = 2;
    CoupledModel cached = start, direct = start;
    train_coupled(cached, toy_records(), c);
    c.cache_frozen_prefix = false;
    train_coupled(direct, toy_records(), c);
    EXPECT_EQ(cached, direct);
    for (const auto* pair : {&cached.vis, &cached.pol}) {
        const auto& start_net = pair == &cached.vis ? start.vis : start.pol;
        const auto convs = pair->conv_layer_indices();
        ASSERT_EQ(convs.size(), 4u);
        for (std::size_t k = 0; k < convs.size(); ++k) {
            const std::size_t l = convs[k];
            if (k < 2) {
                EXPECT_EQ(pair->params[l].weight, start_net.params[l].weight);
                EXPECT_EQ(pair->params[l].bias, start_net.params[l].bias);
                EXPECT_FALSE(pair->trainable[l]);
            } else {
                EXPECT_NE(pair->params[l].weight, start_net.params[l].weight);
            }
        }
    }
}

TEST(Training, LossDecreases) {
    CoupledModel m = toy_model();
    TrainConfig c = toy_config();
    c.epochs = 15;
    const auto h = train_coupled(m, toy_records(), c);
    EXPECT_LT(h.back().mean_loss, h.front().mean_loss);
    EXPECT_LT(h.back().mean_genuine_distance, h.back().mean_impostor_distance);
}

TEST(Training, PairCapAndResampling) {
    CoupledModel m = toy_model();
    TrainConfig c = toy_config();
    c.max_pairs_per_epoch = 10;
    c.resample_per_epoch = true;
    for (const auto& s : train_coupled(m, toy_records(), c)) EXPECT_EQ(s.pairs, 10u);
}

TEST(Training, ValidateRejects) {
    TrainConfig c = toy_config();
    c.validate();
    auto bad = [](auto mutate) {
        TrainConfig c = toy_config();
        mutate(c);
        CoupledModel m = toy_model();
        EXPECT_THROW(train_coupled(m, toy_records(), c), Error);
    };
    bad([](TrainConfig& c) { c.lr = -1; });
    bad([](TrainConfig& c) { c.momentum = 1.0; });
    bad([](TrainConfig& c) { c.epochs = 0; });
    bad([](TrainConfig& c) { c.batch_size = 0; });
    bad([](TrainConfig& c) { c.pair_ratio = 0; });
    bad([](TrainConfig& c) { c.loss.margin = -1; });
}

TEST(Training, ZeroLearningRateKeepsWeights) {
    CoupledModel m = toy_model();
    TrainConfig c = toy_config();
    c.lr = 0.0;
    train_coupled(m, toy_records(), c);
    EXPECT_EQ(m, toy_model());
}
