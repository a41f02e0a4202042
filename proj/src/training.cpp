#include "xspec/training.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "xspec/error.hpp"
#include "xspec/parallel.hpp"
#include "xspec/rng.hpp"

namespace xspec {

void TrainConfig::validate() const {
    loss.validate();
    require(std::isfinite(lr) && lr >= 0.0, ErrorKind::config, "lr must be finite and non-negative");
    require(momentum >= 0.0 && momentum < 1.0, ErrorKind::config, "momentum must lie in [0, 1)");
    require(epochs >= 1, ErrorKind::config, "epochs must be at least 1");
    require(batch_size >= 1, ErrorKind::config, "batch_size must be at least 1");
    require(std::isfinite(pair_ratio) && pair_ratio > 0.0, ErrorKind::config, "pair_ratio must be positive");
}

namespace {

// Frozen-prefix activations for one tower, indexed by record.
class PrefixCache {
public:
    PrefixCache(const EmbeddingNet& net, std::span<const PatchRecord> records, bool enabled)
        : net_(net), records_(records), start_(enabled ? first_trainable_layer(net) : 0) {
        if (start_ >= net.layers.size()) start_ = 0;  // nothing trainable: plain forward
        if (start_ > 0) maps_.resize(records.size());
    }

    void fill(std::span<const std::size_t> needed) {
        if (start_ == 0) return;
        parallel_for(needed.size(), [&](std::size_t k) {
            std::size_t i = needed[k];
            if (!maps_[i]) maps_[i] = forward_prefix(net_, records_[i].patch, start_);
        });
    }

    std::vector<double> forward(std::size_t record, ForwardCache& cache) const {
        if (start_ == 0) return xspec::forward(net_, records_[record].patch, &cache);
        return forward_from(net_, *maps_[record], start_, &cache);
    }

private:
    const EmbeddingNet& net_;
    std::span<const PatchRecord> records_;
    std::size_t start_;
    std::vector<std::optional<FeatureMap>> maps_;
};

struct PairResult {
    CoupledGradients grads;
    double loss = 0.0;
    double distance = 0.0;
};

}  // namespace

std::vector<EpochStats> train_coupled(CoupledModel& model, std::span<const PatchRecord> records,
                                      const TrainConfig& cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    model.validate();
    freeze_except_last(model.vis, cfg.freeze_except_last);
    freeze_except_last(model.pol, cfg.freeze_except_last);

    PairOptions popt;
    popt.seed = cfg.seed;
    popt.ratio = cfg.pair_ratio;
    popt.same_range = cfg.same_range;
    popt.genuine = cfg.genuine;

    PrefixCache vis_cache(model.vis, records, cfg.cache_frozen_prefix);
    PrefixCache pol_cache(model.pol, records, cfg.cache_frozen_prefix);

    SgdMomentum opt(cfg.lr, cfg.momentum);
    std::vector<PatchPair> pairs;
    std::vector<EpochStats> history;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (epoch == 1 || cfg.resample_per_epoch) {
            PairOptions o = popt;
            if (cfg.resample_per_epoch) o.seed = epoch_pair_seed(cfg.seed, epoch);
            pairs = generate_pairs(records, o);
        } else {
            Rng rng(derive_seed(cfg.seed, "epoch:" + std::to_string(epoch)));
            rng.shuffle(std::span(pairs));
        }
        const std::size_t n = cfg.max_pairs_per_epoch > 0 ? std::min(cfg.max_pairs_per_epoch, pairs.size())
                                                          : pairs.size();
        {
            std::vector<std::size_t> vis_needed, pol_needed;
            for (std::size_t k = 0; k < n; ++k) {
                vis_needed.push_back(pairs[k].vis);
                pol_needed.push_back(pairs[k].pol);
            }
            vis_cache.fill(vis_needed);
            pol_cache.fill(pol_needed);
        }

        EpochStats stats;
        stats.epoch = epoch;
        double gen_sum = 0.0, imp_sum = 0.0;
        std::size_t gen_n = 0, imp_n = 0;
        std::vector<PairResult> slots;
        for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
            const std::size_t end = std::min(n, begin + cfg.batch_size);
            slots.assign(end - begin, PairResult{});
            parallel_for(end - begin, [&](std::size_t k) {
                const PatchPair& p = pairs[begin + k];
                ForwardCache vc, pc;
                const std::vector<double> z1 = vis_cache.forward(p.vis, vc);
                const std::vector<double> z2 = pol_cache.forward(p.pol, pc);
                PairResult& r = slots[k];
                r.loss = contrastive_loss(z1, z2, p.y_cont, cfg.loss);
                r.distance = pair_distance(z1, z2);
                const PairGradient g = contrastive_grad(z1, z2, p.y_cont, cfg.loss);
                r.grads.vis = backward(model.vis, vc, g.z1);
                r.grads.pol = backward(model.pol, pc, g.z2);
            });
            CoupledGradients total = CoupledGradients::zeros_like(model);
            const double inv = 1.0 / static_cast<double>(end - begin);
            for (std::size_t k = 0; k < slots.size(); ++k) {
                total.add(slots[k].grads, inv);
                stats.mean_loss += slots[k].loss;
                if (pairs[begin + k].y_cont == 0) {
                    gen_sum += slots[k].distance;
                    ++gen_n;
                } else {
                    imp_sum += slots[k].distance;
                    ++imp_n;
                }
            }
            opt.step(model, total);
        }
        stats.pairs = n;
        stats.mean_loss = n ? stats.mean_loss / static_cast<double>(n) : 0.0;
        stats.mean_genuine_distance = gen_n ? gen_sum / static_cast<double>(gen_n) : 0.0;
        stats.mean_impostor_distance = imp_n ? imp_sum / static_cast<double>(imp_n) : 0.0;
        history.push_back(stats);
        if (on_epoch) on_epoch(stats);
    }
    return history;
}

}  // namespace xspec
