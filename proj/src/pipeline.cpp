#include "xspec/pipeline.hpp"

#include "xspec/error.hpp"

namespace xspec {

CoupledModel initial_model(const RunConfig& cfg) {
    return make_coupled_model(cfg.architecture, cfg.global_pool, 3, cfg.train.seed);
}

PatchDataset with_probe_input(const PatchDataset& data, Modality probe_input) {
    if (probe_input == Modality::thermal_s0) return to_thermal_only(data);
    require(probe_input == Modality::polarimetric, ErrorKind::config, "probe_input must be polarimetric or thermal_s0");
    return data;
}

TrainFn finetune_fn(const PatchDataset& data, const CoupledModel& start, const TrainConfig& cfg) {
    return [&data, start, cfg](std::span<const std::string> train, std::size_t, std::uint64_t trial_seed) {
        CoupledModel m = start;
        TrainConfig c = cfg;
        c.seed = trial_seed;
        const std::vector<PatchRecord> records = patch_records(data, train);
        train_coupled(m, records, c);
        return m;
    };
}

TrainFn fixed_model_fn(const CoupledModel& model) {
    return [model](std::span<const std::string>, std::size_t, std::uint64_t) { return model; };
}

}  // namespace xspec
