#pragma once

#include "xspec/config.hpp"
#include "xspec/dataset.hpp"
#include "xspec/eval.hpp"
#include "xspec/training.hpp"

namespace xspec {

// Freshly initialized coupled model for the configured architecture.
CoupledModel initial_model(const RunConfig& cfg);

// The dataset as seen by the polarimetric tower: unchanged for
// polarimetric probes, S0 replicated for thermal_s0.
PatchDataset with_probe_input(const PatchDataset& data, Modality probe_input);

// Per trial: copy `start`, train it on the trial's training subjects with
// `cfg` (seeded by the trial seed) and return it.
TrainFn finetune_fn(const PatchDataset& data, const CoupledModel& start, const TrainConfig& cfg);

// Returns `model` unchanged for every trial.
TrainFn fixed_model_fn(const CoupledModel& model);

}  // namespace xspec
