#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xspec/dataset.hpp"
#include "xspec/eval.hpp"
#include "xspec/net.hpp"
#include "xspec/synth.hpp"
#include "xspec/training.hpp"

namespace xspec {

// Every tunable of the pipeline as one flat key/value document.
struct RunConfig {
    SynthConfig synth;
    PreprocessConfig preprocess;
    std::string architecture{kDefaultArchitecture};
    GlobalPool global_pool = GlobalPool::average;
    TrainConfig train;
    TrialProtocol protocol;
    // Fine-tune a copy of the checkpoint on each trial's training subjects.
    bool finetune = true;
    Modality probe_input = Modality::polarimetric;

    // Throws Error(config) on unknown keys or ill-typed values.
    void apply(const nlohmann::json& doc);
    // Sets one key from its command-line spelling; lists are comma-separated.
    void set(std::string_view key, std::string_view value);
    nlohmann::ordered_json to_json() const;
    void validate() const;

    static std::vector<std::string> keys();
};

RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json parse_json_document(std::string_view text, std::string_view what);

}  // namespace xspec
