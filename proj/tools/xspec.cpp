#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "xspec/checkpoint.hpp"
#include "xspec/config.hpp"
#include "xspec/dataset.hpp"
#include "xspec/error.hpp"
#include "xspec/eval.hpp"
#include "xspec/io.hpp"
#include "xspec/pipeline.hpp"
#include "xspec/rng.hpp"
#include "xspec/synth.hpp"
#include "xspec/training.hpp"

namespace fs = std::filesystem;
using namespace xspec;

namespace {

constexpr const char* kResolvedConfig = "resolved_config.json";

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return 2;
        case ErrorKind::io: return 3;
        case ErrorKind::shape_mismatch: return 4;
        case ErrorKind::format: return 5;
        case ErrorKind::invalid_argument: return 6;
    }
    return 1;
}

std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

// Config file, then --set pairs, then dedicated flags, in that order.
struct ConfigSources {
    std::string config_path;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> flags;

    void add_to(CLI::App* app) {
        app->add_option("--config", config_path, "Flat JSON config file");
        app->add_option("--set", sets, "Override one key, key=value (repeatable)");
    }

    // Binds --<flag> to config key `key`.
    void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        app->add_option_function<std::string>(
            "--" + flag, [this, key](const std::string& v) { flags.emplace_back(key, v); }, help);
    }

    RunConfig resolve() const {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        for (const std::string& kv : sets) {
            const auto eq = kv.find('=');
            require(eq != std::string::npos && eq > 0, ErrorKind::config, "--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        for (const auto& [k, v] : flags) cfg.set(k, v);
        cfg.validate();
        return cfg;
    }
};

std::string config_text(const RunConfig& cfg) { return cfg.to_json().dump(2) + "\n"; }

void require_dir(const fs::path& p, std::string_view what) {
    require(fs::is_directory(p), ErrorKind::io, std::string(what) + " directory not found: " + p.string());
}

fs::path sibling(const fs::path& file, const std::string& suffix) {
    fs::path out = file;
    out.replace_extension();
    return out.string() + suffix;
}

int cmd_synth(const ConfigSources& src, const fs::path& out) {
    const RunConfig cfg = src.resolve();
    const RawDataset ds = generate_dataset(cfg.synth);
    write_dataset(out, ds);
    write_file(out / kResolvedConfig, config_text(cfg));
    std::cout << "wrote " << ds.images.size() << " images to " << out.string() << "\n";
    return 0;
}

int cmd_preprocess(const ConfigSources& src, const fs::path& in, const fs::path& out) {
    const RunConfig cfg = src.resolve();
    require_dir(in, "input");
    const PatchDataset ds = preprocess_dataset(load_dataset(in), cfg.preprocess);
    write_patch_dataset(out, ds);
    write_file(out / kResolvedConfig, config_text(cfg));
    std::size_t patches = 0;
    for (const PatchImage& img : ds.images) patches += img.patches.size();
    std::cout << "wrote " << patches << " patches from " << ds.images.size() << " images to " << out.string() << "\n";
    return 0;
}

PatchDataset load_patches(const fs::path& dir, const RunConfig& cfg) {
    require_dir(dir, "data");
    return with_probe_input(read_patch_dataset(dir), cfg.probe_input);
}

CoupledModel start_model(const std::string& init, const RunConfig& cfg) {
    if (init.empty()) return initial_model(cfg);
    return load_checkpoint(init).model;
}

int cmd_train(const ConfigSources& src, const fs::path& data_dir, const fs::path& out, const std::string& init,
              const std::string& log_path) {
    const RunConfig cfg = src.resolve();
    const PatchDataset data = load_patches(data_dir, cfg);
    CoupledModel model = start_model(init, cfg);
    const std::vector<PatchRecord> records = patch_records(data);

    std::ostringstream log;
    log << "epoch,mean_loss,mean_genuine_distance,mean_impostor_distance,pairs\n";
    train_coupled(model, records, cfg.train, [&](const EpochStats& s) {
        log << s.epoch << ',' << format_double(s.mean_loss) << ',' << format_double(s.mean_genuine_distance) << ','
            << format_double(s.mean_impostor_distance) << ',' << s.pairs << '\n';
        std::cerr << "epoch " << s.epoch << " loss " << s.mean_loss << " genuine " << s.mean_genuine_distance
                  << " impostor " << s.mean_impostor_distance << "\n";
    });

    const std::string resolved = config_text(cfg);
    save_checkpoint(out, model, {{"config", resolved}, {"init", init}});
    write_file(log_path.empty() ? sibling(out, ".train_log.csv") : fs::path(log_path), log.str());
    write_file(sibling(out, ".config.json"), resolved);
    return 0;
}

int cmd_embed(const ConfigSources& src, const fs::path& ckpt, const fs::path& data_dir, const fs::path& out) {
    const RunConfig cfg = src.resolve();
    const Checkpoint cp = load_checkpoint(ckpt);
    const PatchDataset data = load_patches(data_dir, cfg);
    export_embeddings(out, embed_images(cp.model, data.images));
    write_file(sibling(out, ".config.json"), config_text(cfg));
    return 0;
}

int cmd_eval(const ConfigSources& src, const fs::path& ckpt, const fs::path& data_dir, const fs::path& out) {
    const RunConfig cfg = src.resolve();
    const CoupledModel start = ckpt.empty() ? initial_model(cfg) : load_checkpoint(ckpt).model;
    const PatchDataset data = load_patches(data_dir, cfg);
    const TrainFn fn = cfg.finetune ? finetune_fn(data, start, cfg.train) : fixed_model_fn(start);
    const TrialsReport report = run_trials(data, cfg.protocol, fn);

    write_file(out / "cmc.csv", cmc_csv(report.overall().mean_cmc));
    write_file(out / "rank1.json", rank1_json(report));
    write_file(out / "table.txt", strata_table(report, to_string(cfg.probe_input)));
    write_file(out / kResolvedConfig, config_text(cfg));
    std::cout << strata_table(report, to_string(cfg.probe_input));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-spectrum coupled embedding pipeline"};
    app.require_subcommand(1);

    ConfigSources synth_src, pre_src, train_src, embed_src, eval_src;
    std::string out, in, data, ckpt, init, log_path;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic paired-modality dataset");
    synth_src.add_to(synth);
    synth->add_option("--out", out, "Output dataset directory")->required();
    synth_src.bind(synth, "subjects", "n_subjects", "Number of subjects");
    synth_src.bind(synth, "image-size", "image_size", "Image side in pixels");
    synth_src.bind(synth, "map", "cross_modal_map", "identity, linear_mix or nonlinear_warp");
    synth_src.bind(synth, "seed", "synth_seed", "Dataset seed");

    auto* pre = app.add_subcommand("preprocess", "Stokes images, DoG filtering and patching");
    pre_src.add_to(pre);
    pre->add_option("--in", in, "Dataset directory with manifest.csv")->required();
    pre->add_option("--out", out, "Output patch directory")->required();
    pre_src.bind(pre, "sigma0", "sigma0", "Inner DoG sigma");
    pre_src.bind(pre, "sigma1", "sigma1", "Outer DoG sigma");
    pre_src.bind(pre, "radius", "dog_radius", "DoG kernel radius");
    pre_src.bind(pre, "patch", "patch", "Patch side");
    pre_src.bind(pre, "stride", "stride", "Patch stride");
    pre_src.bind(pre, "convention", "convention", "difference or as_written");
    pre_src.bind(pre, "normalize", "normalize", "none or zero_mean_unit_var");

    auto* train = app.add_subcommand("train", "Train the coupled towers with the contrastive loss");
    train_src.add_to(train);
    train->add_option("--data", data, "Patch directory")->required();
    train->add_option("--out", out, "Checkpoint path")->required();
    train->add_option("--init", init, "Start from this checkpoint");
    train->add_option("--log", log_path, "Per-epoch CSV log (default: next to the checkpoint)");
    for (const char* k : {"margin", "lr", "momentum", "epochs", "batch", "seed"}) train_src.bind(train, k, k, k);
    train_src.bind(train, "freeze-except-last", "freeze_except_last", "Trainable trailing conv layers");
    train_src.bind(train, "arch", "architecture", "Tower architecture");
    train_src.bind(train, "probe-input", "probe_input", "polarimetric or thermal_s0");
    train->add_flag_function(
        "--same-range", [&](std::int64_t) { train_src.flags.emplace_back("same_range", "true"); },
        "Impostors only from the same range");
    train->add_flag_function(
        "--resample-per-epoch", [&](std::int64_t) { train_src.flags.emplace_back("resample_per_epoch", "true"); },
        "Draw fresh impostors every epoch");

    auto* embed = app.add_subcommand("embed", "Write image-level embeddings");
    embed_src.add_to(embed);
    embed->add_option("--ckpt", ckpt, "Checkpoint")->required();
    embed->add_option("--data", data, "Patch directory")->required();
    embed->add_option("--out", out, "Embedding CSV")->required();
    embed_src.bind(embed, "probe-input", "probe_input", "polarimetric or thermal_s0");

    auto* eval = app.add_subcommand("eval-cmc", "Repeated-split identification with CMC reports");
    eval_src.add_to(eval);
    eval->add_option("--ckpt", ckpt, "Starting checkpoint (fresh initialization when omitted)");
    eval->add_option("--data", data, "Patch directory")->required();
    eval->add_option("--out", out, "Report directory")->required();
    eval_src.bind(eval, "trials", "trials", "Number of random splits");
    eval_src.bind(eval, "train-subjects", "train_subjects", "Training subjects per split");
    eval_src.bind(eval, "seed", "seed", "Master seed");
    eval_src.bind(eval, "probe-input", "probe_input", "polarimetric or thermal_s0");
    eval_src.bind(eval, "gallery-range", "gallery_range", "Range of the gallery images");
    eval->add_flag_function(
        "--patch-vote", [&](std::int64_t) { eval_src.flags.emplace_back("match", "patch_vote"); },
        "Per-patch majority vote instead of mean embeddings");
    eval->add_flag_function(
        "--no-finetune", [&](std::int64_t) { eval_src.flags.emplace_back("finetune", "false"); },
        "Evaluate the checkpoint as is");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "xspec: error kind=config message=\"" << one_line(e.what()) << "\"\n";
        return exit_code(ErrorKind::config);
    } catch (const Error& e) {
        std::cerr << "xspec: error kind=" << to_string(e.kind()) << " message=\"" << one_line(e.what()) << "\"\n";
        return exit_code(e.kind());
    }

    try {
        if (*synth) return cmd_synth(synth_src, out);
        if (*pre) return cmd_preprocess(pre_src, in, out);
        if (*train) return cmd_train(train_src, data, out, init, log_path);
        if (*embed) return cmd_embed(embed_src, ckpt, data, out);
        if (*eval) return cmd_eval(eval_src, ckpt, data, out);
    } catch (const Error& e) {
        std::cerr << "xspec: error kind=" << to_string(e.kind()) << " message=\"" << one_line(e.what()) << "\"\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "xspec: error kind=internal message=\"" << one_line(e.what()) << "\"\n";
        return 1;
    }
    return 1;
}
