#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xspec/dataset.hpp"
#include "xspec/labels.hpp"
#include "xspec/net.hpp"

namespace xspec {

struct EmbeddingRecord {
    std::string subject_id;
    Modality modality = Modality::visible;
    std::string image_id;
    RangeId range = RangeId::R1;
    Condition condition = Condition::baseline;
    std::vector<double> embedding;
    // Per-patch embeddings in grid order; only needed for patch voting.
    std::vector<std::vector<double>> patch_embeddings;
};

// Mean of the patch embeddings.
std::vector<double> image_embedding(std::span<const std::vector<double>> patch_embeddings);

struct RankedSubject {
    std::string subject_id;
    double distance = 0.0;
    std::size_t votes = 0;  // patch voting only
};

// Gallery entries by ascending Euclidean distance to the probe, ties by
// ascending subject id.
std::vector<RankedSubject> identify(const EmbeddingRecord& probe, std::span<const EmbeddingRecord> gallery);

// Each probe patch votes for the gallery subject whose co-located patch
// embedding is nearest. Ranked by votes (descending), then image-level
// distance, then subject id.
std::vector<RankedSubject> identify_patch_vote(const EmbeddingRecord& probe,
                                               std::span<const EmbeddingRecord> gallery);

enum class MatchMode { mean_embedding, patch_vote };

MatchMode parse_match_mode(std::string_view name);
std::string_view to_string(MatchMode mode);

struct CmcCurve {
    std::vector<double> rates;  // rates[k - 1] is the rate at rank k

    std::size_t gallery_size() const noexcept { return rates.size(); }
    double at(std::size_t rank) const;  // 1-based
    double rank1() const { return at(1); }
};

// Throws Error(invalid_argument) when a probe's subject is not in the
// gallery exactly once.
CmcCurve cmc(std::span<const EmbeddingRecord> probes, std::span<const EmbeddingRecord> gallery,
             MatchMode mode = MatchMode::mean_embedding);

// Embeds every image of `images` with the tower matching its modality.
std::vector<EmbeddingRecord> embed_images(const CoupledModel& model, std::span<const PatchImage> images,
                                          bool keep_patches = false);

// One entry per subject: the average of its baseline visible embeddings at
// `range` (patch embeddings averaged per position).
std::vector<EmbeddingRecord> build_gallery(std::span<const EmbeddingRecord> records, RangeId range);

struct TrialProtocol {
    std::size_t n_train = 25;
    std::size_t n_trials = 100;
    std::uint64_t seed = 0;
    RangeId gallery_range = RangeId::R1;
    MatchMode match = MatchMode::mean_embedding;

    void validate() const;
};

// Returns the model to evaluate after training on the given subjects.
using TrainFn = std::function<CoupledModel(std::span<const std::string> train_subjects, std::size_t trial,
                                           std::uint64_t trial_seed)>;

struct StratumResult {
    std::string name;
    CmcCurve mean_cmc;
    std::vector<double> rank1;  // per trial
    std::size_t probes = 0;     // per trial
};

struct TrialsReport {
    std::vector<StratumResult> strata;  // strata[0] is "Overall"
    std::vector<SubjectSplit> splits;

    const StratumResult& overall() const { return strata.at(0); }
    const StratumResult* find(std::string_view name) const;
};

// Strata: Overall, Range 1 Expression, Range 1/2/3 Baseline. Probes are all
// polarimetric (or thermal_s0) images of the test subjects.
TrialsReport run_trials(const PatchDataset& data, const TrialProtocol& protocol, const TrainFn& train_fn);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, 0 for a single value
};
MeanStd mean_std(std::span<const double> values);

// subject_id,modality,image_id,range,condition,e0,e1,... at 17 significant digits.
void export_embeddings(const std::filesystem::path& path, std::span<const EmbeddingRecord> records);
std::string embeddings_csv(std::span<const EmbeddingRecord> records);
std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path);

std::string cmc_csv(const CmcCurve& curve);
std::string rank1_json(const TrialsReport& report);
std::string strata_table(const TrialsReport& report, std::string_view modality_label);

}  // namespace xspec
