#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xspec/image.hpp"
#include "xspec/labels.hpp"
#include "xspec/pairgen.hpp"
#include "xspec/polarimetry.hpp"
#include "xspec/preproc.hpp"

namespace xspec {

// One capture as stored on disk: a single "gray" channel for visible
// images, four polarizer channels (i0, i90, i45, i-45) for polarimetric ones.
struct RawImage {
    std::string subject_id;
    Modality modality = Modality::visible;
    RangeId range = RangeId::R1;
    Condition condition = Condition::baseline;
    int index = 0;
    std::vector<std::string> channel_names;
    std::vector<Image> channels;

    const Image& channel(std::string_view name) const;
    // "<subject>/<modality>/<range>/<condition>_<idx>" relative to the dataset root.
    std::string stem() const;
    std::string relative_path(std::string_view channel_name) const;
};

struct RawDataset {
    std::vector<RawImage> images;
};

inline constexpr const char* kManifestName = "manifest.csv";

// Writes every channel as a PGM plus manifest.csv with columns
// subject_id,modality,range,condition,index,channel,path.
void write_dataset(const std::filesystem::path& root, const RawDataset& ds, int bits = 16);
RawDataset load_dataset(const std::filesystem::path& root);

IntensityMeasurements intensities_of(const RawImage& img);

struct PreprocessConfig {
    DoGConfig dog;
    PatchGrid grid;
    PatchNormalization normalize = PatchNormalization::none;
    StokesConvention convention = StokesConvention::difference;
    double dolp_epsilon = kDefaultDolpEpsilon;
};

// An image reduced to its stacked patches: 1 channel for visible,
// S0/S1/S2 for polarimetric, S0 replicated three times for thermal_s0.
struct PatchImage {
    std::string subject_id;
    Modality modality = Modality::visible;
    RangeId range = RangeId::R1;
    Condition condition = Condition::baseline;
    int index = 0;
    std::string source;
    std::vector<StackedPatch> patches;
};

struct PatchDataset {
    std::vector<PatchImage> images;

    std::vector<std::string> subjects() const;
};

PatchDataset preprocess_dataset(const RawDataset& raw, const PreprocessConfig& cfg);

// Replaces every polarimetric image's (S0, S1, S2) stack with (S0, S0, S0)
// and relabels it thermal_s0.
PatchDataset to_thermal_only(const PatchDataset& ds);

// Flattens the images of the listed subjects (all subjects when empty) into
// patch records.
std::vector<PatchRecord> patch_records(const PatchDataset& ds, std::span<const std::string> subjects = {});

// <dir>/<modality>.xspt holds an N x P x P x C tensor; <modality>.csv lists
// source,row,col,subject_id,range,condition,index per patch.
void write_patch_dataset(const std::filesystem::path& dir, const PatchDataset& ds);
PatchDataset read_patch_dataset(const std::filesystem::path& dir);

}  // namespace xspec
