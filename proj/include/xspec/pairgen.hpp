#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "xspec/image.hpp"
#include "xspec/labels.hpp"

namespace xspec {

// One preprocessed patch with its provenance.
struct PatchRecord {
    std::string subject_id;
    Modality modality = Modality::visible;
    Condition condition = Condition::baseline;
    RangeId range = RangeId::R1;
    int image_index = 0;
    std::size_t row = 0;
    std::size_t col = 0;
    Tensor patch;        // H x W x C
    std::string source;  // image path or id the patch was cut from
};

// Indices into the record list the pairs were generated from.
// y_cont is 0 for a genuine (same subject) pair and 1 for an impostor pair.
struct PatchPair {
    std::size_t vis = 0;
    std::size_t pol = 0;
    int y_cont = 0;

    friend bool operator==(const PatchPair&, const PatchPair&) = default;
};

enum class GenuineMode {
    all_cross_modal,  // every visible x polarimetric patch of a subject at a position
    same_capture,     // only patches of the same range, condition and image index
};

struct PairOptions {
    std::uint64_t seed = 0;
    double ratio = 1.0;        // impostors per genuine pair
    bool same_range = false;   // impostors restricted to equal range
    GenuineMode genuine = GenuineMode::all_cross_modal;
};

// Emits every genuine co-located cross-modal pair, then samples
// round(ratio * genuine) impostor pairs uniformly without replacement from
// the co-located different-subject pool. The combined list is shuffled.
std::vector<PatchPair> generate_pairs(std::span<const PatchRecord> records, const PairOptions& options);

// Seed for epoch-indexed regeneration of the pair list.
std::uint64_t epoch_pair_seed(std::uint64_t seed, int epoch);

struct SubjectSplit {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

// Disjoint, exhaustive partition of the (deduplicated, sorted) ids.
SubjectSplit split_subjects(std::span<const std::string> subject_ids, std::size_t n_train,
                            std::uint64_t seed);

// CSV: vis_path,pol_path,row,col,y_cont
void write_pairs_csv(std::ostream& out, std::span<const PatchRecord> records,
                     std::span<const PatchPair> pairs);

}  // namespace xspec
