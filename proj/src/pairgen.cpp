#include "xspec/pairgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <unordered_set>
#include <utility>

#include "xspec/error.hpp"
#include "xspec/rng.hpp"

namespace xspec {

namespace {

bool is_visible(const PatchRecord& r) { return r.modality == Modality::visible; }

struct PositionGroup {
    std::vector<std::size_t> vis;
    std::vector<std::size_t> pol;
};

}  // namespace

std::vector<PatchPair> generate_pairs(std::span<const PatchRecord> records, const PairOptions& options) {
    require(options.ratio > 0.0 && std::isfinite(options.ratio), ErrorKind::invalid_argument,
            "pair ratio must be a positive finite number");

    std::set<std::string> subjects;
    std::map<std::pair<std::size_t, std::size_t>, PositionGroup> groups;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const PatchRecord& r = records[i];
        subjects.insert(r.subject_id);
        auto& g = groups[{r.row, r.col}];
        (is_visible(r) ? g.vis : g.pol).push_back(i);
    }
    require(subjects.size() >= 2, ErrorKind::invalid_argument,
            "pair generation needs at least 2 subjects, got " + std::to_string(subjects.size()));

    std::vector<PatchPair> genuine;
    std::vector<const PositionGroup*> usable;
    for (const auto& [pos, g] : groups) {
        if (g.vis.empty() || g.pol.empty()) continue;
        usable.push_back(&g);
        for (std::size_t v : g.vis) {
            for (std::size_t p : g.pol) {
                const PatchRecord& a = records[v];
                const PatchRecord& b = records[p];
                if (a.subject_id != b.subject_id) continue;
                if (options.genuine == GenuineMode::same_capture &&
                    (a.range != b.range || a.condition != b.condition || a.image_index != b.image_index)) {
                    continue;
                }
                genuine.push_back({v, p, 0});
            }
        }
    }
    require(!usable.empty(), ErrorKind::invalid_argument, "no co-located cross-modal patches");
    require(!genuine.empty(), ErrorKind::invalid_argument, "no genuine cross-modal pairs");

    auto impostor_ok = [&](std::size_t v, std::size_t p) {
        const PatchRecord& a = records[v];
        const PatchRecord& b = records[p];
        return a.subject_id != b.subject_id && (!options.same_range || a.range == b.range);
    };

    // The cross product of every usable group, addressed by one flat index.
    std::vector<std::uint64_t> offsets{0};
    for (const PositionGroup* g : usable) {
        offsets.push_back(offsets.back() + static_cast<std::uint64_t>(g->vis.size()) * g->pol.size());
    }
    const std::uint64_t total = offsets.back();
    auto decode = [&](std::uint64_t flat) {
        auto it = std::upper_bound(offsets.begin(), offsets.end(), flat);
        std::size_t gi = static_cast<std::size_t>(it - offsets.begin()) - 1;
        std::uint64_t local = flat - offsets[gi];
        const PositionGroup& g = *usable[gi];
        return std::pair{g.vis[local / g.pol.size()], g.pol[local % g.pol.size()]};
    };

    std::uint64_t pool = 0;
    for (const PositionGroup* g : usable) {
        for (std::size_t v : g->vis) {
            for (std::size_t p : g->pol) pool += impostor_ok(v, p) ? 1 : 0;
        }
    }
    const auto wanted = static_cast<std::uint64_t>(std::llround(options.ratio * static_cast<double>(genuine.size())));
    require(wanted <= pool, ErrorKind::invalid_argument,
            "impostor pool (" + std::to_string(pool) + ") is smaller than the " + std::to_string(wanted) +
                " impostor pairs requested");

    Rng rng(derive_seed(options.seed, "pairgen"));
    std::vector<PatchPair> pairs = std::move(genuine);
    pairs.reserve(pairs.size() + wanted);

    if (wanted * 2 > pool) {
        // Dense regime: materialize the pool and draw a partial Fisher-Yates prefix.
        std::vector<std::uint64_t> candidates;
        candidates.reserve(pool);
        for (std::uint64_t f = 0; f < total; ++f) {
            auto [v, p] = decode(f);
            if (impostor_ok(v, p)) candidates.push_back(f);
        }
        for (std::uint64_t k = 0; k < wanted; ++k) {
            std::uint64_t j = k + rng.index(candidates.size() - k);
            std::swap(candidates[k], candidates[j]);
            auto [v, p] = decode(candidates[k]);
            pairs.push_back({v, p, 1});
        }
    } else {
        // Sparse regime: rejection sampling over the flat index.
        std::unordered_set<std::uint64_t> taken;
        taken.reserve(wanted * 2);
        while (taken.size() < wanted) {
            std::uint64_t f = rng.index(total);
            auto [v, p] = decode(f);
            if (!impostor_ok(v, p) || !taken.insert(f).second) continue;
            pairs.push_back({v, p, 1});
        }
    }

    rng.shuffle(std::span<PatchPair>(pairs));
    return pairs;
}

std::uint64_t epoch_pair_seed(std::uint64_t seed, int epoch) {
    return derive_seed(seed, static_cast<std::uint64_t>(epoch) + 1);
}

SubjectSplit split_subjects(std::span<const std::string> subject_ids, std::size_t n_train,
                            std::uint64_t seed) {
    std::vector<std::string> ids(subject_ids.begin(), subject_ids.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    require(n_train < ids.size(), ErrorKind::invalid_argument,
            "n_train (" + std::to_string(n_train) + ") must be smaller than the subject count (" +
                std::to_string(ids.size()) + ")");

    Rng rng(derive_seed(seed, "split"));
    rng.shuffle(std::span<std::string>(ids));
    SubjectSplit split;
    split.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

void write_pairs_csv(std::ostream& out, std::span<const PatchRecord> records,
                     std::span<const PatchPair> pairs) {
    out << "vis_path,pol_path,row,col,y_cont\n";
    for (const PatchPair& p : pairs) {
        const PatchRecord& v = records[p.vis];
        out << v.source << ',' << records[p.pol].source << ',' << v.row << ',' << v.col << ','
            << p.y_cont << '\n';
    }
}

}  // namespace xspec
