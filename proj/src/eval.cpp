#include "xspec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "xspec/error.hpp"
#include "xspec/io.hpp"
#include "xspec/loss.hpp"
#include "xspec/parallel.hpp"
#include "xspec/rng.hpp"

namespace xspec {

std::vector<double> image_embedding(std::span<const std::vector<double>> patch_embeddings) {
    require(!patch_embeddings.empty(), ErrorKind::invalid_argument, "image embedding needs at least one patch");
    std::vector<double> out(patch_embeddings.front().size(), 0.0);
    for (const auto& e : patch_embeddings) {
        require(e.size() == out.size(), ErrorKind::shape_mismatch, "patch embeddings differ in dimension");
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += e[k];
    }
    const double inv = 1.0 / static_cast<double>(patch_embeddings.size());
    for (double& v : out) v *= inv;
    return out;
}

namespace {

void sort_ranking(std::vector<RankedSubject>& r) {
    std::sort(r.begin(), r.end(), [](const RankedSubject& a, const RankedSubject& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.subject_id < b.subject_id;
    });
}

std::vector<RankedSubject> distances_to(const EmbeddingRecord& probe, std::span<const EmbeddingRecord> gallery) {
    require(!gallery.empty(), ErrorKind::invalid_argument, "gallery is empty");
    std::vector<RankedSubject> r;
    r.reserve(gallery.size());
    for (const EmbeddingRecord& g : gallery) {
        require(g.embedding.size() == probe.embedding.size(), ErrorKind::shape_mismatch,
                "probe and gallery embeddings differ in dimension");
        r.push_back({g.subject_id, pair_distance(probe.embedding, g.embedding), 0});
    }
    return r;
}

}  // namespace

std::vector<RankedSubject> identify(const EmbeddingRecord& probe, std::span<const EmbeddingRecord> gallery) {
    auto r = distances_to(probe, gallery);
    sort_ranking(r);
    return r;
}

std::vector<RankedSubject> identify_patch_vote(const EmbeddingRecord& probe,
                                               std::span<const EmbeddingRecord> gallery) {
    auto r = distances_to(probe, gallery);
    const std::size_t np = probe.patch_embeddings.size();
    require(np > 0, ErrorKind::invalid_argument, "patch voting needs per-patch probe embeddings");
    for (const EmbeddingRecord& g : gallery) {
        require(g.patch_embeddings.size() == np, ErrorKind::shape_mismatch,
                "gallery and probe differ in patch count");
    }
    for (std::size_t j = 0; j < np; ++j) {
        std::size_t best = 0;
        double best_d = 0.0;
        for (std::size_t s = 0; s < gallery.size(); ++s) {
            const double d = pair_distance(probe.patch_embeddings[j], gallery[s].patch_embeddings[j]);
            if (s == 0 || d < best_d || (d == best_d && gallery[s].subject_id < gallery[best].subject_id)) {
                best = s;
                best_d = d;
            }
        }
        ++r[best].votes;
    }
    std::sort(r.begin(), r.end(), [](const RankedSubject& a, const RankedSubject& b) {
        if (a.votes != b.votes) return a.votes > b.votes;
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.subject_id < b.subject_id;
    });
    return r;
}

MatchMode parse_match_mode(std::string_view name) {
    if (name == "mean_embedding") return MatchMode::mean_embedding;
    if (name == "patch_vote") return MatchMode::patch_vote;
    fail(ErrorKind::config, "unknown match mode '" + std::string(name) + "'");
}

std::string_view to_string(MatchMode mode) {
    return mode == MatchMode::patch_vote ? "patch_vote" : "mean_embedding";
}

double CmcCurve::at(std::size_t rank) const {
    require(rank >= 1 && rank <= rates.size(), ErrorKind::invalid_argument,
            "rank " + std::to_string(rank) + " outside 1.." + std::to_string(rates.size()));
    return rates[rank - 1];
}

CmcCurve cmc(std::span<const EmbeddingRecord> probes, std::span<const EmbeddingRecord> gallery, MatchMode mode) {
    require(!probes.empty(), ErrorKind::invalid_argument, "no probes");
    require(!gallery.empty(), ErrorKind::invalid_argument, "gallery is empty");
    std::map<std::string, std::size_t> count;
    for (const EmbeddingRecord& g : gallery) ++count[g.subject_id];
    for (const EmbeddingRecord& p : probes) {
        auto it = count.find(p.subject_id);
        require(it != count.end() && it->second == 1, ErrorKind::invalid_argument,
                "probe subject " + p.subject_id + " must appear exactly once in the gallery");
    }
    std::vector<std::size_t> hit_rank(probes.size());
    parallel_for(probes.size(), [&](std::size_t i) {
        const auto ranking =
            mode == MatchMode::patch_vote ? identify_patch_vote(probes[i], gallery) : identify(probes[i], gallery);
        for (std::size_t k = 0; k < ranking.size(); ++k) {
            if (ranking[k].subject_id == probes[i].subject_id) {
                hit_rank[i] = k;
                break;
            }
        }
    });
    std::vector<std::size_t> hits(gallery.size(), 0);
    for (std::size_t r : hit_rank) ++hits[r];
    CmcCurve curve;
    curve.rates.resize(gallery.size());
    std::size_t cum = 0;
    for (std::size_t k = 0; k < gallery.size(); ++k) {
        cum += hits[k];
        curve.rates[k] = static_cast<double>(cum) / static_cast<double>(probes.size());
    }
    return curve;
}

std::vector<EmbeddingRecord> embed_images(const CoupledModel& model, std::span<const PatchImage> images,
                                          bool keep_patches) {
    struct Job {
        std::size_t image, patch;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < images.size(); ++i) {
        require(!images[i].patches.empty(), ErrorKind::invalid_argument, "image " + images[i].source + " has no patches");
        for (std::size_t p = 0; p < images[i].patches.size(); ++p) jobs.push_back({i, p});
    }
    std::vector<std::vector<double>> out(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) {
        const PatchImage& img = images[jobs[j].image];
        const EmbeddingNet& net = img.modality == Modality::visible ? model.vis : model.pol;
        out[j] = forward(net, img.patches[jobs[j].patch].patch);
    });
    std::vector<EmbeddingRecord> records;
    records.reserve(images.size());
    std::size_t j = 0;
    for (const PatchImage& img : images) {
        std::vector<std::vector<double>> patches(std::make_move_iterator(out.begin() + j),
                                                 std::make_move_iterator(out.begin() + j + img.patches.size()));
        j += img.patches.size();
        EmbeddingRecord r{img.subject_id, img.modality, img.source, img.range, img.condition,
                          image_embedding(patches), {}};
        if (keep_patches) r.patch_embeddings = std::move(patches);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<EmbeddingRecord> build_gallery(std::span<const EmbeddingRecord> records, RangeId range) {
    std::map<std::string, std::vector<const EmbeddingRecord*>> by_subject;
    for (const EmbeddingRecord& r : records) {
        if (r.modality == Modality::visible && r.condition == Condition::baseline && r.range == range) {
            by_subject[r.subject_id].push_back(&r);
        }
    }
    std::vector<EmbeddingRecord> gallery;
    for (const auto& [sid, members] : by_subject) {
        EmbeddingRecord g;
        g.subject_id = sid;
        g.modality = Modality::visible;
        g.image_id = sid + "/gallery";
        g.range = range;
        g.condition = Condition::baseline;
        std::vector<std::vector<double>> embs;
        for (const EmbeddingRecord* m : members) embs.push_back(m->embedding);
        g.embedding = image_embedding(embs);
        const std::size_t np = members.front()->patch_embeddings.size();
        for (std::size_t p = 0; p < np; ++p) {
            std::vector<std::vector<double>> at;
            for (const EmbeddingRecord* m : members) {
                require(m->patch_embeddings.size() == np, ErrorKind::shape_mismatch,
                        "gallery images differ in patch count");
                at.push_back(m->patch_embeddings[p]);
            }
            g.patch_embeddings.push_back(image_embedding(at));
        }
        gallery.push_back(std::move(g));
    }
    return gallery;
}

void TrialProtocol::validate() const {
    require(n_train >= 1, ErrorKind::config, "train_subjects must be at least 1");
    require(n_trials >= 1, ErrorKind::config, "trials must be at least 1");
}

const StratumResult* TrialsReport::find(std::string_view name) const {
    for (const StratumResult& s : strata) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

namespace {

struct StratumDef {
    const char* name;
    bool (*keep)(const EmbeddingRecord&);
};

const StratumDef kStrata[] = {
    {"Overall", [](const EmbeddingRecord&) { return true; }},
    {"Range 1 Expression",
     [](const EmbeddingRecord& r) { return r.range == RangeId::R1 && r.condition == Condition::expression; }},
    {"Range 1 Baseline",
     [](const EmbeddingRecord& r) { return r.range == RangeId::R1 && r.condition == Condition::baseline; }},
    {"Range 2 Baseline",
     [](const EmbeddingRecord& r) { return r.range == RangeId::R2 && r.condition == Condition::baseline; }},
    {"Range 3 Baseline",
     [](const EmbeddingRecord& r) { return r.range == RangeId::R3 && r.condition == Condition::baseline; }},
};

}  // namespace

TrialsReport run_trials(const PatchDataset& data, const TrialProtocol& protocol, const TrainFn& train_fn) {
    protocol.validate();
    require(static_cast<bool>(train_fn), ErrorKind::invalid_argument, "run_trials needs a train function");
    const std::vector<std::string> subjects = data.subjects();
    require(protocol.n_train < subjects.size(), ErrorKind::config,
            "train_subjects (" + std::to_string(protocol.n_train) + ") must be below the subject count (" +
                std::to_string(subjects.size()) + ")");

    TrialsReport report;
    std::vector<std::vector<CmcCurve>> curves(std::size(kStrata));
    for (const StratumDef& s : kStrata) report.strata.push_back({s.name, {}, {}, 0});

    for (std::size_t t = 0; t < protocol.n_trials; ++t) {
        const std::uint64_t trial_seed = derive_seed(protocol.seed, "trial:" + std::to_string(t));
        SubjectSplit split = split_subjects(subjects, protocol.n_train, trial_seed);
        const CoupledModel model = train_fn(split.train, t, trial_seed);

        std::vector<PatchImage> test_images;
        for (const PatchImage& img : data.images) {
            if (std::binary_search(split.test.begin(), split.test.end(), img.subject_id)) test_images.push_back(img);
        }
        const bool keep = protocol.match == MatchMode::patch_vote;
        const std::vector<EmbeddingRecord> embedded = embed_images(model, test_images, keep);
        const std::vector<EmbeddingRecord> gallery = build_gallery(embedded, protocol.gallery_range);
        require(gallery.size() == split.test.size(), ErrorKind::invalid_argument,
                "some test subjects have no baseline visible image at " +
                    std::string(to_string(protocol.gallery_range)));

        for (std::size_t s = 0; s < std::size(kStrata); ++s) {
            std::vector<EmbeddingRecord> probes;
            for (const EmbeddingRecord& r : embedded) {
                if (r.modality != Modality::visible && kStrata[s].keep(r)) probes.push_back(r);
            }
            if (probes.empty()) continue;
            CmcCurve c = cmc(probes, gallery, protocol.match);
            report.strata[s].rank1.push_back(c.rank1());
            report.strata[s].probes = probes.size();
            curves[s].push_back(std::move(c));
        }
        report.splits.push_back(std::move(split));
    }

    std::vector<StratumResult> kept;
    for (std::size_t s = 0; s < std::size(kStrata); ++s) {
        if (curves[s].empty()) continue;
        StratumResult r = std::move(report.strata[s]);
        r.mean_cmc.rates.assign(curves[s].front().rates.size(), 0.0);
        for (const CmcCurve& c : curves[s]) {
            for (std::size_t k = 0; k < c.rates.size(); ++k) r.mean_cmc.rates[k] += c.rates[k];
        }
        for (double& v : r.mean_cmc.rates) v /= static_cast<double>(curves[s].size());
        kept.push_back(std::move(r));
    }
    require(!kept.empty() && kept.front().name == "Overall", ErrorKind::invalid_argument,
            "no polarimetric probes among the test subjects");
    report.strata = std::move(kept);
    return report;
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    if (values.empty()) return out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string embeddings_csv(std::span<const EmbeddingRecord> records) {
    const std::size_t dim = records.empty() ? 0 : records.front().embedding.size();
    std::ostringstream out;
    out << "subject_id,modality,image_id,range,condition";
    for (std::size_t k = 0; k < dim; ++k) out << ",e" << k;
    out << '\n';
    for (const EmbeddingRecord& r : records) {
        require(r.embedding.size() == dim, ErrorKind::shape_mismatch, "embeddings differ in dimension");
        out << r.subject_id << ',' << to_string(r.modality) << ',' << r.image_id << ',' << to_string(r.range) << ','
            << to_string(r.condition);
        for (double v : r.embedding) out << ',' << g17(v);
        out << '\n';
    }
    return out.str();
}

void export_embeddings(const std::filesystem::path& path, std::span<const EmbeddingRecord> records) {
    write_file(path, embeddings_csv(records));
}

std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_sub = t.column("subject_id"), c_mod = t.column("modality"), c_img = t.column("image_id"),
                      c_range = t.column("range"), c_cond = t.column("condition");
    std::vector<std::size_t> dims;
    for (std::size_t k = 0;; ++k) {
        auto it = std::find(t.header.begin(), t.header.end(), "e" + std::to_string(k));
        if (it == t.header.end()) break;
        dims.push_back(static_cast<std::size_t>(it - t.header.begin()));
    }
    std::vector<EmbeddingRecord> out;
    for (const auto& row : t.rows) {
        EmbeddingRecord r;
        r.subject_id = row[c_sub];
        r.modality = parse_modality(row[c_mod]);
        r.image_id = row[c_img];
        r.range = parse_range(row[c_range]);
        r.condition = parse_condition(row[c_cond]);
        for (std::size_t c : dims) r.embedding.push_back(parse_double(row[c]));
        out.push_back(std::move(r));
    }
    return out;
}

std::string cmc_csv(const CmcCurve& curve) {
    std::ostringstream out;
    out << "rank,rate\n";
    for (std::size_t k = 0; k < curve.rates.size(); ++k) out << k + 1 << ',' << g17(curve.rates[k]) << '\n';
    return out.str();
}

std::string rank1_json(const TrialsReport& report) {
    auto summary = [](const StratumResult& s) {
        const MeanStd ms = mean_std(s.rank1);
        return nlohmann::ordered_json{{"mean", ms.mean}, {"std", ms.std}, {"per_trial", s.rank1},
                                      {"probes_per_trial", s.probes}};
    };
    nlohmann::ordered_json j = summary(report.overall());
    nlohmann::ordered_json strata = nlohmann::ordered_json::object();
    for (const StratumResult& s : report.strata) strata[s.name] = summary(s);
    j["strata"] = std::move(strata);
    return j.dump(2) + "\n";
}

std::string strata_table(const TrialsReport& report, std::string_view modality_label) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-20s %-10s %10s %10s %8s\n", "Scenario", "Probe", "Rank-1", "Std", "Trials");
    out << line;
    for (const StratumResult& s : report.strata) {
        const MeanStd ms = mean_std(s.rank1);
        std::snprintf(line, sizeof(line), "%-20s %-10.*s %10.4f %10.4f %8zu\n", s.name.c_str(),
                      static_cast<int>(modality_label.size()), modality_label.data(), ms.mean, ms.std,
                      s.rank1.size());
        out << line;
    }
    return out.str();
}

}  // namespace xspec
