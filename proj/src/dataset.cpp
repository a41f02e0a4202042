#include "xspec/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "xspec/error.hpp"
#include "xspec/io.hpp"
#include "xspec/parallel.hpp"

namespace xspec {

const Image& RawImage::channel(std::string_view name) const {
    for (std::size_t i = 0; i < channel_names.size(); ++i) {
        if (channel_names[i] == name) return channels.at(i);
    }
    fail(ErrorKind::format, "image " + stem() + " has no channel '" + std::string(name) + "'");
}

std::string RawImage::stem() const {
    return subject_id + "/" + std::string(to_string(modality)) + "/" + std::string(to_string(range)) + "/" +
           std::string(to_string(condition)) + "_" + std::to_string(index);
}

std::string RawImage::relative_path(std::string_view channel_name) const {
    if (modality == Modality::visible) return stem() + ".pgm";
    return stem() + "_" + std::string(channel_name) + ".pgm";
}

void write_dataset(const std::filesystem::path& root, const RawDataset& ds, int bits) {
    std::ostringstream manifest;
    manifest << "subject_id,modality,range,condition,index,channel,path\n";
    for (const RawImage& img : ds.images) {
        require(img.channel_names.size() == img.channels.size(), ErrorKind::invalid_argument,
                "channel names and images differ in count");
        for (std::size_t c = 0; c < img.channels.size(); ++c) {
            const std::string rel = img.relative_path(img.channel_names[c]);
            write_pgm(root / rel, img.channels[c], bits);
            manifest << img.subject_id << ',' << to_string(img.modality) << ',' << to_string(img.range) << ','
                     << to_string(img.condition) << ',' << img.index << ',' << img.channel_names[c] << ',' << rel
                     << '\n';
        }
    }
    write_file(root / kManifestName, manifest.str());
}

RawDataset load_dataset(const std::filesystem::path& root) {
    const CsvTable table = read_csv(root / kManifestName);
    const std::size_t c_subject = table.column("subject_id"), c_mod = table.column("modality"),
                      c_range = table.column("range"), c_cond = table.column("condition"),
                      c_index = table.column("index"), c_channel = table.column("channel"),
                      c_path = table.column("path");
    RawDataset ds;
    std::map<std::tuple<std::string, int, int, int, int>, std::size_t> slot;
    for (const auto& row : table.rows) {
        const Modality m = parse_modality(row[c_mod]);
        const RangeId r = parse_range(row[c_range]);
        const Condition c = parse_condition(row[c_cond]);
        const int idx = static_cast<int>(parse_int(row[c_index]));
        auto key = std::make_tuple(row[c_subject], static_cast<int>(m), static_cast<int>(r), static_cast<int>(c), idx);
        auto it = slot.find(key);
        if (it == slot.end()) {
            it = slot.emplace(key, ds.images.size()).first;
            ds.images.push_back({row[c_subject], m, r, c, idx, {}, {}});
        }
        RawImage& img = ds.images[it->second];
        require(std::find(img.channel_names.begin(), img.channel_names.end(), row[c_channel]) ==
                    img.channel_names.end(),
                ErrorKind::format, "duplicate channel " + row[c_channel] + " for " + img.stem());
        img.channel_names.push_back(row[c_channel]);
        img.channels.push_back(read_pgm(root / row[c_path]));
    }
    return ds;
}

IntensityMeasurements intensities_of(const RawImage& img) {
    require(img.modality == Modality::polarimetric, ErrorKind::invalid_argument,
            "intensities requested for non-polarimetric image " + img.stem());
    IntensityMeasurements m{img.channel("i0"), img.channel("i90"), img.channel("i45"), img.channel("i-45"),
                            std::nullopt, std::nullopt};
    auto has = [&](std::string_view n) {
        return std::find(img.channel_names.begin(), img.channel_names.end(), n) != img.channel_names.end();
    };
    if (has("ir")) m.i_right = img.channel("ir");
    if (has("il")) m.i_left = img.channel("il");
    return m;
}

std::vector<std::string> PatchDataset::subjects() const {
    std::set<std::string> ids;
    for (const PatchImage& img : images) ids.insert(img.subject_id);
    return {ids.begin(), ids.end()};
}

PatchDataset preprocess_dataset(const RawDataset& raw, const PreprocessConfig& cfg) {
    cfg.dog.validate();
    cfg.grid.validate();
    PatchDataset out;
    out.images.resize(raw.images.size());
    parallel_for(raw.images.size(), [&](std::size_t i) {
        const RawImage& img = raw.images[i];
        PatchImage& pi = out.images[i];
        pi.subject_id = img.subject_id;
        pi.modality = img.modality;
        pi.range = img.range;
        pi.condition = img.condition;
        pi.index = img.index;
        pi.source = img.stem();
        if (img.modality == Modality::visible) {
            pi.patches = preprocess_stack(std::span(&img.channel("gray"), 1), cfg.dog, cfg.grid, cfg.normalize);
        } else if (img.modality == Modality::polarimetric) {
            StokesImage s = stokes_from_intensities(intensities_of(img), cfg.convention, cfg.dolp_epsilon);
            const Image stack[3] = {std::move(s.s0), std::move(s.s1), std::move(s.s2)};
            pi.patches = preprocess_stack(stack, cfg.dog, cfg.grid, cfg.normalize);
        } else {
            fail(ErrorKind::invalid_argument, "raw thermal_s0 images are not supported: " + img.stem());
        }
    });
    return out;
}

PatchDataset to_thermal_only(const PatchDataset& ds) {
    PatchDataset out = ds;
    for (PatchImage& img : out.images) {
        if (img.modality != Modality::polarimetric) continue;
        img.modality = Modality::thermal_s0;
        for (StackedPatch& sp : img.patches) {
            require(sp.patch.rank() == 3 && sp.patch.shape[2] == 3, ErrorKind::shape_mismatch,
                    "polarimetric patches must have three channels");
            for (std::size_t k = 0; k < sp.patch.size(); k += 3) {
                sp.patch.data[k + 1] = sp.patch.data[k];
                sp.patch.data[k + 2] = sp.patch.data[k];
            }
        }
    }
    return out;
}

std::vector<PatchRecord> patch_records(const PatchDataset& ds, std::span<const std::string> subjects) {
    std::set<std::string> keep(subjects.begin(), subjects.end());
    std::vector<PatchRecord> out;
    for (const PatchImage& img : ds.images) {
        if (!keep.empty() && !keep.count(img.subject_id)) continue;
        for (const StackedPatch& sp : img.patches) {
            out.push_back({img.subject_id, img.modality, img.condition, img.range, img.index, sp.row, sp.col,
                           sp.patch, img.source});
        }
    }
    return out;
}

namespace {

const Modality kPatchModalities[] = {Modality::visible, Modality::polarimetric, Modality::thermal_s0};

}  // namespace

void write_patch_dataset(const std::filesystem::path& dir, const PatchDataset& ds) {
    for (Modality m : kPatchModalities) {
        std::vector<const PatchImage*> imgs;
        for (const PatchImage& img : ds.images) {
            if (img.modality == m) imgs.push_back(&img);
        }
        if (imgs.empty()) continue;
        std::vector<std::size_t> pshape;
        std::size_t n = 0;
        for (const PatchImage* img : imgs) {
            for (const StackedPatch& sp : img->patches) {
                if (pshape.empty()) pshape = sp.patch.shape;
                require(sp.patch.shape == pshape, ErrorKind::shape_mismatch,
                        "patches of one modality must share a shape");
                ++n;
            }
        }
        if (pshape.empty()) pshape = {0, 0, 0};
        std::vector<std::size_t> shape{n};
        shape.insert(shape.end(), pshape.begin(), pshape.end());
        Tensor all(shape);
        std::ostringstream csv;
        csv << "source,row,col,subject_id,range,condition,index\n";
        std::size_t offset = 0;
        for (const PatchImage* img : imgs) {
            for (const StackedPatch& sp : img->patches) {
                std::copy(sp.patch.data.begin(), sp.patch.data.end(), all.data.begin() + offset);
                offset += sp.patch.size();
                csv << img->source << ',' << sp.row << ',' << sp.col << ',' << img->subject_id << ','
                    << to_string(img->range) << ',' << to_string(img->condition) << ',' << img->index << '\n';
            }
        }
        const std::string name(to_string(m));
        write_tensor(dir / (name + ".xspt"), all);
        write_file(dir / (name + ".csv"), csv.str());
    }
}

PatchDataset read_patch_dataset(const std::filesystem::path& dir) {
    PatchDataset ds;
    bool any = false;
    for (Modality m : kPatchModalities) {
        const std::string name(to_string(m));
        const auto tpath = dir / (name + ".xspt");
        if (!std::filesystem::exists(tpath)) continue;
        any = true;
        const Tensor all = read_tensor(tpath);
        const CsvTable csv = read_csv(dir / (name + ".csv"));
        require(all.rank() == 4, ErrorKind::format, tpath.string() + ": expected a rank-4 patch tensor");
        require(all.shape[0] == csv.rows.size(), ErrorKind::format,
                tpath.string() + ": patch count differs from the sidecar CSV");
        const std::size_t c_src = csv.column("source"), c_row = csv.column("row"), c_col = csv.column("col"),
                          c_sub = csv.column("subject_id"), c_range = csv.column("range"),
                          c_cond = csv.column("condition"), c_idx = csv.column("index");
        const std::vector<std::size_t> pshape(all.shape.begin() + 1, all.shape.end());
        const std::size_t per = element_count(pshape);
        std::map<std::string, std::size_t> slot;
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const auto& row = csv.rows[i];
            auto it = slot.find(row[c_src]);
            if (it == slot.end()) {
                it = slot.emplace(row[c_src], ds.images.size()).first;
                PatchImage img;
                img.subject_id = row[c_sub];
                img.modality = m;
                img.range = parse_range(row[c_range]);
                img.condition = parse_condition(row[c_cond]);
                img.index = static_cast<int>(parse_int(row[c_idx]));
                img.source = row[c_src];
                ds.images.push_back(std::move(img));
            }
            std::vector<double> values(all.data.begin() + i * per, all.data.begin() + (i + 1) * per);
            ds.images[it->second].patches.push_back({static_cast<std::size_t>(parse_int(row[c_row])),
                                                     static_cast<std::size_t>(parse_int(row[c_col])),
                                                     Tensor(pshape, std::move(values))});
        }
    }
    require(any, ErrorKind::io, "no patch tensors found in " + dir.string());
    // Same image order as the generator: subject, modality, range, condition, index.
    std::stable_sort(ds.images.begin(), ds.images.end(), [](const PatchImage& a, const PatchImage& b) {
        return std::tie(a.subject_id, a.modality, a.range, a.condition, a.index) <
               std::tie(b.subject_id, b.modality, b.range, b.condition, b.index);
    });
    return ds;
}

}  // namespace xspec
