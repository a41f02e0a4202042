#include "xspec/config.hpp"

#include <charconv>
#include <cstdint>
#include <functional>

#include "xspec/error.hpp"
#include "xspec/io.hpp"
#include "xspec/rng.hpp"

namespace xspec {

namespace {

using json = nlohmann::json;

enum class Kind { integer, number, boolean, text, number_list, text_list };

struct Entry {
    const char* key;
    Kind kind;
    std::function<void(RunConfig&, const json&)> set;
    std::function<json(const RunConfig&)> get;
};

[[noreturn]] void bad_value(std::string_view key, std::string_view expected) {
    fail(ErrorKind::config, "key '" + std::string(key) + "' expects " + std::string(expected));
}

long long as_int(std::string_view key, const json& v) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    bad_value(key, "an integer");
}

std::size_t as_count(std::string_view key, const json& v) {
    const long long n = as_int(key, v);
    if (n < 0) bad_value(key, "a non-negative integer");
    return static_cast<std::size_t>(n);
}

std::uint64_t as_seed(std::string_view key, const json& v) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    return static_cast<std::uint64_t>(as_count(key, v));
}

double as_number(std::string_view key, const json& v) {
    if (!v.is_number()) bad_value(key, "a number");
    return v.get<double>();
}

bool as_bool(std::string_view key, const json& v) {
    if (!v.is_boolean()) bad_value(key, "true or false");
    return v.get<bool>();
}

std::string as_text(std::string_view key, const json& v) {
    if (!v.is_string()) bad_value(key, "a string");
    return v.get<std::string>();
}

std::vector<double> as_numbers(std::string_view key, const json& v) {
    if (!v.is_array()) bad_value(key, "an array of numbers");
    std::vector<double> out;
    for (const json& e : v) out.push_back(as_number(key, e));
    return out;
}

std::vector<std::string> as_texts(std::string_view key, const json& v) {
    if (!v.is_array()) bad_value(key, "an array of strings");
    std::vector<std::string> out;
    for (const json& e : v) out.push_back(as_text(key, e));
    return out;
}

// Library parse errors are format errors; inside a config they are config errors.
template <typename F>
auto as_config(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        fail(ErrorKind::config, e.what());
    }
}

#define XS_COUNT(name, field) \
    {name, Kind::integer, [](RunConfig& c, const json& v) { c.field = as_count(name, v); }, \
     [](const RunConfig& c) { return json(c.field); }}
#define XS_NUMBER(name, field) \
    {name, Kind::number, [](RunConfig& c, const json& v) { c.field = as_number(name, v); }, \
     [](const RunConfig& c) { return json(c.field); }}
#define XS_BOOL(name, field) \
    {name, Kind::boolean, [](RunConfig& c, const json& v) { c.field = as_bool(name, v); }, \
     [](const RunConfig& c) { return json(c.field); }}
#define XS_SEED(name, field) \
    {name, Kind::integer, [](RunConfig& c, const json& v) { c.field = as_seed(name, v); }, \
     [](const RunConfig& c) { return json(c.field); }}
#define XS_ENUM(name, field, parse) \
    {name, Kind::text, \
     [](RunConfig& c, const json& v) { c.field = as_config([&] { return parse(as_text(name, v)); }); }, \
     [](const RunConfig& c) { return json(std::string(to_string(c.field))); }}

const std::vector<Entry>& table() {
    static const std::vector<Entry> entries = {
        // synth
        XS_COUNT("n_subjects", synth.n_subjects),
        XS_COUNT("images_per_condition", synth.images_per_condition),
        XS_COUNT("image_size", synth.image_size),
        {"ranges", Kind::text_list,
         [](RunConfig& c, const json& v) {
             c.synth.ranges.clear();
             for (const std::string& s : as_texts("ranges", v)) {
                 c.synth.ranges.push_back(as_config([&] { return parse_range(s); }));
             }
         },
         [](const RunConfig& c) {
             json a = json::array();
             for (RangeId r : c.synth.ranges) a.push_back(std::string(to_string(r)));
             return a;
         }},
        {"blur_per_range", Kind::number_list,
         [](RunConfig& c, const json& v) { c.synth.blur_per_range = as_numbers("blur_per_range", v); },
         [](const RunConfig& c) { return json(c.synth.blur_per_range); }},
        XS_NUMBER("noise_std", synth.noise_std),
        XS_NUMBER("noise_growth", synth.noise_growth),
        XS_ENUM("cross_modal_map", synth.cross_modal_map, parse_cross_modal_map),
        XS_SEED("synth_seed", synth.seed),
        XS_NUMBER("jitter_px", synth.jitter_px),
        XS_NUMBER("expression_warp_px", synth.expression_warp_px),
        XS_NUMBER("thermal_clutter", synth.thermal_clutter),
        // preprocess
        XS_NUMBER("sigma0", preprocess.dog.sigma0),
        XS_NUMBER("sigma1", preprocess.dog.sigma1),
        {"dog_radius", Kind::integer,
         [](RunConfig& c, const json& v) { c.preprocess.dog.radius = static_cast<int>(as_count("dog_radius", v)); },
         [](const RunConfig& c) { return json(c.preprocess.dog.radius); }},
        XS_COUNT("patch", preprocess.grid.patch_size),
        XS_COUNT("stride", preprocess.grid.stride),
        XS_ENUM("normalize", preprocess.normalize, parse_patch_normalization),
        XS_ENUM("convention", preprocess.convention, parse_stokes_convention),
        XS_NUMBER("dolp_epsilon", preprocess.dolp_epsilon),
        // net
        {"architecture", Kind::text,
         [](RunConfig& c, const json& v) { c.architecture = as_text("architecture", v); },
         [](const RunConfig& c) { return json(c.architecture); }},
        XS_ENUM("global_pool", global_pool, parse_global_pool),
        // loss and training
        XS_NUMBER("margin", train.loss.margin),
        XS_NUMBER("distance_epsilon", train.loss.distance_epsilon),
        XS_NUMBER("lr", train.lr),
        XS_NUMBER("momentum", train.momentum),
        {"epochs", Kind::integer,
         [](RunConfig& c, const json& v) { c.train.epochs = static_cast<int>(as_int("epochs", v)); },
         [](const RunConfig& c) { return json(c.train.epochs); }},
        XS_COUNT("batch", train.batch_size),
        XS_SEED("seed", train.seed),
        XS_NUMBER("pair_ratio", train.pair_ratio),
        XS_BOOL("same_range", train.same_range),
        {"genuine_pairs", Kind::text,
         [](RunConfig& c, const json& v) {
             const std::string s = as_text("genuine_pairs", v);
             if (s == "all_cross_modal") c.train.genuine = GenuineMode::all_cross_modal;
             else if (s == "same_capture") c.train.genuine = GenuineMode::same_capture;
             else bad_value("genuine_pairs", "all_cross_modal or same_capture");
         },
         [](const RunConfig& c) {
             return json(c.train.genuine == GenuineMode::same_capture ? "same_capture" : "all_cross_modal");
         }},
        XS_BOOL("resample_per_epoch", train.resample_per_epoch),
        XS_COUNT("max_pairs_per_epoch", train.max_pairs_per_epoch),
        {"freeze_except_last", Kind::integer,
         [](RunConfig& c, const json& v) {
             c.train.freeze_except_last = static_cast<int>(as_int("freeze_except_last", v));
         },
         [](const RunConfig& c) { return json(c.train.freeze_except_last); }},
        // evaluation
        XS_COUNT("trials", protocol.n_trials),
        XS_COUNT("train_subjects", protocol.n_train),
        XS_ENUM("gallery_range", protocol.gallery_range, parse_range),
        XS_ENUM("match", protocol.match, parse_match_mode),
        XS_BOOL("finetune", finetune),
        XS_ENUM("probe_input", probe_input, parse_modality),
    };
    return entries;
}

#undef XS_COUNT
#undef XS_NUMBER
#undef XS_BOOL
#undef XS_SEED
#undef XS_ENUM

const Entry& entry(std::string_view key) {
    for (const Entry& e : table()) {
        if (key == e.key) return e;
    }
    fail(ErrorKind::config, "unknown config key '" + std::string(key) + "'");
}

json scalar_from_text(std::string_view key, Kind kind, std::string_view text) {
    switch (kind) {
        case Kind::integer: {
            try {
                return json(parse_int(text));
            } catch (const Error&) {
            }
            // seeds may exceed the signed range
            std::uint64_t u = 0;
            const auto res = std::from_chars(text.data(), text.data() + text.size(), u);
            if (res.ec == std::errc() && res.ptr == text.data() + text.size()) return json(u);
            bad_value(key, "an integer");
        }
        case Kind::number: {
            try {
                return json(parse_double(text));
            } catch (const Error&) {
                bad_value(key, "a number");
            }
        }
        case Kind::boolean:
            if (text == "true" || text == "1") return json(true);
            if (text == "false" || text == "0") return json(false);
            bad_value(key, "true or false");
        default:
            return json(std::string(text));
    }
}

}  // namespace

void RunConfig::apply(const nlohmann::json& doc) {
    require(doc.is_object(), ErrorKind::config, "config must be a JSON object");
    for (auto it = doc.begin(); it != doc.end(); ++it) entry(it.key()).set(*this, it.value());
}

void RunConfig::set(std::string_view key, std::string_view value) {
    const Entry& e = entry(key);
    if (e.kind == Kind::number_list || e.kind == Kind::text_list) {
        json a = json::array();
        for (const std::string& part : split_csv_line(value)) {
            a.push_back(scalar_from_text(key, e.kind == Kind::number_list ? Kind::number : Kind::text, part));
        }
        e.set(*this, a);
    } else {
        e.set(*this, scalar_from_text(key, e.kind, value));
    }
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    for (const Entry& e : table()) j[e.key] = e.get(*this);
    j["rng_algorithm"] = std::string(kRngAlgorithm);
    return j;
}

void RunConfig::validate() const {
    as_config([&] {
        synth.validate();
        preprocess.dog.validate();
        preprocess.grid.validate();
        make_tower(1, architecture, global_pool);
        train.validate();
        protocol.validate();
        return 0;
    });
    require(probe_input == Modality::polarimetric || probe_input == Modality::thermal_s0, ErrorKind::config,
            "probe_input must be polarimetric or thermal_s0");
    require(preprocess.dolp_epsilon > 0.0, ErrorKind::config, "dolp_epsilon must be positive");
}

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> out;
    for (const Entry& e : table()) out.emplace_back(e.key);
    return out;
}

nlohmann::json parse_json_document(std::string_view text, std::string_view what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::config, std::string(what) + ": " + e.what());
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    nlohmann::json doc = parse_json_document(read_file(path), path.string());
    // Echoed configs carry the RNG id; accept it when it matches.
    if (doc.is_object() && doc.contains("rng_algorithm")) {
        require(doc["rng_algorithm"] == std::string(kRngAlgorithm), ErrorKind::config,
                "config was produced with a different RNG algorithm");
        doc.erase("rng_algorithm");
    }
    RunConfig cfg;
    cfg.apply(doc);
    return cfg;
}

}  // namespace xspec
