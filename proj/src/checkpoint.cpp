#include "xspec/checkpoint.hpp"

#include <json.hpp>

#include "xspec/error.hpp"
#include "xspec/rng.hpp"

namespace xspec {

namespace {

using nlohmann::json;

json describe_tower(const EmbeddingNet& net) {
    json layers = json::array();
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& s = net.layers[i];
        json l = {{"kind", std::string(to_string(s.kind))}};
        if (s.kind == LayerKind::conv3x3) {
            l["in"] = s.in_channels;
            l["out"] = s.out_channels;
            l["trainable"] = static_cast<bool>(net.trainable[i]);
        }
        layers.push_back(std::move(l));
    }
    return layers;
}

EmbeddingNet rebuild_tower(const json& layers) {
    std::vector<LayerSpec> specs;
    std::vector<bool> mask;
    for (const json& l : layers) {
        LayerSpec s;
        s.kind = parse_layer_kind(l.at("kind").get<std::string>());
        bool trainable = false;
        if (s.kind == LayerKind::conv3x3) {
            s.in_channels = l.at("in").get<std::size_t>();
            s.out_channels = l.at("out").get<std::size_t>();
            trainable = l.at("trainable").get<bool>();
        }
        specs.push_back(s);
        mask.push_back(trainable);
    }
    EmbeddingNet net = EmbeddingNet::from_layers(std::move(specs));
    net.trainable = std::move(mask);
    return net;
}

void put_values(std::string& out, const std::vector<double>& values, DType precision) {
    for (double v : values) {
        if (precision == DType::f32) {
            le::put_f32(out, static_cast<float>(v));
        } else {
            le::put_f64(out, v);
        }
    }
}

void get_values(le::Reader& r, std::vector<double>& values, DType precision) {
    for (double& v : values) v = precision == DType::f32 ? static_cast<double>(r.f32()) : r.f64();
}

}  // namespace

std::string encode_checkpoint(const CoupledModel& model, const CheckpointMetadata& metadata, DType precision) {
    model.validate();
    json header = {
        {"precision", precision == DType::f32 ? "f32" : "f64"},
        {"rng", std::string(kRngAlgorithm)},
        {"towers", {{"vis", describe_tower(model.vis)}, {"pol", describe_tower(model.pol)}}},
        {"metadata", metadata},
    };
    const std::string text = header.dump();
    std::string out = "XSPC";
    le::put_u16(out, kCheckpointVersion);
    le::put_u32(out, static_cast<std::uint32_t>(text.size()));
    out += text;
    for (const EmbeddingNet* net : {&model.vis, &model.pol}) {
        for (const ConvParams& p : net->params) {
            put_values(out, p.weight, precision);
            put_values(out, p.bias, precision);
        }
    }
    return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
    le::Reader r(bytes, "checkpoint");
    if (r.take(4) != "XSPC") fail(ErrorKind::format, "checkpoint: bad magic");
    const std::uint16_t version = r.u16();
    require(version == kCheckpointVersion, ErrorKind::format,
            "checkpoint: unsupported version " + std::to_string(version));
    const std::uint32_t header_len = r.u32();
    const std::string_view text = r.take(header_len);

    Checkpoint ck;
    try {
        json header = json::parse(text);
        const std::string precision = header.at("precision").get<std::string>();
        require(precision == "f32" || precision == "f64", ErrorKind::format, "checkpoint: unknown precision");
        ck.precision = precision == "f32" ? DType::f32 : DType::f64;
        ck.model.vis = rebuild_tower(header.at("towers").at("vis"));
        ck.model.pol = rebuild_tower(header.at("towers").at("pol"));
        ck.metadata = header.at("metadata").get<CheckpointMetadata>();
    } catch (const json::exception& e) {
        fail(ErrorKind::format, std::string("checkpoint: malformed header: ") + e.what());
    } catch (const Error& e) {
        fail(ErrorKind::format, std::string("checkpoint: ") + e.what());
    }

    for (EmbeddingNet* net : {&ck.model.vis, &ck.model.pol}) {
        for (ConvParams& p : net->params) {
            get_values(r, p.weight, ck.precision);
            get_values(r, p.bias, ck.precision);
        }
    }
    require(r.remaining() == 0, ErrorKind::format, "checkpoint: trailing bytes after parameters");
    ck.model.validate();
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const CoupledModel& model,
                     const CheckpointMetadata& metadata, DType precision) {
    write_file(path, encode_checkpoint(model, metadata, precision));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    try {
        return decode_checkpoint(read_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::format) fail(ErrorKind::format, path.string() + ": " + e.what());
        throw;
    }
}

}  // namespace xspec
