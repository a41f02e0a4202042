#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "xspec/io.hpp"
#include "xspec/net.hpp"

namespace xspec {

inline constexpr std::uint16_t kCheckpointVersion = 1;

// Free-form key/value annotations stored in the checkpoint header.
using CheckpointMetadata = std::map<std::string, std::string>;

struct Checkpoint {
    CoupledModel model;
    CheckpointMetadata metadata;
    DType precision = DType::f64;
};

// Layout: "XSPC", u16 version, u32 header length, UTF-8 JSON header
// (layer lists, trainable masks, precision, RNG id, metadata), then every
// conv weight and bias of the visible tower followed by the polarimetric
// tower, little-endian, declaration order, row-major.
std::string encode_checkpoint(const CoupledModel& model, const CheckpointMetadata& metadata = {},
                              DType precision = DType::f64);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const CoupledModel& model,
                     const CheckpointMetadata& metadata = {}, DType precision = DType::f64);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace xspec
