#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "geoflow/model.hpp"

namespace geoflow {

/// GFCK: "GFCK", u32 version, u64 metadata length, UTF-8 JSON metadata (model config plus
/// caller extras), u32 tensor count, then per tensor: u32 name length, name, u8 dtype
/// (0 real, 1 complex), u32 rank, u64 dims[rank], float64 data (complex as interleaved re/im).
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    Model model;
    /// JSON object stored alongside the model under "extra".
    std::string extra_json = "{}";
};

std::string encode_checkpoint(const Model &model, std::string_view extra_json = "{}");
Checkpoint decode_checkpoint(std::string_view bytes, const std::string &what = "checkpoint");

void save_checkpoint(const std::filesystem::path &path, const Model &model, std::string_view extra_json = "{}");
Checkpoint load_checkpoint(const std::filesystem::path &path);

/// JSON round-trip of the model configuration.
std::string model_config_to_json(const ModelConfig &cfg);
ModelConfig model_config_from_json(std::string_view json);

} // namespace geoflow
