#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "geoflow/field.hpp"

namespace geoflow {

/// GFLD: 16-byte header ("GFLD", u32 version, 8 reserved bytes), then u32 ndim, u32 dims[3]
/// (unused axes 1), u32 channels, f64 spacing[3], then float64 samples with the channel index
/// fastest. Little-endian throughout.
inline constexpr std::uint32_t kFieldFormatVersion = 1;

std::string encode_field(const MultiField &f);
MultiField decode_field(std::string_view bytes, const std::string &what = "field");

void write_field(const std::filesystem::path &path, const MultiField &f);
MultiField read_field(const std::filesystem::path &path);
/// read_field plus a channel-count check (FormatError Schema on mismatch).
ScalarField read_scalar(const std::filesystem::path &path);
VectorField read_vector(const std::filesystem::path &path);

} // namespace geoflow
