#pragma once

#include <filesystem>
#include <string_view>

namespace geoflow {

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
/// Throws FormatError(Io) on failure; a partially written file never appears at `path`.
void write_file_atomic(const std::filesystem::path &path, std::string_view bytes);

/// Whole file as a byte string. Throws FormatError(Io) if it cannot be read.
std::string read_file(const std::filesystem::path &path);

} // namespace geoflow
