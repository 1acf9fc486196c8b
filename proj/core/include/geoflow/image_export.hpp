#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "geoflow/field.hpp"

namespace geoflow {

/// 8-bit grayscale raster, row-major with axis 0 as rows.
struct Gray8 {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> pixels;
};

/// Min-max normalized to [0, 255]. A constant image keeps its value clamped to [0, 1].
Gray8 to_gray8(const ScalarField &f);

/// Every `stride`-th grid line advected by phi, drawn white on black at `scale` pixels per cell.
Gray8 grid_raster(const Transform &phi, int stride, int scale = 4);

/// Binary PGM (P5).
std::string encode_pgm(const Gray8 &img);

/// Throws std::invalid_argument for non-2D input.
void export_image(const ScalarField &f, const std::filesystem::path &path);
void export_grid(const Transform &phi, int stride, const std::filesystem::path &path, int scale = 4);

} // namespace geoflow
