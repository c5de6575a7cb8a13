#pragma once

#include <filesystem>

#include "sigex/core/grid.hpp"

namespace sigex {

/// 8-bit grayscale export, pixel = round(255 * clamp(cell, 0, 1)). Row 0 is written first.
void write_png(const std::filesystem::path& path, const Grid& grid);

/// Equally sized grids laid out `per_row` to a row (0 = all in one row),
/// separated by a one-pixel black gutter.
void write_png_panel(const std::filesystem::path& path, const std::vector<Grid>& tiles,
                     int per_row = 0);

}  // namespace sigex
