#pragma once

#include <filesystem>

#include "sigex/core/grid.hpp"

namespace sigex {

// ".spg" container: "SPEC1", u32 LE rows, u32 LE cols, row-major f32 LE cells.
void write_spg(const std::filesystem::path& path, const Grid& grid);
Grid read_spg(const std::filesystem::path& path);

/// Rounds every cell to the nearest float32, i.e. what a write/read round trip yields.
Grid quantize_f32(const Grid& grid);

}  // namespace sigex
