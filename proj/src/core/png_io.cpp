#include "sigex/core/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

namespace sigex {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

}  // namespace

void write_png(const std::filesystem::path& path, const Grid& grid) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("png: cannot open for writing: " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png: create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png: encoding failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(grid.cols()),
               static_cast<png_uint_32>(grid.rows()), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(static_cast<std::size_t>(grid.cols()));
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) row[c] = to_byte(grid(r, c));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_png_panel(const std::filesystem::path& path, const std::vector<Grid>& tiles,
                     int per_row) {
  if (tiles.empty()) throw std::invalid_argument("png panel: no tiles");
  const int rows = tiles.front().rows();
  const int cols = tiles.front().cols();
  const int n = static_cast<int>(tiles.size());
  const int across = per_row > 0 ? std::min(per_row, n) : n;
  const int down = (n + across - 1) / across;
  Grid panel(down * rows + (down - 1), across * cols + (across - 1), 0.0);
  for (int t = 0; t < n; ++t) {
    require_same_shape(tiles[t], tiles.front(), "png panel");
    const int top = (t / across) * (rows + 1), left = (t % across) * (cols + 1);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) panel(top + r, left + c) = tiles[t](r, c);
  }
  write_png(path, panel);
}

}  // namespace sigex
