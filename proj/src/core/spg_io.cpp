#include "sigex/core/spg_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sigex {
namespace {

constexpr std::array<char, 5> kMagic = {'S', 'P', 'E', 'C', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("spg: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_spg(const std::filesystem::path& path, const Grid& grid) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("spg: cannot open for writing: " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<std::uint32_t>(grid.rows()));
  put_u32(out, static_cast<std::uint32_t>(grid.cols()));
  for (double cell : grid.cells()) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(cell));
    put_u32(out, bits);
  }
  if (!out) throw std::runtime_error("spg: write failed: " + path.string());
}

Grid read_spg(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("spg: cannot open: " + path.string());
  std::array<char, 5> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw std::runtime_error("spg: bad magic in " + path.string());
  const auto rows = get_u32(in);
  const auto cols = get_u32(in);
  std::vector<double> cells(static_cast<std::size_t>(rows) * cols);
  for (auto& cell : cells) cell = std::bit_cast<float>(get_u32(in));
  return Grid(static_cast<int>(rows), static_cast<int>(cols), std::move(cells));
}

Grid quantize_f32(const Grid& grid) {
  Grid out = grid;
  for (double& c : out.cells()) c = static_cast<float>(c);
  return out;
}

}  // namespace sigex
