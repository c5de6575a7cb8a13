#pragma once

#include <filesystem>

#include "sigex/nnkit/network.hpp"

namespace sigex::nnkit {

// File layout: one line of JSON (spec, seed, epochs, extra) terminated by
// '\n', followed by every layer's weight (column-major) then bias as
// float32 little-endian, in layer order.
void save_params(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_params(const std::filesystem::path& path);

}  // namespace sigex::nnkit
