#include "sigex/nnkit/serialize.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

namespace sigex::nnkit {

void save_params(const NetworkParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("params: cannot write " + path.string());
  const nlohmann::json header{{"format", "sigex-params/1"},
                              {"spec", params.spec.to_json()},
                              {"spec_hash", params.spec.hash()},
                              {"seed", params.seed},
                              {"epochs", params.epochs},
                              {"extra", params.extra}};
  out << header.dump() << '\n';
  auto put = [&](double v) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    const unsigned char b[4] = {static_cast<unsigned char>(bits),
                                static_cast<unsigned char>(bits >> 8),
                                static_cast<unsigned char>(bits >> 16),
                                static_cast<unsigned char>(bits >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  for (const auto& l : params.layers) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) put(l.weight.data()[i]);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) put(l.bias.data()[i]);
  }
  if (!out) throw std::runtime_error("params: write failed " + path.string());
}

NetworkParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("params: cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  const auto header = nlohmann::json::parse(line);
  if (header.value("format", "") != "sigex-params/1")
    throw std::runtime_error("params: unsupported format in " + path.string());
  NetworkParams p = NetworkParams::zeros(NetworkSpec::from_json(header.at("spec")));
  if (header.value("spec_hash", "") != p.spec.hash())
    throw std::runtime_error("params: spec hash mismatch in " + path.string());
  p.seed = header.value("seed", std::uint64_t{0});
  p.epochs = header.value("epochs", 0);
  p.extra = header.value("extra", nlohmann::json::object());
  auto get = [&]() {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
      throw std::runtime_error("params: truncated arrays in " + path.string());
    const std::uint32_t bits = b[0] | (b[1] << 8) | (b[2] << 16) |
                               (static_cast<std::uint32_t>(b[3]) << 24);
    return static_cast<double>(std::bit_cast<float>(bits));
  };
  for (auto& l : p.layers) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = get();
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias.data()[i] = get();
  }
  if (!p.all_finite()) throw std::runtime_error("params: non-finite values in " + path.string());
  return p;
}

}  // namespace sigex::nnkit
