#include "sigex/nnkit/spec.hpp"

#include <cstdio>
#include <stdexcept>

namespace sigex::nnkit {

std::string Shape::str() const {
  return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
}

const char* kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::ConvTranspose: return "conv_transpose";
    case LayerKind::MaxPool: return "max_pool";
    case LayerKind::Dense: return "dense";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Reshape: return "reshape";
    case LayerKind::Relu: return "relu";
    case LayerKind::Sigmoid: return "sigmoid";
    case LayerKind::Softmax: return "softmax";
    case LayerKind::Linear: return "linear";
  }
  return "?";
}

namespace {

LayerKind kind_from_name(const std::string& name) {
  for (auto k : {LayerKind::Conv, LayerKind::ConvTranspose, LayerKind::MaxPool, LayerKind::Dense,
                 LayerKind::Flatten, LayerKind::Reshape, LayerKind::Relu, LayerKind::Sigmoid,
                 LayerKind::Softmax, LayerKind::Linear})
    if (name == kind_name(k)) return k;
  throw std::invalid_argument("unknown layer kind: " + name);
}

[[noreturn]] void bad(std::size_t i, const std::string& why) {
  throw std::invalid_argument("layer " + std::to_string(i) + ": " + why);
}

}  // namespace

std::vector<Shape> NetworkSpec::shapes() const {
  if (input.size() <= 0) throw std::invalid_argument("network input shape is empty");
  std::vector<Shape> out;
  Shape cur = input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    switch (l.kind) {
      case LayerKind::Conv:
        if (l.kernel < 1 || l.kernel % 2 == 0) bad(i, "conv kernel must be odd");
        if (l.out_channels < 1) bad(i, "conv needs out_channels");
        if (l.same_padding) {
          cur = {l.out_channels, cur.height, cur.width};
        } else {
          if (cur.height < l.kernel || cur.width < l.kernel)
            bad(i, "conv kernel larger than input " + cur.str());
          cur = {l.out_channels, cur.height - l.kernel + 1, cur.width - l.kernel + 1};
        }
        break;
      case LayerKind::ConvTranspose:
        if (l.stride < 1 || l.kernel < l.stride || (l.kernel - l.stride) % 2 != 0)
          bad(i, "conv_transpose needs kernel >= stride with even difference");
        if (l.out_channels < 1) bad(i, "conv_transpose needs out_channels");
        cur = {l.out_channels, cur.height * l.stride, cur.width * l.stride};
        break;
      case LayerKind::MaxPool:
        // Trailing rows/columns that do not fill a window are dropped.
        if (l.pool < 1 || cur.height < l.pool || cur.width < l.pool)
          bad(i, "max_pool size exceeds " + cur.str());
        cur = {cur.channels, cur.height / l.pool, cur.width / l.pool};
        break;
      case LayerKind::Dense:
        if (l.width < 1) bad(i, "dense needs width");
        cur = {l.width, 1, 1};
        break;
      case LayerKind::Flatten:
        cur = {cur.size(), 1, 1};
        break;
      case LayerKind::Reshape:
        if (l.target.size() != cur.size())
          bad(i, "reshape " + cur.str() + " -> " + l.target.str() + " changes size");
        cur = l.target;
        break;
      case LayerKind::Softmax:
        if (cur.height != 1 || cur.width != 1) bad(i, "softmax needs a flat input");
        break;
      default:
        break;
    }
    out.push_back(cur);
  }
  return out;
}

Shape NetworkSpec::output_shape() const {
  const auto s = shapes();
  return s.empty() ? input : s.back();
}

int NetworkSpec::embedding_tap() const {
  std::vector<int> dense;
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (layers[i].kind == LayerKind::Dense) dense.push_back(static_cast<int>(i));
  if (dense.size() < 2) return -1;
  int tap = dense[dense.size() - 2];
  if (tap + 1 < static_cast<int>(layers.size()) && layers[tap + 1].is_activation()) ++tap;
  return tap;
}

int NetworkSpec::activation_tap() const {
  int tap = -1;
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (layers[i].kind == LayerKind::Conv) tap = static_cast<int>(i);
  if (tap >= 0 && tap + 1 < static_cast<int>(layers.size()) && layers[tap + 1].is_activation())
    ++tap;
  return tap;
}

NetworkSpec::PixelMap NetworkSpec::pixel_map(int layer) const {
  PixelMap m;
  for (int i = 0; i <= layer && i < static_cast<int>(layers.size()); ++i) {
    const auto& l = layers[i];
    if (l.kind == LayerKind::Conv && !l.same_padding) {
      m.offset += m.scale * (l.kernel - 1) / 2.0;
    } else if (l.kind == LayerKind::MaxPool) {
      m.offset += m.scale * (l.pool - 1) / 2.0;
      m.scale *= l.pool;
    } else if (l.kind == LayerKind::ConvTranspose || l.kind == LayerKind::Dense ||
               l.kind == LayerKind::Flatten || l.kind == LayerKind::Reshape) {
      throw std::invalid_argument("pixel_map: layer " + std::to_string(i) +
                                  " breaks the spatial correspondence");
    }
  }
  return m;
}

NetworkSpec NetworkSpec::prefix(int end) const {
  if (end < 0 || end > static_cast<int>(layers.size()))
    throw std::out_of_range("NetworkSpec::prefix: bad end index");
  return {input, std::vector<LayerDesc>(layers.begin(), layers.begin() + end)};
}

nlohmann::json NetworkSpec::to_json() const {
  nlohmann::json ls = nlohmann::json::array();
  for (const auto& l : layers) {
    nlohmann::json j{{"kind", kind_name(l.kind)}};
    switch (l.kind) {
      case LayerKind::Conv:
        j["out_channels"] = l.out_channels;
        j["kernel"] = l.kernel;
        j["padding"] = l.same_padding ? "same" : "valid";
        break;
      case LayerKind::ConvTranspose:
        j["out_channels"] = l.out_channels;
        j["kernel"] = l.kernel;
        j["stride"] = l.stride;
        break;
      case LayerKind::MaxPool: j["pool"] = l.pool; break;
      case LayerKind::Dense: j["width"] = l.width; break;
      case LayerKind::Reshape:
        j["target"] = {l.target.channels, l.target.height, l.target.width};
        break;
      default: break;
    }
    ls.push_back(std::move(j));
  }
  return {{"input", {input.channels, input.height, input.width}}, {"layers", ls}};
}

NetworkSpec NetworkSpec::from_json(const nlohmann::json& j) {
  NetworkSpec spec;
  const auto& in = j.at("input");
  spec.input = {in.at(0).get<int>(), in.at(1).get<int>(), in.at(2).get<int>()};
  for (const auto& jl : j.at("layers")) {
    LayerDesc l;
    l.kind = kind_from_name(jl.at("kind").get<std::string>());
    l.out_channels = jl.value("out_channels", 0);
    l.kernel = jl.value("kernel", 0);
    l.stride = jl.value("stride", 1);
    l.pool = jl.value("pool", 0);
    l.width = jl.value("width", 0);
    l.same_padding = jl.value("padding", "valid") == "same";
    if (jl.contains("target")) {
      const auto& t = jl.at("target");
      l.target = {t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()};
    }
    spec.layers.push_back(l);
  }
  spec.shapes();
  return spec;
}

std::string NetworkSpec::hash() const {
  // FNV-1a over the canonical dump; identifies architectures, not security-relevant.
  const std::string text = to_json().dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sigex::nnkit
