#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sigex::nnkit {

struct Shape {
  int channels = 1;
  int height = 1;
  int width = 1;

  int size() const { return channels * height * width; }
  std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

enum class LayerKind {
  Conv,           // stride 1, odd kernel, "valid" or "same" padding
  ConvTranspose,  // upsamples by `stride`; padding (kernel - stride) / 2
  MaxPool,
  Dense,
  Flatten,
  Reshape,
  Relu,
  Sigmoid,
  Softmax,
  Linear,
};

struct LayerDesc {
  LayerKind kind = LayerKind::Linear;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  int pool = 0;
  int width = 0;
  Shape target{};
  bool same_padding = false;  // Conv only

  static LayerDesc conv(int out_channels, int kernel, bool same_padding = false) {
    LayerDesc d{LayerKind::Conv, out_channels, kernel};
    d.same_padding = same_padding;
    return d;
  }
  static LayerDesc conv_transpose(int out_channels, int kernel, int stride) {
    return {LayerKind::ConvTranspose, out_channels, kernel, stride};
  }
  static LayerDesc max_pool(int size) {
    LayerDesc d{LayerKind::MaxPool};
    d.pool = size;
    return d;
  }
  static LayerDesc dense(int width) {
    LayerDesc d{LayerKind::Dense};
    d.width = width;
    return d;
  }
  static LayerDesc reshape(Shape target) {
    LayerDesc d{LayerKind::Reshape};
    d.target = target;
    return d;
  }
  static LayerDesc flatten() { return {LayerKind::Flatten}; }
  static LayerDesc relu() { return {LayerKind::Relu}; }
  static LayerDesc sigmoid() { return {LayerKind::Sigmoid}; }
  static LayerDesc softmax() { return {LayerKind::Softmax}; }
  static LayerDesc linear() { return {LayerKind::Linear}; }

  bool has_params() const {
    return kind == LayerKind::Conv || kind == LayerKind::ConvTranspose || kind == LayerKind::Dense;
  }
  bool is_activation() const {
    return kind == LayerKind::Relu || kind == LayerKind::Sigmoid || kind == LayerKind::Softmax ||
           kind == LayerKind::Linear;
  }
};

const char* kind_name(LayerKind kind);

struct NetworkSpec {
  Shape input;
  std::vector<LayerDesc> layers;

  /// Output shape of every layer; throws std::invalid_argument when layers do not compose.
  std::vector<Shape> shapes() const;
  Shape output_shape() const;

  /// Index of the layer whose output is the embedding: the activation that
  /// follows the second-to-last dense layer. -1 when there is none.
  int embedding_tap() const;
  /// Index of the layer whose output holds the last convolution's
  /// activations (its trailing activation if present). -1 when there is none.
  int activation_tap() const;

  /// Maps output pixel p of layer `layer` to input-image coordinate
  /// offset + scale * p (pixel centres). Valid for conv/pool chains.
  struct PixelMap {
    double scale = 1.0;
    double offset = 0.0;
  };
  PixelMap pixel_map(int layer) const;

  /// Layers [0, end) as a network of their own.
  NetworkSpec prefix(int end) const;

  nlohmann::json to_json() const;
  static NetworkSpec from_json(const nlohmann::json& j);
  /// Hex digest of the canonical JSON.
  std::string hash() const;
};

}  // namespace sigex::nnkit
