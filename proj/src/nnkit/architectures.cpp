#include "sigex/nnkit/architectures.hpp"

#include <stdexcept>

namespace sigex::nnkit {
namespace {

std::vector<LayerDesc> trunk() {
  return {LayerDesc::conv(16, 3), LayerDesc::relu(),     LayerDesc::max_pool(2),
          LayerDesc::conv(32, 3), LayerDesc::relu(),     LayerDesc::max_pool(2),
          LayerDesc::flatten(),   LayerDesc::dense(128), LayerDesc::relu()};
}

}  // namespace

NetworkSpec spec_cnn(int rows, int cols, int classes) {
  NetworkSpec s{{1, rows, cols}, trunk()};
  s.layers.push_back(LayerDesc::dense(kEmbeddingWidth));
  s.layers.push_back(LayerDesc::relu());
  s.layers.push_back(LayerDesc::dense(classes));
  s.layers.push_back(LayerDesc::softmax());
  s.shapes();
  return s;
}

NetworkSpec encoder_spec(int rows, int cols) {
  NetworkSpec s = spec_cnn(rows, cols, 2);
  return s.prefix(s.embedding_tap() + 1);
}

NetworkSpec critic_spec(int rows, int cols) {
  NetworkSpec s{{1, rows, cols}, trunk()};
  s.layers.push_back(LayerDesc::dense(1));
  s.layers.push_back(LayerDesc::linear());
  s.shapes();
  return s;
}

NetworkSpec upsampling_decoder_spec(int input_width, int rows, int cols) {
  if (rows != cols || rows < 16 || rows % 8 != 0 || ((rows / 8) & (rows / 8 - 1)) != 0)
    throw std::invalid_argument("decoder: image must be square with side 8 * 2^n");
  NetworkSpec s{{input_width, 1, 1},
                {LayerDesc::dense(8 * 8 * 32), LayerDesc::relu(),
                 LayerDesc::reshape({32, 8, 8})}};
  int side = 8;
  int channels = 32;
  while (side < rows) {
    side *= 2;
    const bool last = side == rows;
    channels = last ? 1 : std::max(4, channels / 2);
    s.layers.push_back(LayerDesc::conv_transpose(channels, 4, 2));
    s.layers.push_back(last ? LayerDesc::sigmoid() : LayerDesc::relu());
  }
  s.shapes();
  return s;
}

}  // namespace sigex::nnkit
