#pragma once

#include "sigex/nnkit/spec.hpp"

namespace sigex::nnkit {

inline constexpr int kEmbeddingWidth = 64;
inline constexpr int kLatentDim = 100;

/// conv(16,3) relu pool2 conv(32,3) relu pool2 flatten dense(128) relu
/// dense(64) relu dense(classes) softmax. Convolutions are unpadded, so a
/// 64x64 input leaves a 29x29 last-conv map.
NetworkSpec spec_cnn(int rows, int cols, int classes);

/// spec_cnn up to and including the embedding activation.
NetworkSpec encoder_spec(int rows, int cols);

/// spec_cnn trunk with a linear scalar head.
NetworkSpec critic_spec(int rows, int cols);

/// dense(input -> 8*8*32) relu, reshape, then stride-2 transposed
/// convolutions until rows x cols, sigmoid output. rows and cols must be
/// equal powers of two times 8.
NetworkSpec upsampling_decoder_spec(int input_width, int rows, int cols);

inline NetworkSpec generator_spec(int rows, int cols) {
  return upsampling_decoder_spec(kLatentDim, rows, cols);
}
inline NetworkSpec decoder_spec(int rows, int cols) {
  return upsampling_decoder_spec(kEmbeddingWidth, rows, cols);
}

}  // namespace sigex::nnkit
