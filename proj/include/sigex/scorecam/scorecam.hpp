#pragma once

#include <string>
#include <vector>

#include "sigex/core/grid.hpp"
#include "sigex/nnkit/network.hpp"

namespace sigex::scorecam {

struct SaliencyMap {
  Grid grid;  // values in [0,1]
  int target_class = 0;
  std::string sample_id;
};

/// Per-channel Channel-wise Increase of Confidence.
struct CICWeights {
  std::vector<double> values;
};

struct CamOptions {
  /// When false, a_k is the raw masked score instead of its increase over
  /// the all-zero baseline image.
  bool subtract_baseline = true;
};

/// Bilinear resize; target pixel y samples the source at (y - offset) / scale,
/// clamped to the source extent. scale 0 selects half-pixel centres
/// (scale = target / source, offset = (scale - 1) / 2). Target dims must be
/// at least the source dims.
Grid upsample_bilinear(const Grid& map, int rows, int cols, double scale = 0.0,
                       double offset = 0.0);

/// Upsamples every channel to rows x cols (using the stack's pixel geometry)
/// and min-max normalizes each to [0,1]; constant channels become all zero.
std::vector<Grid> upsample_normalize(const nnkit::ActivationStack& stack, int rows, int cols);

/// a_k = softmax_c(f(image * mask_k)) - softmax_c(f(0)). `class_index` is the
/// network output index. Masked passes are batched in channel order.
CICWeights cic_weights(const nnkit::NetworkParams& params, const Grid& image,
                       const std::vector<Grid>& masks, int class_index,
                       const CamOptions& options = {});

/// ReLU(sum_k a_k mask_k), min-max normalized; an all-nonpositive sum yields zeros.
Grid combine_maps(const std::vector<Grid>& masks, const CICWeights& weights);

/// Full Score-CAM against the last convolutional layer.
SaliencyMap score_cam(const nnkit::NetworkParams& params, const Grid& image, int class_index,
                      const CamOptions& options = {}, const std::string& sample_id = "");

}  // namespace sigex::scorecam
