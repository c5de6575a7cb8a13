#include "sigex/scorecam/scorecam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sigex::scorecam {

Grid upsample_bilinear(const Grid& map, int rows, int cols, double scale, double offset) {
  if (rows < map.rows() || cols < map.cols())
    throw std::invalid_argument("upsample: target smaller than source");
  if (map.empty()) throw std::invalid_argument("upsample: empty map");
  Grid out(rows, cols);
  double scale_y = scale, scale_x = scale, offset_y = offset, offset_x = offset;
  if (scale <= 0.0) {
    scale_y = static_cast<double>(rows) / map.rows();
    scale_x = static_cast<double>(cols) / map.cols();
    offset_y = (scale_y - 1.0) / 2.0;
    offset_x = (scale_x - 1.0) / 2.0;
  }
  for (int r = 0; r < rows; ++r) {
    const double y = std::clamp((r - offset_y) / scale_y, 0.0, map.rows() - 1.0);
    const int y0 = static_cast<int>(std::floor(y));
    const int y1 = std::min(y0 + 1, map.rows() - 1);
    const double fy = y - y0;
    for (int c = 0; c < cols; ++c) {
      const double x = std::clamp((c - offset_x) / scale_x, 0.0, map.cols() - 1.0);
      const int x0 = static_cast<int>(std::floor(x));
      const int x1 = std::min(x0 + 1, map.cols() - 1);
      const double fx = x - x0;
      const double top = map(y0, x0) * (1.0 - fx) + map(y0, x1) * fx;
      const double bottom = map(y1, x0) * (1.0 - fx) + map(y1, x1) * fx;
      out(r, c) = top * (1.0 - fy) + bottom * fy;
    }
  }
  return out;
}

std::vector<Grid> upsample_normalize(const nnkit::ActivationStack& stack, int rows, int cols) {
  std::vector<Grid> out;
  out.reserve(stack.maps.size());
  for (const auto& m : stack.maps)
    out.push_back(
        minmax_normalize(upsample_bilinear(m, rows, cols, stack.scale, stack.offset), 0.0));
  return out;
}

CICWeights cic_weights(const nnkit::NetworkParams& params, const Grid& image,
                       const std::vector<Grid>& masks, int class_index,
                       const CamOptions& options) {
  const int classes = params.spec.output_shape().size();
  if (class_index < 0 || class_index >= classes)
    throw std::out_of_range("cic_weights: class index " + std::to_string(class_index) +
                            " outside [0, " + std::to_string(classes) + ")");
  for (const auto& m : masks) require_same_shape(m, image, "cic_weights");

  // Column 0 is the all-zero baseline, column k + 1 is image * mask_k.
  nnkit::Matrix batch = nnkit::Matrix::Zero(static_cast<Eigen::Index>(image.size()),
                                            static_cast<Eigen::Index>(masks.size() + 1));
  for (std::size_t k = 0; k < masks.size(); ++k) {
    double* dst = batch.col(static_cast<Eigen::Index>(k + 1)).data();
    const auto img = image.cells();
    const auto msk = masks[k].cells();
    for (std::size_t i = 0; i < img.size(); ++i) dst[i] = img[i] * msk[i];
  }
  const nnkit::Matrix scores = nnkit::infer(params, batch);
  const double baseline = options.subtract_baseline ? scores(class_index, 0) : 0.0;
  CICWeights w;
  w.values.reserve(masks.size());
  for (std::size_t k = 0; k < masks.size(); ++k)
    w.values.push_back(scores(class_index, static_cast<Eigen::Index>(k + 1)) - baseline);
  return w;
}

Grid combine_maps(const std::vector<Grid>& masks, const CICWeights& weights) {
  if (masks.size() != weights.values.size())
    throw std::invalid_argument("combine_maps: " + std::to_string(weights.values.size()) +
                                " weights for " + std::to_string(masks.size()) + " maps");
  if (masks.empty()) throw std::invalid_argument("combine_maps: no maps");
  Grid sum(masks.front().rows(), masks.front().cols(), 0.0);
  for (std::size_t k = 0; k < masks.size(); ++k) {
    require_same_shape(masks[k], sum, "combine_maps");
    const auto src = masks[k].cells();
    auto dst = sum.cells();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += weights.values[k] * src[i];
  }
  for (double& v : sum.cells()) v = std::max(v, 0.0);
  return minmax_normalize(sum, 0.0);
}

SaliencyMap score_cam(const nnkit::NetworkParams& params, const Grid& image, int class_index,
                      const CamOptions& options, const std::string& sample_id) {
  if (params.spec.activation_tap() < 0)
    throw std::invalid_argument("score_cam: network has no convolutional layer");
  const auto taps = nnkit::forward(params, image, sample_id);
  const auto masks = upsample_normalize(taps.activations, image.rows(), image.cols());
  const auto weights = cic_weights(params, image, masks, class_index, options);
  return {combine_maps(masks, weights), class_index, sample_id};
}

}  // namespace sigex::scorecam
