#include "sigex/evalkit/metrics.hpp"

#include <set>
#include <stdexcept>

namespace sigex::evalkit {

double removed_noise_pct(const Grid& retained, const Grid& gt) {
  require_same_shape(retained, gt, "removed_noise_pct");
  std::size_t noise = 0, whitened = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt.cells()[i] > 0.5) continue;
    ++noise;
    whitened += retained.cells()[i] <= 0.5;
  }
  if (noise == 0) throw std::invalid_argument("removed_noise_pct: ground truth covers every cell");
  return 100.0 * static_cast<double>(whitened) / static_cast<double>(noise);
}

double overwritten_tones_pct(const Grid& retained, const Grid& gt) {
  require_same_shape(retained, gt, "overwritten_tones_pct");
  std::size_t tones = 0, whitened = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt.cells()[i] <= 0.5) continue;
    ++tones;
    whitened += retained.cells()[i] <= 0.5;
  }
  if (tones == 0) throw std::invalid_argument("overwritten_tones_pct: empty ground truth");
  return 100.0 * static_cast<double>(whitened) / static_cast<double>(tones);
}

int label_components(const Grid& binary, std::vector<int>& labels) {
  const int rows = binary.rows(), cols = binary.cols();
  labels.assign(binary.size(), 0);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto idx = static_cast<std::size_t>(r) * cols + c;
      if (binary.cells()[idx] <= 0.5 || labels[idx] != 0) continue;
      labels[idx] = ++next;
      stack.push_back({r, c});
      while (!stack.empty()) {
        const auto [y, x] = stack.back();
        stack.pop_back();
        const int dy[] = {-1, 1, 0, 0}, dx[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int ny = y + dy[k], nx = x + dx[k];
          if (ny < 0 || ny >= rows || nx < 0 || nx >= cols) continue;
          const auto n = static_cast<std::size_t>(ny) * cols + nx;
          if (binary.cells()[n] > 0.5 && labels[n] == 0) {
            labels[n] = next;
            stack.push_back({ny, nx});
          }
        }
      }
    }
  }
  return next;
}

int intersecting_regions(const Grid& retained, const std::vector<Grid>& other_gts) {
  std::vector<int> labels;
  label_components(retained, labels);
  std::set<int> hit;
  for (const auto& gt : other_gts) {
    require_same_shape(retained, gt, "intersecting_regions");
    for (std::size_t i = 0; i < gt.size(); ++i)
      if (gt.cells()[i] > 0.5 && labels[i] != 0) hit.insert(labels[i]);
  }
  return static_cast<int>(hit.size());
}

ExtractionMetrics evaluate(const maskforge::SignatureImage& sig, const Grid& gt,
                           const std::vector<Grid>& other_gts) {
  return {removed_noise_pct(sig.retained, gt), overwritten_tones_pct(sig.retained, gt),
          intersecting_regions(sig.retained, other_gts)};
}

}  // namespace sigex::evalkit
