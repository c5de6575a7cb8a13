#include "sigex/core/grid.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace sigex {

Grid::Grid(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("Grid: negative dimension");
  cells_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

Grid::Grid(int rows, int cols, std::vector<double> cells)
    : rows_(rows), cols_(cols), cells_(std::move(cells)) {
  if (rows < 0 || cols < 0 || cells_.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("Grid: cell count does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
}

double Grid::min() const {
  return cells_.empty() ? 0.0 : *std::min_element(cells_.begin(), cells_.end());
}

double Grid::max() const {
  return cells_.empty() ? 0.0 : *std::max_element(cells_.begin(), cells_.end());
}

double Grid::sum() const { return std::accumulate(cells_.begin(), cells_.end(), 0.0); }

void require_same_shape(const Grid& a, const Grid& b, const std::string& what) {
  if (!a.same_shape(b))
    throw std::invalid_argument(what + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()));
}

Grid minmax_normalize(const Grid& g, double flat_value) {
  Grid out(g.rows(), g.cols());
  const double lo = g.min();
  const double range = g.max() - lo;
  auto src = g.cells();
  auto dst = out.cells();
  if (range <= 0.0) {
    std::fill(dst.begin(), dst.end(), flat_value);
    return out;
  }
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - lo) / range;
  return out;
}

}  // namespace sigex
