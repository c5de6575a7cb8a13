#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sigex {

/// Dense row-major 2-D grid of doubles. Rows index frequency bins and
/// columns index time frames wherever the grid holds spectrogram data.
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, double fill = 0.0);
  Grid(int rows, int cols, std::vector<double> cells);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  double& operator()(int r, int c) { return cells_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return cells_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::span<double> cells() { return cells_; }
  std::span<const double> cells() const { return cells_; }

  bool same_shape(const Grid& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }
  double min() const;
  double max() const;
  double sum() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> cells_;
};

/// Throws std::invalid_argument naming `what` and both shapes when they differ.
void require_same_shape(const Grid& a, const Grid& b, const std::string& what);

/// Min-max normalization to [0,1]. A grid with zero dynamic range maps to
/// `flat_value` everywhere.
Grid minmax_normalize(const Grid& g, double flat_value);

}  // namespace sigex
