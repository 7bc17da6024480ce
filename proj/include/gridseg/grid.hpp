#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace gridseg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Number of quadrants induced by a change point. Quadrant arrays are indexed
/// 0..3 for Q1 (top-right), Q2 (top-left), Q3 (bottom-left), Q4 (bottom-right).
inline constexpr int kQuadrants = 4;

struct GridDims {
  int tw = 0;
  int th = 0;

  std::size_t cells() const { return static_cast<std::size_t>(tw) * static_cast<std::size_t>(th); }
  friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// A change point on the 1-based grid. tau_w == T_w encodes "no width split",
/// tau_h == T_h encodes "no height split".
struct ChangePoint {
  int w = 0;
  int h = 0;

  friend bool operator==(const ChangePoint&, const ChangePoint&) = default;
};

bool in_bounds(GridDims dims, ChangePoint tau);
bool is_interior(GridDims dims, ChangePoint tau);
bool is_double_boundary(GridDims dims, ChangePoint tau);

/// Closed, 1-based rectangle [w_lo, w_hi] x [h_lo, h_hi].
struct Rect {
  int w_lo = 1;
  int w_hi = 0;
  int h_lo = 1;
  int h_hi = 0;

  int width() const { return w_hi - w_lo + 1; }
  int height() const { return h_hi - h_lo + 1; }
  std::size_t cells() const {
    return width() <= 0 || height() <= 0 ? 0 : static_cast<std::size_t>(width()) * static_cast<std::size_t>(height());
  }
  bool contains(int w, int h) const { return w >= w_lo && w <= w_hi && h >= h_lo && h <= h_hi; }
  GridDims dims() const { return {width(), height()}; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Dense T_w x T_h grid of p-dimensional observations. Cells are addressed
/// with 1-based (w, h); anything outside 1..T_w x 1..T_h throws std::out_of_range.
class Grid {
 public:
  Grid() = default;
  Grid(int tw, int th, int p);
  /// `values` is laid out column by column: cell (w, h) starts at ((w-1)*T_h + (h-1))*p.
  Grid(int tw, int th, int p, std::vector<double> values);

  int tw() const { return tw_; }
  int th() const { return th_; }
  int p() const { return p_; }
  GridDims dims() const { return {tw_, th_}; }
  std::size_t cells() const { return dims().cells(); }

  std::span<const double> at(int w, int h) const;
  std::span<double> at(int w, int h);
  Eigen::Map<const Vector> vec(int w, int h) const;

  /// Copies the cells of `r` into a new grid with local coordinates 1..width x 1..height.
  Grid subgrid(const Rect& r) const;

  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t offset(int w, int h) const;

  int tw_ = 0;
  int th_ = 0;
  int p_ = 0;
  std::vector<double> values_;
};

struct QuadrantPartition {
  /// Absent entries are empty quadrants.
  std::array<std::optional<Rect>, kQuadrants> rects;
  std::array<std::size_t, kQuadrants> counts{};

  /// 0-based quadrant index of (w, h), or -1 if the cell is outside the grid.
  int quadrant_of(int w, int h) const;
  std::vector<std::pair<int, int>> cells(int j) const;
};

QuadrantPartition quadrant_partition(GridDims dims, ChangePoint tau);

/// Quadrant rectangles of `domain` split at a change point given in the
/// domain's local coordinates. Results are in the same coordinates as `domain`.
std::array<std::optional<Rect>, kQuadrants> split_rect(const Rect& domain, ChangePoint local_tau);

using QuadrantMeans = std::array<std::optional<Vector>, kQuadrants>;

/// Per-quadrant sample means; empty quadrants are std::nullopt.
QuadrantMeans quadrant_means(const Grid& grid, ChangePoint tau);

/// Four mean vectors with their exact nonzero supports (0-based component indices).
struct QuadrantEstimate {
  std::array<Vector, kQuadrants> theta;
  std::array<std::vector<int>, kQuadrants> supports;

  static QuadrantEstimate from_theta(std::array<Vector, kQuadrants> theta);
  /// Union of the four supports, sorted.
  std::vector<int> union_support() const;
  /// max_j |S_j|
  std::size_t sparsity() const;
};

/// (1 / (T_w T_h)) * sum_j sum_{Q_j(tau)} ||x - theta_j||^2. Thetas of empty quadrants are ignored.
double squared_loss(const Grid& grid, ChangePoint tau, const QuadrantEstimate& est);

Grid center_grid(const Grid& grid);

struct ScatterPoint {
  double cx = 0.0;
  double cy = 0.0;
  std::vector<double> obs;
};

/// Bins scattered observations onto a uniform grid over their bounding box.
/// Each cell is the mean of the k nearest points to its center, measured after
/// the bounding box is rescaled to the unit square. Distance ties go to the
/// earlier input point.
Grid bin_scatter_to_grid(std::span<const ScatterPoint> points, GridDims dims, int k_neighbors);

}  // namespace gridseg
